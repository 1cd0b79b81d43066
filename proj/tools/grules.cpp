#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "grules/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generic-rule grammar toolkit"};
  app.require_subcommand(1);

  std::string check_file;
  CLI::App* check = app.add_subcommand("check", "load a grammar and report conflicts");
  check->add_option("file", check_file, "grammar file")->required();

  std::string parse_file, sentence;
  grules::ParseFlags flags;
  CLI::App* parse = app.add_subcommand("parse", "parse a sentence with a grammar");
  parse->add_option("file", parse_file, "grammar file")->required();
  parse->add_option("sentence", sentence, "whitespace-separated tokens, multiword items joined with +")
      ->required();
  parse->add_flag("--all", flags.all, "print every derivation");
  parse->add_flag("--trace", flags.trace, "print the first derivation step by step");
  parse->add_flag("--json", flags.json, "structured output");
  parse->add_flag("--count", flags.count, "print search statistics");
  parse->add_option("--goal", flags.goal, "override the grammar's goal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  grules::CmdResult r = check->parsed() ? grules::cmd_check(check_file)
                                        : grules::cmd_parse(parse_file, sentence, flags);
  std::fputs(r.out.c_str(), stdout);
  return r.code;
}
