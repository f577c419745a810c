// mechsimp: reproduce constructions, check solution concepts, enumerate.
// Exit codes: 0 verified, 1 refuted, 2 usage or parse error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "mechsimp/cli/commands.hpp"

using namespace mechsimp;

namespace {

std::optional<Rational> opt_rational(const std::string& s, const char* flag) {
  if (s.empty()) return std::nullopt;
  try {
    return parse_rational(s);
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, std::string(flag) + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact checks for simplified auction mechanisms"};
  app.require_subcommand(1);
  std::string format = "table";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "machine"}));

  auto* rep = app.add_subcommand("reproduce", "Run a named construction with its verification");
  std::string id, r_text, eps_text;
  cli::ReproduceOptions ro;
  rep->add_option("id", id, "Construction id")->required()->check(CLI::IsMember(cli::reproduce_ids()));
  rep->add_option("--r", r_text, "Revenue target r (p/q)");
  rep->add_option("--eps", eps_text, "Revenue cap epsilon (p/q)");
  rep->add_option("--k", ro.k, "Items for prop4");
  rep->add_option("--m", ro.m, "Blocks for prop4");

  auto* chk = app.add_subcommand("check", "Check a solution concept against a scenario");
  std::string concept_name, scenario_file, solution_file;
  chk->add_option("--concept", concept_name, "Solution concept")->required()->check(CLI::IsMember(cli::concepts()));
  chk->add_option("scenario", scenario_file, "Scenario file")->required();
  chk->add_option("solution", solution_file, "Solution file");

  auto* en = app.add_subcommand("enumerate", "Enumerate equilibria or quasi-fields");
  std::string what, step_text, max_bid_text;
  std::size_t max_size = 0;
  en->add_option("--what", what, "Target")->required()->check(CLI::IsMember({"equilibria", "quasi-fields"}));
  en->add_option("--max-size", max_size, "Largest family size");
  en->add_option("--grid-step", step_text, "Bid grid step (p/q)");
  en->add_option("--max-bid", max_bid_text, "Largest grid bid (p/q)");
  std::string enum_scenario;
  en->add_option("scenario", enum_scenario, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cli::Report report;
    if (*rep) {
      ro.r = opt_rational(r_text, "--r");
      ro.eps = opt_rational(eps_text, "--eps");
      report = cli::reproduce(id, ro);
    } else if (*chk) {
      const auto scenario = cli::load_scenario(scenario_file);
      std::optional<cli::json> solution;
      if (!solution_file.empty()) solution = cli::load_json(solution_file);
      report = cli::check(concept_name, scenario, solution, solution_file);
    } else {
      cli::EnumerateOptions eo;
      if (en->count("--max-size")) eo.max_size = max_size;
      if (const auto s = opt_rational(step_text, "--grid-step")) eo.grid_step = *s;
      eo.max_bid = opt_rational(max_bid_text, "--max-bid");
      report = cli::enumerate(what, cli::load_scenario(enum_scenario), eo);
    }
    std::cout << (format == "machine" ? cli::render_machine(report) : cli::render_table(report));
    return report.exit_code();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::construction_failed ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
