#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "runner/runner.hpp"

namespace fs = std::filesystem;
using namespace densfact::runner;

namespace {

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw SchemaError("parameter '" + item + "': expected key=value");
    const std::string value = item.substr(eq + 1);
    double v = 0;
    try {
      std::size_t used = 0;
      v = value == "inf" ? densfact::kInfinity : std::stod(value, &used);
      if (value != "inf" && used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw SchemaError("parameter '" + item + "': value is not a number");
    }
    out[item.substr(0, eq)] = v;
  }
  return out;
}

int cmd_run(const std::string& path, const std::string& out_dir, int jobs, std::optional<std::uint64_t> seed) {
  Scenario sc = load_scenario(path);
  if (seed) {
    sc.seed = *seed;
    sc.source["seed"] = *seed;
  }
  const RunOutput run = run_scenario(sc, jobs);
  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "report.json") << run.report.dump(2) << "\n";
  std::ofstream(fs::path(out_dir) / "table.csv") << run.table;
  for (const auto& [name, ok] : run.report.at("invariants").items())
    std::cout << (ok.get<bool>() ? "PASS " : "FAIL ") << name << "\n";
  for (const auto& f : run.report.at("failures"))
    std::cerr << "trial " << f.at("trial") << ": " << f.at("error").at("kind").get<std::string>() << " error in stage '"
              << f.at("error").at("stage").get<std::string>() << "': " << f.at("error").at("message").get<std::string>()
              << "\n";
  std::cout << to_string(sc.pipeline) << ": " << sc.trials << " trial(s), exit " << run.exit_code << "\n";
  return run.exit_code;
}

int cmd_verify(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open report '" + path + "'");
  json report;
  try {
    report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("parse error: ") + e.what());
  }
  const VerifyOutcome v = verify_report(report);
  for (const auto& m : v.mismatches) std::cout << "MISMATCH " << m << "\n";
  std::cout << "checked " << v.checked << " value(s), " << v.mismatches.size() << " mismatch(es)\n";
  return v.mismatches.empty() ? kExitPass : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-of-density factorization toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario and write report.json and table.csv");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--jobs", jobs, "Concurrent trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the scenario seed");

  std::string theorem;
  std::vector<std::string> params;
  auto* ledger = app.add_subcommand("ledger", "Print the constants ledger of a theorem");
  ledger->add_option("theorem", theorem, "Theorem name")->required();
  ledger->add_option("--params", params, "key=value pairs");

  std::string report_path;
  auto* verify = app.add_subcommand("verify", "Recompute a report from its witnesses");
  verify->add_option("report", report_path, "report.json")->required();

  std::string family;
  std::vector<std::string> gen_params;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("generate", "Print a materialized operator family");
  gen->add_option("family", family, "Family name")->required();
  gen->add_option("--params", gen_params, "key=value pairs");
  gen->add_option("--seed", gen_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitSchema;
  }

  try {
    if (*run) return cmd_run(scenario_path, out_dir, jobs, seed);
    if (*verify) return cmd_verify(report_path);
    if (*ledger) {
      const auto l = theorem_ledger(theorem, parse_params(params));
      std::cout << ledger_to_json(l).dump(2) << "\n";
      return kExitPass;
    }
    if (*gen) {
      json p = json::object();
      for (const auto& [k, v] : parse_params(gen_params)) p[k] = static_cast<long>(v);
      const json op{{"family", family}, {"params", p}};
      parse_scenario({{"pipeline", "theorem8"}, {"operator", op}, {"exponents", {{"p", 2}, {"q", 4}}}});
      std::cout << spec_to_json(generate(family, p, gen_seed)).dump(2) << "\n";
      return kExitPass;
    }
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const densfact::Error& e) {
    std::cerr << to_string(e.kind()) << " error: " << e.what() << "\n";
    return e.kind() == densfact::ErrorKind::kDomain && *ledger ? kExitSchema : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitPass;
}
