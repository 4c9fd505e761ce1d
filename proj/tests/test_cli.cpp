#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "densfact/errors.hpp"
#include "doctest.h"
#include "runner/runner.hpp"

using namespace densfact;
using namespace densfact::runner;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(DENSFACT_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

json minimal(const std::string& pipeline) {
  json doc = json::parse(R"({"operator": {"family": "l1-identity", "params": {"d": 4}},
                              "exponents": {"p": 2, "q": 4}})");
  doc["pipeline"] = pipeline;
  return doc;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DENSFACT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("operator families") {
  const OperatorSpec r = generate("rademacher-span", {{"n", 2}}, 1);
  REQUIRE(r.measure.has_value());
  CHECK(r.matrix.rows() == 4);
  CHECK(r.matrix.cols() == 2);
  for (Index a = 0; a < 4; ++a) CHECK(r.measure->weight(static_cast<std::size_t>(a)) == doctest::Approx(0.25));
  CHECK(r.matrix.cwiseAbs().minCoeff() == 1.0);
  CHECK(r.matrix.cwiseAbs().maxCoeff() == 1.0);
  CHECK((r.matrix.col(0).cwiseProduct(r.matrix.col(1))).sum() == 0.0);

  const OperatorSpec id = generate("l1-identity", {{"d", 4}}, 1);
  CHECK((id.matrix - 4.0 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  const LinOp t = id.into_l1();
  for (Index a = 0; a < 4; ++a) CHECK(lp_norm(t.measure().weights(), t.matrix().col(a), 1.0) == doctest::Approx(1.0));

  const json params = {{"dims", 3}, {"atoms", 5}};
  const OperatorSpec g1 = generate("random-gaussian", params, 42);
  const OperatorSpec g2 = generate("random-gaussian", params, 42);
  const OperatorSpec g3 = generate("random-gaussian", params, 43);
  CHECK((g1.matrix - g2.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g1.matrix - g3.matrix).cwiseAbs().maxCoeff() > 0.0);

  CHECK_THROWS_AS(generate("rademacher-span", {{"n", 13}}, 1), CapacityError);
  CHECK_THROWS_AS(generate("nonsense", json::object(), 1), SchemaError);
}

TEST_CASE("scenario schema") {
  CHECK_NOTHROW(parse_scenario(minimal("rosenthal")));
  json bad_q = minimal("rosenthal");
  bad_q["exponents"]["q"] = 1.5;
  CHECK_THROWS_AS(parse_scenario(bad_q), SchemaError);
  json extra = minimal("rosenthal");
  extra["surprise"] = 1;
  CHECK_THROWS_AS(parse_scenario(extra), SchemaError);
  json nested = minimal("rosenthal");
  nested["operator"]["params"]["zz"] = 1;
  CHECK_THROWS_AS(parse_scenario(nested), SchemaError);
  CHECK_THROWS_AS(parse_scenario(minimal("unknown-pipeline")), SchemaError);
  json opt = minimal("rosenthal");
  opt["options"] = {{"delta", 0.5}};
  CHECK_THROWS_AS(parse_scenario(opt), SchemaError);
  json inf_q = minimal("theorem8");
  inf_q["exponents"]["q"] = "inf";
  CHECK(std::isinf(*parse_scenario(inf_q).q));
  CHECK_THROWS_AS(load_scenario(scenario_path("malformed_q_le_p")), SchemaError);
}

TEST_CASE("runs are deterministic and verifiable") {
  const Scenario sc = load_scenario(scenario_path("theorem8_random"));
  const RunOutput a = run_scenario(sc, 1);
  const RunOutput b = run_scenario(sc, 4);
  CHECK(a.table == b.table);
  CHECK(a.exit_code == kExitPass);
  CHECK(a.report.at("trials").size() == static_cast<std::size_t>(sc.trials));
  const VerifyOutcome v = verify_report(a.report);
  CHECK(v.checked > 0);
  CHECK(v.mismatches.empty());

  json tampered = a.report;
  auto& achieved = tampered["trials"][0]["achieved"];
  achieved["residual"] = achieved["residual"].get<double>() + 1.0;
  CHECK_FALSE(verify_report(tampered).mismatches.empty());
}

TEST_CASE("rosenthal and ledger scenarios") {
  const RunOutput r = run_scenario(load_scenario(scenario_path("rosenthal_l1_identity")), 1);
  CHECK(r.exit_code == kExitPass);
  const json& rec = r.report.at("trials")[0];
  CHECK(rec.at("achieved").at("m").get<double>() >= 1.0);
  CHECK(verify_report(r.report).mismatches.empty());

  const RunOutput l = run_scenario(load_scenario(scenario_path("ledger_thm11")), 1);
  CHECK(l.exit_code == kExitPass);
  CHECK(l.report.at("trials")[0].at("witness").at("kind") == "ledger");

  const ConstantLedger direct = theorem_ledger("thm11", {{"n", 4}, {"p", 2}});
  CHECK(direct.value("gamma") == doctest::Approx(std::pow(5.0, 4.0)));
  const ConstantLedger back = ledger_from_json(ledger_to_json(direct));
  CHECK(back == direct);
}

TEST_CASE("command line exit codes") {
  const auto out = std::filesystem::temp_directory_path() / "densfact_cli_test";
  std::filesystem::remove_all(out);
  CHECK(run_cli("run " + scenario_path("rosenthal_l1_identity") + " --out " + (out / "a").string()) == 0);
  CHECK(run_cli("run " + scenario_path("rosenthal_l1_identity") + " --out " + (out / "b").string() + " --jobs 3") == 0);
  CHECK(slurp(out / "a" / "table.csv") == slurp(out / "b" / "table.csv"));
  CHECK(run_cli("verify " + (out / "a" / "report.json").string()) == 0);
  CHECK(run_cli("run " + scenario_path("malformed_q_le_p") + " --out " + (out / "c").string()) == 2);
  CHECK(run_cli("ledger thm11 --params n=4 p=2") == 0);
  CHECK(run_cli("ledger thm11 --params n=4 p=0.5") == 2);
  CHECK(run_cli("generate l1-identity --params d=3") == 0);
  std::filesystem::remove_all(out);
}

}
