#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <thread>

#include "densfact/rng.hpp"
#include "runner.hpp"
#include "trial.hpp"

namespace densfact::runner {

namespace {

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols = {
      "trial",          "seed",        "status",       "stage",         "metric_name",   "metric",
      "k_achieved",     "k_guaranteed", "gamma_achieved", "gamma_guaranteed", "residual", "norm_product",
      "checks_passed",  "checks_total"};
  return cols;
}

std::string fmt(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
  return buf;
}

json field(const json& obj, const char* key) { return obj.contains(key) ? obj.at(key) : json(); }

std::string table_row(const json& rec) {
  int passed = 0;
  int total = 0;
  for (const auto& [_, v] : rec.at("checks").items()) {
    ++total;
    passed += v.get<bool>() ? 1 : 0;
  }
  const json& a = rec.at("achieved");
  const json& g = rec.at("guaranteed");
  const json stage = rec.contains("error") ? rec.at("error").at("stage") : json();
  const std::vector<json> cells = {rec.at("trial"),      rec.at("seed"),        rec.at("status"),
                                   stage,                rec.at("metric_name"), rec.at("metric"),
                                   field(a, "k"),        field(g, "k"),         field(a, "gamma"),
                                   field(g, "gamma"),    field(a, "residual"),  field(a, "norm_product"),
                                   passed,               total};
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    std::string cell = fmt(cells[i]);
    if (cell.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : cell) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      cell = quoted + "\"";
    }
    line += cell;
  }
  return line + "\n";
}

json aggregate(const json& trials) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& rec : trials) {
    if (rec.at("status") != "ok") continue;
    for (const auto& [k, v] : rec.at("achieved").items())
      if (v.is_number()) values[k].push_back(v.get<double>());
  }
  json out = json::object();
  for (auto& [k, v] : values) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    out[k] = {{"min", v.front()}, {"median", median}, {"max", v.back()}, {"count", n}};
  }
  return out;
}

}  // namespace

std::string table_header() {
  std::string line;
  for (const auto& c : table_columns()) line += (line.empty() ? "" : ",") + c;
  return line + "\n";
}

RunOutput run_scenario(const Scenario& sc, int jobs) {
  const int n = sc.trials;
  std::vector<json> records(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < n; i = next++)
      records[static_cast<std::size_t>(i)] = run_trial(sc, i, mix_seed(sc.seed, static_cast<std::uint64_t>(i)));
  };
  const int threads = std::clamp(jobs, 1, n);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  RunOutput out;
  json trials = json::array();
  json invariants = json::object();
  json failures = json::array();
  bool schema = false;
  bool numeric = false;
  bool invariant = false;
  out.table = table_header();
  for (const auto& rec : records) {
    out.table += table_row(rec);
    const std::string status = rec.at("status");
    if (status == "schema") schema = true;
    if (status == "failed") numeric = true;
    if (rec.contains("error"))
      failures.push_back({{"trial", rec.at("trial")}, {"error", rec.at("error")}});
    for (const auto& [k, v] : rec.at("checks").items()) {
      const bool ok = v.get<bool>();
      invariants[k] = invariants.value(k, true) && ok;
      invariant = invariant || !ok;
    }
    trials.push_back(rec);
  }
  out.exit_code = schema ? kExitSchema : numeric ? kExitNumeric : invariant ? kExitInvariant : kExitPass;
  out.report = {{"tool", "densfact"},
                {"scenario", sc.source},
                {"pipeline", to_string(sc.pipeline)},
                {"seed", sc.seed},
                {"trials", trials},
                {"aggregate", aggregate(trials)},
                {"invariants", invariants},
                {"failures", failures},
                {"table_columns", table_columns()},
                {"exit_code", out.exit_code},
                {"pass", out.exit_code == kExitPass}};
  return out;
}

}  // namespace densfact::runner
