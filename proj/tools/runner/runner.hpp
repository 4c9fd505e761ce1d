#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "densfact/bounds.hpp"
#include "densfact/errors.hpp"
#include "densfact/linop.hpp"
#include "densfact/measure.hpp"
#include "densfact/normed_space.hpp"

namespace densfact::runner {

using json = nlohmann::ordered_json;

enum ExitCode : int { kExitPass = 0, kExitInvariant = 1, kExitSchema = 2, kExitNumeric = 3 };

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pipeline {
  kRosenthal,
  kFactorL1,
  kFactorLinf,
  kTheorem8,
  kTheorem11,
  kTheorem16,
  kCor12aPremise,
  kKashin,
  kBoundsLedger,
};

std::string to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& name);

struct Scenario {
  Pipeline pipeline = Pipeline::kTheorem8;
  json op;  ///< operator spec as written (family + params, or explicit)
  std::optional<double> p, q, t, eps;
  double solver_tol = 1e-9;
  double check_tol = 1e-8;
  std::uint64_t seed = 1;
  int trials = 1;
  json options = json::object();
  json ledger = json::object();  ///< bounds-ledger only: {theorem, params}
  json source;                   ///< the document as parsed
};

/// Validates the document; throws SchemaError with a path-qualified message.
Scenario parse_scenario(const json& doc);
Scenario load_scenario(const std::string& path);

/// Fully materialized operator. `measure` is set for L_1 targets, `codomain`
/// for operators into a normed space.
struct OperatorSpec {
  std::string family;
  NormedSpace domain;
  std::optional<MeasureSpace> measure;
  std::optional<NormedSpace> codomain;
  Matrix matrix;

  LinOp into_l1() const;
  LinOp into_space() const;
};

OperatorSpec generate(const std::string& family, const json& params, std::uint64_t seed);
OperatorSpec materialize(const json& op, std::uint64_t seed);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);
json space_to_json(const NormedSpace& s);
NormedSpace space_from_json(const json& j);
json spec_to_json(const OperatorSpec& spec);

json ledger_to_json(const ConstantLedger& l);
ConstantLedger ledger_from_json(const json& j);
/// Ledger of a named theorem from named parameters.
ConstantLedger theorem_ledger(const std::string& theorem, const std::map<std::string, double>& params);
std::vector<std::string> ledger_theorems();

/// One trial; never throws for numeric failures (they land in the record).
json run_trial(const Scenario& sc, int index, std::uint64_t seed);

struct RunOutput {
  json report;
  std::string table;
  int exit_code = kExitPass;
};

RunOutput run_scenario(const Scenario& sc, int jobs);

std::string table_header();

struct VerifyOutcome {
  int checked = 0;
  std::vector<std::string> mismatches;
};

/// Recomputes achieved values from the embedded witnesses.
VerifyOutcome verify_report(const json& report, double tol = 1e-9);

}  // namespace densfact::runner
