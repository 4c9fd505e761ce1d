#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "densfact/errors.hpp"
#include "runner.hpp"

namespace densfact::runner {

namespace {

struct PipelineInfo {
  Pipeline id;
  const char* name;
  std::set<std::string> options;
  bool needs_operator;
};

const std::vector<PipelineInfo>& pipelines() {
  static const std::vector<PipelineInfo> table = {
      {Pipeline::kRosenthal, "rosenthal", {}, true},
      {Pipeline::kFactorL1, "factor-l1", {"delta"}, true},
      {Pipeline::kFactorLinf, "factor-linf", {"delta"}, true},
      {Pipeline::kTheorem8, "theorem8", {}, true},
      {Pipeline::kTheorem11, "theorem11", {"z0_dim"}, true},
      {Pipeline::kTheorem16, "theorem16", {"subspace_dim", "c"}, true},
      {Pipeline::kCor12aPremise, "cor12a-premise", {"qs", "solver"}, true},
      {Pipeline::kKashin, "kashin", {"gl", "max_draws"}, true},
      {Pipeline::kBoundsLedger, "bounds-ledger", {}, false},
  };
  return table;
}

const PipelineInfo& info(Pipeline p) {
  for (const auto& e : pipelines())
    if (e.id == p) return e;
  throw SchemaError("unknown pipeline");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw SchemaError(where + ": unknown field '" + key + "'");
}

double exponent_value(const json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInfinity;
  if (!j.is_number()) throw SchemaError(where + ": expected a number or \"inf\"");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(where + ": not finite");
  return v;
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
  if (!obj.at(key).is_number()) throw SchemaError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

long integer(const json& obj, const std::string& key, const std::string& where, long lo, long hi) {
  if (!obj.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw SchemaError(where + "." + key + ": expected an integer");
  const long x = v.get<long>();
  if (x < lo || x > hi)
    throw SchemaError(where + "." + key + ": " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return x;
}

void validate_family(const std::string& family, const json& params) {
  const std::string where = "operator.params";
  if (family == "l1-identity" || family == "linf-identity") {
    reject_unknown(params, {"d"}, where);
    integer(params, "d", where, 1, 24);
  } else if (family == "rademacher-span") {
    reject_unknown(params, {"n"}, where);
    integer(params, "n", where, 1, 12);
  } else if (family == "random-gaussian") {
    reject_unknown(params, {"dims", "atoms", "ball", "weights"}, where);
    integer(params, "dims", where, 1, 12);
    integer(params, "atoms", where, 1, 64);
    if (params.contains("ball")) {
      const auto& b = params.at("ball");
      if (!b.is_string() || (b != "cross-polytope" && b != "sign-cube" && b != "euclidean"))
        throw SchemaError(where + ".ball: expected cross-polytope, sign-cube or euclidean");
    }
    if (params.contains("weights")) {
      const auto& w = params.at("weights");
      if (!w.is_string() || (w != "uniform" && w != "random"))
        throw SchemaError(where + ".weights: expected uniform or random");
    }
  } else if (family == "kashin") {
    reject_unknown(params, {"n", "restarts"}, where);
    integer(params, "n", where, 1, 8);
    if (params.contains("restarts")) integer(params, "restarts", where, 1, 100000);
  } else {
    throw SchemaError("operator.family: unknown family '" + family + "'");
  }
}

void validate_operator(const json& op) {
  if (!op.is_object()) throw SchemaError("operator: expected an object");
  if (op.contains("family")) {
    reject_unknown(op, {"family", "params"}, "operator");
    if (!op.at("family").is_string()) throw SchemaError("operator.family: expected a string");
    validate_family(op.at("family").get<std::string>(), op.value("params", json::object()));
    return;
  }
  reject_unknown(op, {"matrix", "domain", "weights", "codomain"}, "operator");
  if (!op.contains("matrix") || !op.contains("domain"))
    throw SchemaError("operator: explicit operators need 'matrix' and 'domain'");
  if (!op.contains("weights") && !op.contains("codomain"))
    throw SchemaError("operator: explicit operators need 'weights' or 'codomain'");
  try {
    const Matrix m = matrix_from_json(op.at("matrix"));
    const NormedSpace dom = space_from_json(op.at("domain"));
    if (dom.dim() != m.cols()) throw SchemaError("operator.matrix: column count differs from domain dimension");
    if (op.contains("weights")) {
      const Vector w = vector_from_json(op.at("weights"));
      if (w.size() != m.rows()) throw SchemaError("operator.weights: length differs from matrix rows");
      if ((w.array() <= 0.0).any()) throw SchemaError("operator.weights: weights must be positive");
    }
    if (op.contains("codomain")) {
      const NormedSpace cod = space_from_json(op.at("codomain"));
      if (cod.dim() != m.rows()) throw SchemaError("operator.codomain: dimension differs from matrix rows");
    }
  } catch (const Error& e) {
    throw SchemaError(std::string("operator: ") + e.what());
  }
}

void validate_exponents(const Scenario& sc) {
  const auto need = [&](const std::optional<double>& v, const char* name) {
    if (!v) throw SchemaError(std::string("exponents: '") + name + "' is required by " + to_string(sc.pipeline));
  };
  switch (sc.pipeline) {
    case Pipeline::kRosenthal:
    case Pipeline::kFactorL1:
    case Pipeline::kTheorem8:
      need(sc.p, "p");
      need(sc.q, "q");
      if (!(*sc.p > 1.0) || !std::isfinite(*sc.p)) throw SchemaError("exponents.p: need 1 < p < inf");
      if (!(*sc.q > *sc.p)) throw SchemaError("exponents.q: need q > p");
      break;
    case Pipeline::kTheorem11:
      need(sc.p, "p");
      if (!(*sc.p > 1.0) || !std::isfinite(*sc.p)) throw SchemaError("exponents.p: need 1 < p < inf");
      break;
    case Pipeline::kTheorem16:
      need(sc.t, "t");
      if (!(*sc.t > 1.0) || !std::isfinite(*sc.t)) throw SchemaError("exponents.t: need 1 < t < inf");
      break;
    default:
      break;
  }
  if (sc.eps && !(*sc.eps > 0.0 && *sc.eps < 1.0)) throw SchemaError("exponents.eps: need 0 < eps < 1");
}

void validate_options(const Scenario& sc) {
  reject_unknown(sc.options, info(sc.pipeline).options, "options");
  const json& o = sc.options;
  if (o.contains("delta")) {
    const double d = number(o, "delta", "options");
    if (!(d > 0.0 && d <= 1.0)) throw SchemaError("options.delta: need 0 < delta <= 1");
  }
  if (o.contains("z0_dim")) integer(o, "z0_dim", "options", 0, 12);
  if (o.contains("subspace_dim")) integer(o, "subspace_dim", "options", 0, 12);
  if (o.contains("c") && !(number(o, "c", "options") > 0.0)) throw SchemaError("options.c: need c > 0");
  if (o.contains("gl") && !(number(o, "gl", "options") >= 1.0)) throw SchemaError("options.gl: need gl >= 1");
  if (o.contains("max_draws")) integer(o, "max_draws", "options", 1, 64);
  if (o.contains("solver") && o.at("solver") != "symmetric" && o.at("solver") != "general")
    throw SchemaError("options.solver: expected symmetric or general");
  if (o.contains("qs")) {
    const json& qs = o.at("qs");
    if (!qs.is_array() || qs.empty()) throw SchemaError("options.qs: expected a non-empty array");
    double prev = 0.0;
    for (const auto& v : qs) {
      const double q = exponent_value(v, "options.qs");
      if (!(q > 1.0) || !(q > prev)) throw SchemaError("options.qs: need increasing values > 1");
      prev = q;
    }
  }
}

void validate_ledger(const Scenario& sc) {
  if (sc.pipeline != Pipeline::kBoundsLedger) {
    if (!sc.ledger.empty()) throw SchemaError("ledger: only valid for the bounds-ledger pipeline");
    return;
  }
  reject_unknown(sc.ledger, {"theorem", "params"}, "ledger");
  if (!sc.ledger.contains("theorem") || !sc.ledger.at("theorem").is_string())
    throw SchemaError("ledger.theorem: expected a string");
  const auto names = ledger_theorems();
  const auto th = sc.ledger.at("theorem").get<std::string>();
  if (std::find(names.begin(), names.end(), th) == names.end())
    throw SchemaError("ledger.theorem: unknown theorem '" + th + "'");
  const json params = sc.ledger.value("params", json::object());
  if (!params.is_object()) throw SchemaError("ledger.params: expected an object");
  for (const auto& [k, v] : params.items())
    if (!v.is_number()) throw SchemaError("ledger.params." + k + ": expected a number");
}

}  // namespace

std::string to_string(Pipeline p) { return info(p).name; }

Pipeline pipeline_from_string(const std::string& name) {
  for (const auto& e : pipelines())
    if (name == e.name) return e.id;
  throw SchemaError("pipeline: unknown pipeline '" + name + "'");
}

Scenario parse_scenario(const json& doc) {
  reject_unknown(doc,
                 {"description", "pipeline", "operator", "exponents", "tolerances", "seed", "trials", "options",
                  "ledger"},
                 "scenario");
  Scenario sc;
  sc.source = doc;
  if (!doc.contains("pipeline") || !doc.at("pipeline").is_string())
    throw SchemaError("scenario: 'pipeline' must be a string");
  if (doc.contains("description") && !doc.at("description").is_string())
    throw SchemaError("description: expected a string");
  sc.pipeline = pipeline_from_string(doc.at("pipeline").get<std::string>());

  if (info(sc.pipeline).needs_operator) {
    if (!doc.contains("operator")) throw SchemaError("scenario: 'operator' is required by " + to_string(sc.pipeline));
    sc.op = doc.at("operator");
    validate_operator(sc.op);
    const std::string family = sc.op.value("family", "");
    if (sc.pipeline == Pipeline::kCor12aPremise && family != "rademacher-span")
      throw SchemaError("operator.family: cor12a-premise needs rademacher-span");
    if (sc.pipeline == Pipeline::kKashin && family != "kashin")
      throw SchemaError("operator.family: the kashin pipeline needs the kashin family");
  } else if (doc.contains("operator")) {
    throw SchemaError("operator: not used by " + to_string(sc.pipeline));
  }

  if (doc.contains("exponents")) {
    const json& e = doc.at("exponents");
    reject_unknown(e, {"p", "q", "t", "eps"}, "exponents");
    if (e.contains("p")) sc.p = exponent_value(e.at("p"), "exponents.p");
    if (e.contains("q")) sc.q = exponent_value(e.at("q"), "exponents.q");
    if (e.contains("t")) sc.t = exponent_value(e.at("t"), "exponents.t");
    if (e.contains("eps")) sc.eps = exponent_value(e.at("eps"), "exponents.eps");
  }
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    reject_unknown(t, {"solver", "check"}, "tolerances");
    if (t.contains("solver")) sc.solver_tol = number(t, "solver", "tolerances");
    if (t.contains("check")) sc.check_tol = number(t, "check", "tolerances");
    if (!(sc.solver_tol > 0.0 && sc.solver_tol < 1.0)) throw SchemaError("tolerances.solver: need 0 < tol < 1");
    if (!(sc.check_tol > 0.0 && sc.check_tol < 1.0)) throw SchemaError("tolerances.check: need 0 < tol < 1");
  }
  if (doc.contains("seed")) {
    const json& seed = doc.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
      throw SchemaError("seed: expected a non-negative integer");
    sc.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("trials")) sc.trials = static_cast<int>(integer(doc, "trials", "scenario", 1, 100000));
  if (doc.contains("options")) sc.options = doc.at("options");
  if (doc.contains("ledger")) sc.ledger = doc.at("ledger");

  validate_exponents(sc);
  validate_options(sc);
  validate_ledger(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("parse error: ") + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace densfact::runner
