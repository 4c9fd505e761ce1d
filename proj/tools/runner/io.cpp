#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "densfact/kashin.hpp"
#include "densfact/rng.hpp"
#include "runner.hpp"

namespace densfact::runner {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  const json* data = &j;
  Index rows = 0;
  Index cols = -1;
  if (j.is_object()) {
    if (!j.contains("data") || !j.contains("rows") || !j.contains("cols"))
      throw SchemaError("matrix: expected {rows, cols, data}");
    rows = j.at("rows").get<Index>();
    cols = j.at("cols").get<Index>();
    data = &j.at("data");
  }
  if (!data->is_array()) throw SchemaError("matrix: expected an array of rows");
  if (j.is_array()) rows = static_cast<Index>(data->size());
  if (static_cast<Index>(data->size()) != rows) throw SchemaError("matrix: row count mismatch");
  if (cols < 0) cols = rows == 0 ? 0 : static_cast<Index>(data->at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = data->at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw SchemaError("matrix: ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const json& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number()) throw SchemaError("matrix: non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("vector: expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SchemaError("vector: non-numeric entry");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

json space_to_json(const NormedSpace& s) {
  json out{{"kind", std::string(to_string(s.kind()))}, {"dim", s.dim()}};
  switch (s.kind()) {
    case BallKind::kVertexList:
      out["pairs"] = matrix_to_json(s.generators());
      break;
    case BallKind::kQuotient:
      out["weights"] = vector_to_json(s.ambient()->weights());
      out["complement"] = matrix_to_json(s.generators());
      break;
    case BallKind::kInducedL1:
      out["weights"] = vector_to_json(s.ambient()->weights());
      out["basis"] = matrix_to_json(s.generators());
      break;
    default:
      break;
  }
  return out;
}

NormedSpace space_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw SchemaError("space: expected an object with a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  const auto dim = [&] {
    if (!j.contains("dim") || !j.at("dim").is_number_integer()) throw SchemaError("space: missing integer 'dim'");
    const auto d = j.at("dim").get<Index>();
    if (d < 1) throw SchemaError("space.dim: need dim >= 1");
    return d;
  };
  const auto only = [&](std::set<std::string> allowed) {
    for (const auto& [k, _] : j.items())
      if (!allowed.count(k)) throw SchemaError("space: unknown field '" + k + "'");
  };
  if (kind == "cross-polytope") {
    only({"kind", "dim"});
    return NormedSpace::cross_polytope(dim());
  }
  if (kind == "sign-cube") {
    only({"kind", "dim"});
    return NormedSpace::sign_cube(dim());
  }
  if (kind == "euclidean") {
    only({"kind", "dim"});
    return NormedSpace::euclidean(dim());
  }
  if (kind == "vertex-list") {
    only({"kind", "dim", "pairs"});
    if (!j.contains("pairs")) throw SchemaError("space: vertex-list needs 'pairs'");
    return NormedSpace::vertex_pairs(matrix_from_json(j.at("pairs")));
  }
  if (kind == "quotient" || kind == "induced-l1") {
    const char* key = kind == "quotient" ? "complement" : "basis";
    only({"kind", "dim", "weights", key});
    if (!j.contains("weights") || !j.contains(key)) throw SchemaError("space: " + kind + " needs weights and " + key);
    const MeasureSpace mu(vector_from_json(j.at("weights")));
    const Matrix g = matrix_from_json(j.at(key));
    return kind == "quotient" ? NormedSpace::quotient(mu, g) : NormedSpace::induced_l1(mu, g);
  }
  throw SchemaError("space: unknown kind '" + kind + "'");
}

json spec_to_json(const OperatorSpec& spec) {
  json out{{"family", spec.family}, {"domain", space_to_json(spec.domain)}, {"matrix", matrix_to_json(spec.matrix)}};
  if (spec.measure) out["weights"] = vector_to_json(spec.measure->weights());
  if (spec.codomain) out["codomain"] = space_to_json(*spec.codomain);
  return out;
}

LinOp OperatorSpec::into_l1() const {
  if (!measure) throw SchemaError("operator: pipeline needs an operator into L_1 (no measure weights)");
  return LinOp::into_lp(domain, *measure, matrix, 1.0);
}

LinOp OperatorSpec::into_space() const {
  if (!codomain) throw SchemaError("operator: pipeline needs an operator into a normed space (no codomain)");
  return LinOp(domain, *codomain, matrix);
}

OperatorSpec generate(const std::string& family, const json& params, std::uint64_t seed) {
  const auto get = [&](const char* key) { return params.at(key).get<Index>(); };
  OperatorSpec s{family, NormedSpace::euclidean(1), std::nullopt, std::nullopt, Matrix()};
  if (family == "l1-identity") {
    const Index d = get("d");
    s.domain = NormedSpace::cross_polytope(d);
    s.measure = MeasureSpace::uniform_probability(static_cast<std::size_t>(d));
    s.matrix = static_cast<double>(d) * Matrix::Identity(d, d);
    s.codomain = NormedSpace::cross_polytope(d);
  } else if (family == "linf-identity") {
    const Index d = get("d");
    s.domain = NormedSpace::sign_cube(d);
    s.measure = MeasureSpace::uniform_probability(static_cast<std::size_t>(d));
    s.matrix = Matrix::Identity(d, d);
    s.codomain = NormedSpace::sign_cube(d);
  } else if (family == "rademacher-span") {
    const Index n = get("n");
    if (n > 12) throw CapacityError("rademacher-span: n <= 12");
    const Index atoms = Index{1} << n;
    Matrix r(atoms, n);
    for (Index w = 0; w < atoms; ++w)
      for (Index i = 0; i < n; ++i) r(w, i) = ((w >> i) & 1) ? -1.0 : 1.0;
    s.measure = MeasureSpace::uniform_probability(static_cast<std::size_t>(atoms));
    s.domain = NormedSpace::induced_l1(*s.measure, r);
    s.matrix = r;
  } else if (family == "random-gaussian") {
    const Index dims = get("dims");
    const Index atoms = get("atoms");
    const std::string ball = params.value("ball", "cross-polytope");
    Rng rng(seed);
    s.matrix = rng.normal_matrix(atoms, dims);
    if (params.value("weights", "uniform") == "random") {
      Vector w(atoms);
      for (Index a = 0; a < atoms; ++a) w(a) = rng.uniform(0.5, 1.5);
      s.measure = MeasureSpace(w / w.sum());
    } else {
      s.measure = MeasureSpace::uniform_probability(static_cast<std::size_t>(atoms));
    }
    s.domain = ball == "sign-cube"   ? NormedSpace::sign_cube(dims)
               : ball == "euclidean" ? NormedSpace::euclidean(dims)
                                     : NormedSpace::cross_polytope(dims);
    s.codomain = NormedSpace::cross_polytope(atoms);
  } else if (family == "kashin") {
    const int n = static_cast<int>(get("n"));
    const int restarts = params.value("restarts", 64);
    const KashinOperator op = kashin_operator(n, seed, restarts);
    s.domain = op.v.domain();
    s.codomain = std::get<NormedSpace>(op.v.codomain());
    s.matrix = op.v.matrix();
  } else {
    throw SchemaError("unknown family '" + family + "'");
  }
  return s;
}

OperatorSpec materialize(const json& op, std::uint64_t seed) {
  if (op.contains("family")) return generate(op.at("family").get<std::string>(), op.value("params", json::object()), seed);
  OperatorSpec s{"explicit", space_from_json(op.at("domain")), std::nullopt, std::nullopt,
                 matrix_from_json(op.at("matrix"))};
  if (op.contains("weights")) s.measure = MeasureSpace(vector_from_json(op.at("weights")));
  if (op.contains("codomain")) s.codomain = space_from_json(op.at("codomain"));
  return s;
}

json ledger_to_json(const ConstantLedger& l) {
  json out{{"name", l.name}, {"inputs", json::object()}, {"values", json::object()}, {"flags", json::object()}};
  const auto num = [](double v) -> json {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  for (const auto& [k, v] : l.inputs) out["inputs"][k] = num(v);
  for (const auto& [k, v] : l.values) out["values"][k] = num(v);
  for (const auto& [k, v] : l.flags) out["flags"][k] = v;
  return out;
}

ConstantLedger ledger_from_json(const json& j) {
  const auto num = [](const json& v) {
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf") return kInfinity;
      if (s == "-inf") return -kInfinity;
      return std::nan("");
    }
    return v.get<double>();
  };
  ConstantLedger l;
  l.name = j.at("name").get<std::string>();
  for (const auto& [k, v] : j.at("inputs").items()) l.inputs[k] = num(v);
  for (const auto& [k, v] : j.at("values").items()) l.values[k] = num(v);
  for (const auto& [k, v] : j.at("flags").items()) l.flags[k] = v.get<bool>();
  return l;
}

namespace {

using Params = std::map<std::string, double>;

struct LedgerEntry {
  std::vector<std::string> required;
  Params defaults;
  std::function<ConstantLedger(const Params&)> build;
};

ConstantLedger gamma_k_ledger(const std::string& name, const Params& in, GammaK g) {
  ConstantLedger l;
  l.name = name;
  l.inputs = in;
  l.values = {{"gamma", g.gamma}, {"k", g.k}};
  l.flags = {{"k_vacuous", g.k_vacuous()}};
  return l;
}

const std::map<std::string, LedgerEntry>& ledger_table() {
  static const std::map<std::string, LedgerEntry> table = {
      {"thm8",
       {{"norm_t", "c1p", "c1q", "p", "q"},
        {},
        [](const Params& a) {
          return thm8_bounds(a.at("norm_t"), a.at("c1p"), a.at("c1q"), a.at("p"), a.at("q")).ledger();
        }}},
      {"cor9-cor10",
       {{"norm_u", "pi_r", "pi_t", "r", "t", "N"},
        {},
        [](const Params& a) {
          return cor9_cor10_bounds(a.at("norm_u"), a.at("pi_r"), a.at("pi_t"), a.at("r"), a.at("t"), a.at("N"));
        }}},
      {"prop15",
       {{"n", "p", "eps", "c"},
        {{"norm_t", 1.0}},
        [](const Params& a) {
          return gamma_k_ledger("prop15", a,
                                prop15_bounds(a.at("n"), a.at("p"), a.at("eps"), a.at("c"), a.at("norm_t")));
        }}},
      {"thm11",
       {{"n", "p"},
        {{"norm_t", 1.0}},
        [](const Params& a) {
          return gamma_k_ledger("thm11", a, thm11_bounds(a.at("n"), a.at("p"), a.at("norm_t")));
        }}},
      {"cor12a",
       {{"n", "C"}, {{"norm_u", 1.0}}, [](const Params& a) { return cor12a_bounds(a.at("n"), a.at("C"), a.at("norm_u")); }}},
      {"cor12b",
       {{"n", "C", "q", "cq", "eta"},
        {{"norm_u", 1.0}},
        [](const Params& a) {
          return cor12b_bounds(a.at("n"), a.at("C"), a.at("q"), a.at("cq"), a.at("norm_u"), a.at("eta"));
        }}},
      {"prop18",
       {{"n", "t", "eps", "c"},
        {{"norm_u", 1.0}},
        [](const Params& a) {
          return gamma_k_ledger("prop18", a,
                                prop18_bounds(a.at("n"), a.at("t"), a.at("eps"), a.at("c"), a.at("norm_u")));
        }}},
      {"thm16",
       {{"n", "t"},
        {{"norm_u", 1.0}},
        [](const Params& a) {
          return gamma_k_ledger("thm16", a, thm16_bounds(a.at("n"), a.at("t"), a.at("norm_u")));
        }}},
      {"cor19",
       {{"n", "t", "c"}, {}, [](const Params& a) { return cor19_growth(a.at("n"), a.at("t"), a.at("c")).ledger(); }}},
      {"cor20", {{"a", "b", "n"}, {}, [](const Params& a) { return cor20_constants(a.at("a"), a.at("b"), a.at("n")); }}},
      {"thm21", {{"B", "gl", "m"}, {}, [](const Params& a) { return thm21_delta(a.at("B"), a.at("gl"), a.at("m")); }}},
      {"lemma23",
       {{"n", "B_hat"},
        {{"gl", 1.0}},
        [](const Params& a) { return lemma23_driver(a.at("n"), a.at("B_hat"), a.at("gl")).ledger; }}},
      {"james-giesy",
       {{"a", "m"},
        {},
        [](const Params& a) {
          ConstantLedger l;
          l.name = "james-giesy";
          l.inputs = a;
          l.values = {{"bound", james_giesy_chain(a.at("a"), static_cast<int>(a.at("m")))}};
          return l;
        }}},
      {"c1",
       {{},
        {},
        [](const Params&) {
          ConstantLedger l;
          l.name = "c1";
          l.values = {{"c1", c1_constant()}};
          return l;
        }}},
  };
  return table;
}

}  // namespace

std::vector<std::string> ledger_theorems() {
  std::vector<std::string> out;
  for (const auto& [k, _] : ledger_table()) out.push_back(k);
  return out;
}

ConstantLedger theorem_ledger(const std::string& theorem, const std::map<std::string, double>& params) {
  const auto it = ledger_table().find(theorem);
  if (it == ledger_table().end()) throw SchemaError("ledger: unknown theorem '" + theorem + "'");
  const LedgerEntry& e = it->second;
  Params args = e.defaults;
  for (const auto& [k, v] : params) {
    const bool known = std::find(e.required.begin(), e.required.end(), k) != e.required.end() || e.defaults.count(k);
    if (!known) throw SchemaError("ledger." + theorem + ": unknown parameter '" + k + "'");
    args[k] = v;
  }
  for (const auto& k : e.required)
    if (!args.count(k)) throw SchemaError("ledger." + theorem + ": missing parameter '" + k + "'");
  return e.build(args);
}

}  // namespace densfact::runner
