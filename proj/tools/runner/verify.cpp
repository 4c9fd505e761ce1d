#include <cmath>

#include "densfact/density.hpp"
#include "densfact/ell1fact.hpp"
#include "densfact/extraction.hpp"
#include "runner.hpp"
#include "trial.hpp"

namespace densfact::runner {

namespace {

struct Checker {
  VerifyOutcome& out;
  double tol;
  std::string where;

  void near(const std::string& what, double recomputed, const json& reported) {
    ++out.checked;
    const double r = jget(reported);
    const bool ok = (std::isinf(r) && recomputed == r) ||
                    std::abs(recomputed - r) <= tol * std::max(1.0, std::abs(r));
    if (!ok) {
      char buf[160];
      std::snprintf(buf, sizeof buf, ": recomputed %.17g, reported %.17g", recomputed, r);
      out.mismatches.push_back(where + what + buf);
    }
  }
  void holds(const std::string& what, bool ok) {
    ++out.checked;
    if (!ok) out.mismatches.push_back(where + what);
  }
};

OperatorSpec spec_of(const json& j) {
  OperatorSpec s{j.at("family").get<std::string>(), space_from_json(j.at("domain")), std::nullopt, std::nullopt,
                 matrix_from_json(j.at("matrix"))};
  if (j.contains("weights")) s.measure = MeasureSpace(vector_from_json(j.at("weights")));
  if (j.contains("codomain")) s.codomain = space_from_json(j.at("codomain"));
  return s;
}

double max_identity_error(const Matrix& m) {
  return (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

void verify_extraction(Checker& c, const json& w, const json& rec) {
  const LinOp t = spec_of(w.at("operator")).into_l1();
  const json& k = w.at("constants");
  const double norm = op_norm(t, 1.0).value;
  c.near("norm", norm, k.at("norm"));
  const MeasureSpace& mu = t.measure();
  std::vector<AtomSet> sets;
  double min_lhs = kInfinity;
  for (const auto& it : w.at("items")) {
    const Vector z = vector_from_json(it.at("z"));
    std::vector<std::size_t> members = it.at("F").get<std::vector<std::size_t>>();
    const AtomSet f(members);
    sets.push_back(f);
    const Fun g(mu, t.apply(z) / norm);
    const double lhs = sigma_product(g, f, jget(k.at("sigma")), jget(k.at("q")));
    c.near("item.lhs", lhs, it.at("lhs"));
    c.near("item.mass", f.measure(mu), it.at("mass"));
    c.holds("item.z in ball", t.domain().norm(z) <= 1.0 + 1e-9);
    min_lhs = std::min(min_lhs, lhs);
  }
  c.holds("disjoint", pairwise_disjoint(sets) == rec.at("checks").at("disjoint").get<bool>());
  c.near("m", static_cast<double>(sets.size()), rec.at("achieved").at("m"));
  if (!sets.empty()) c.near("min_lhs", min_lhs, rec.at("achieved").at("min_lhs"));
}

void verify_factorization_l1(Checker& c, const json& w, const json& rec) {
  const LinOp t = spec_of(w.at("operator")).into_l1();
  const Matrix a = matrix_from_json(w.at("A"));
  const Matrix b = matrix_from_json(w.at("B"));
  const double norm_t = op_norm(t, 1.0).value;
  double norm_a = 0.0;
  for (Index i = 0; i < a.cols(); ++i) norm_a = std::max(norm_a, t.domain().norm(a.col(i)));
  const double norm_b = l1_to_l1k_norm(b, t.measure());
  const double residual = max_identity_error(b * t.matrix() * a);
  c.near("norm_t", norm_t, w.at("norm_t"));
  c.near("norm_a", norm_a, w.at("norm_a"));
  c.near("norm_b", norm_b, w.at("norm_b"));
  c.near("residual", residual, rec.at("achieved").at("residual"));
  c.near("norm_product", norm_a * norm_b * norm_t, rec.at("achieved").at("norm_product"));
  c.near("gamma", norm_a * norm_b, rec.at("achieved").at("gamma"));
  c.near("k", static_cast<double>(a.cols()), rec.at("achieved").at("k"));
  if (w.contains("P")) {
    const Matrix p = matrix_from_json(w.at("P"));
    c.near("projection_norm", l1_projection_norm(p, t.measure()), w.at("projection_norm"));
    const Matrix z0 = matrix_from_json(w.at("z0"));
    const Matrix proj = z0.cols() ? Matrix(z0 * z0.completeOrthogonalDecomposition().pseudoInverse())
                                  : Matrix::Zero(t.cols(), t.cols());
    const Matrix v = t.matrix() * (matrix_from_json(w.at("G")) * proj).transpose();
    const double id = (v * p - v).cwiseAbs().maxCoeff();
    c.holds("projection keeps the extremal pairing", id <= 1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff()));
  }
}

void verify_factorization_linf(Checker& c, const json& w, const json& rec) {
  const OperatorSpec spec = spec_of(w.at("operator"));
  const NormedSpace& x = spec.codomain.value();
  const Matrix v = matrix_from_json(w.at("V"));
  const Matrix a = matrix_from_json(w.at("A"));
  const Matrix b = matrix_from_json(w.at("B"));
  const double norm_v = op_norm(LinOp(spec.domain, x, v)).value;
  const double norm_a = a.cwiseAbs().rowwise().sum().maxCoeff();
  double norm_b = 0.0;
  for (Index i = 0; i < b.rows(); ++i) norm_b = std::max(norm_b, x.dual_norm(b.row(i).transpose()));
  const double residual = max_identity_error(b * v * a);
  c.near("norm_t", norm_v, w.at("norm_t"));
  c.near("norm_a", norm_a, w.at("norm_a"));
  c.near("norm_b", norm_b, w.at("norm_b"));
  c.near("residual", residual, rec.at("achieved").at("residual"));
  c.near("norm_product", norm_a * norm_b * norm_v, rec.at("achieved").at("norm_product"));
  c.near("gamma", norm_a * norm_b, rec.at("achieved").at("gamma"));
  c.near("k", static_cast<double>(a.cols()), rec.at("achieved").at("k"));
  if (w.contains("P")) {
    const Matrix p = matrix_from_json(w.at("P"));
    const Matrix e = matrix_from_json(w.at("E"));
    c.near("projection_norm", p.cwiseAbs().rowwise().sum().maxCoeff(), w.at("projection_norm"));
    c.holds("projection fixes E", (p * e - e).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, e.cwiseAbs().maxCoeff()));
  }
}

void verify_density(Checker& c, const json& w) {
  const OperatorSpec spec = spec_of(w.at("operator"));
  const Matrix cand = matrix_from_json(w.at("candidates"));
  const Matrix expected = rademacher_candidates(spec.matrix, *spec.measure);
  c.holds("candidates", expected.rows() == cand.rows() && expected.cols() == cand.cols() &&
                            (expected - cand).cwiseAbs().maxCoeff() <= 1e-12);
  const LinOp t = LinOp::into_lp(NormedSpace::vertex_pairs(cand), *spec.measure, spec.matrix, 1.0);
  double prev = 0.0;
  for (const auto& e : w.at("per_q")) {
    const double q = jget(e.at("q"));
    const double upper = density_upper(t, vector_from_json(e.at("h")), q);
    const double lower = density_dual_value(t, vector_from_json(e.at("lambda")), q);
    c.near("upper", upper, e.at("upper"));
    c.near("lower", lower, e.at("lower"));
    c.holds("lower <= upper", lower <= upper * (1.0 + 1e-9));
    c.holds("monotone", upper >= prev * (1.0 - 1e-6));
    prev = upper;
  }
}

void verify_kashin(Checker& c, const json& w, const json& rec) {
  const Matrix u = matrix_from_json(w.at("U"));
  const Index n = w.at("n").get<Index>();
  c.holds("U orthogonal", max_identity_error(u.transpose() * u) <= 1e-9);
  const Vector ext = vector_from_json(w.at("extremal_e1"));
  const Vector f = u.leftCols(2 * n) * ext;
  const Vector weights = Vector::Constant(3 * n, 1.0 / static_cast<double>(3 * n));
  c.near("b_e1", lp_norm(weights, f, 2.0) / lp_norm(weights, f, 1.0), w.at("b_e1"));
  const double b_hat = std::max({1.0, jget(w.at("b_e1")), jget(w.at("b_e2"))});
  c.near("b_hat", b_hat, w.at("b_hat"));
  c.near("b_hat (achieved)", b_hat, rec.at("achieved").at("b_hat"));
  c.near("B_hat",
         b_hat * jget(w.at("norm_projection")) * jget(w.at("pi1_inf1")) * jget(w.at("norm_i12")), w.at("B_hat"));
}

void verify_ledgers(Checker& c, const json& rec) {
  for (const auto& entry : rec.at("ledgers")) {
    std::map<std::string, double> params;
    for (const auto& [k, v] : entry.at("params").items()) params[k] = jget(v);
    const ConstantLedger fresh = theorem_ledger(entry.at("theorem").get<std::string>(), params);
    const ConstantLedger stored = ledger_from_json(entry.at("ledger"));
    c.holds("ledger keys", fresh.values.size() == stored.values.size() && fresh.flags == stored.flags);
    for (const auto& [k, v] : fresh.values) {
      if (!stored.values.count(k)) continue;
      const double s = stored.values.at(k);
      if (std::isnan(v) || std::isnan(s)) {
        c.holds("ledger." + k + " nan", std::isnan(v) && std::isnan(s));
      } else {
        c.near("ledger." + k, v, jnum(s));
      }
    }
  }
}

}  // namespace

VerifyOutcome verify_report(const json& report, double tol) {
  VerifyOutcome out;
  for (const auto& rec : report.at("trials")) {
    if (rec.at("status") != "ok") continue;
    Checker c{out, tol, "trial " + std::to_string(rec.at("trial").get<int>()) + ": "};
    const json& w = rec.at("witness");
    const std::string kind = w.value("kind", "");
    if (kind == "extraction") verify_extraction(c, w, rec);
    else if (kind == "factorization-l1") verify_factorization_l1(c, w, rec);
    else if (kind == "factorization-linf") verify_factorization_linf(c, w, rec);
    else if (kind == "density") verify_density(c, w);
    else if (kind == "kashin") verify_kashin(c, w, rec);
    else if (kind != "ledger") c.holds("unknown witness kind '" + kind + "'", false);
    verify_ledgers(c, rec);
  }
  return out;
}

}  // namespace densfact::runner
