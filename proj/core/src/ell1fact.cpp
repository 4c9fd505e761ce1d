#include "densfact/ell1fact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "densfact/errors.hpp"

namespace densfact {

namespace {

double choose2(double m) { return m * (m - 1.0) / 2.0; }

// Probability that both i and j end up in the random completion.
double pair_probability(int si, int sj, double need, double rest) {
  // s = 1 chosen, 0 undecided, -1 rejected
  if (si < 0 || sj < 0) return 0.0;
  if (si == 1 && sj == 1) return 1.0;
  if (si == 1 || sj == 1) return rest > 0 ? need / rest : 0.0;
  return rest > 1 ? need * (need - 1.0) / (rest * (rest - 1.0)) : 0.0;
}

double conditional_alpha(const Matrix& a, const std::vector<int>& state, double need, double rest) {
  const Index m = a.rows();
  double e = 0.0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      if (i != j && a(i, j) != 0.0)
        e += a(i, j) * pair_probability(state[static_cast<std::size_t>(i)], state[static_cast<std::size_t>(j)],
                                        need, rest);
  return e;
}

double z_norm_max(const LinOp& t, const Matrix& a) {
  double best = 0.0;
  for (Index i = 0; i < a.cols(); ++i) best = std::max(best, t.domain().norm(a.col(i)));
  return best;
}

}  // namespace

NormedSpace l1_space(const MeasureSpace& mu) {
  return NormedSpace::vertex_pairs(Matrix(mu.weights().cwiseInverse().asDiagonal()));
}

double l1_to_l1k_norm(const Matrix& q, const MeasureSpace& mu) {
  if (q.cols() != static_cast<Index>(mu.atom_count())) throw ShapeError("l1_to_l1k_norm: shape mismatch");
  double best = 0.0;
  for (Index a = 0; a < q.cols(); ++a) best = std::max(best, q.col(a).cwiseAbs().sum() / mu.weights()(a));
  return best;
}

bool BoundReport::k_met() const noexcept {
  if (guaranteed_k < 1.0) return achieved_k >= 1;
  return static_cast<double>(achieved_k) >= std::ceil(guaranteed_k - 1e-9);
}

Matrix cross_masses(const Matrix& x, const MeasureSpace& mu, const std::vector<AtomSet>& sets) {
  const Index m = x.cols();
  if (static_cast<Index>(sets.size()) != m) throw ShapeError("cross_masses: one set per function");
  Matrix a(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t atom : sets[static_cast<std::size_t>(j)].members())
        s += mu.weight(atom) * std::abs(x(static_cast<Index>(atom), i));
      a(i, j) = s;
    }
  return a;
}

double subset_alpha(const Matrix& a, const std::vector<std::size_t>& e) {
  double s = 0.0;
  for (std::size_t i : e)
    for (std::size_t j : e)
      if (i != j) s += a(static_cast<Index>(i), static_cast<Index>(j));
  return s;
}

SubsetSelection select_subset(const Matrix& x, const MeasureSpace& mu, const std::vector<AtomSet>& sets,
                              std::size_t k) {
  if (!pairwise_disjoint(sets)) throw DomainError("select_subset: sets must be pairwise disjoint");
  if (x.rows() != static_cast<Index>(mu.atom_count())) throw ShapeError("select_subset: shape mismatch");
  double total = 0.0;
  for (Index i = 0; i < x.cols(); ++i) total += lp_norm(mu.weights(), x.col(i), 1.0);
  return select_subset(cross_masses(x, mu, sets), total, k);
}

SubsetSelection select_subset(const Matrix& a, double total_norm, std::size_t k) {
  const auto m = static_cast<std::size_t>(a.rows());
  if (k <= 1 || 2 * k > m) throw DomainError("select_subset: need 1 < k <= m/2");
  SubsetSelection out;
  out.a = a;
  out.total_norm = total_norm;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (i != j) out.alpha += a(i, j);
  const double md = static_cast<double>(m);
  const double kd = static_cast<double>(k);
  out.E0_bound = choose2(2.0 * kd) / choose2(md) * out.alpha;
  out.row_bound = (2.0 * kd - 1.0) / choose2(md) * total_norm;

  // Method of conditional expectations over uniformly random 2k-subsets.
  const std::size_t s = 2 * k;
  std::vector<int> state(m, 0);
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t rest_after = m - i - 1;
    const bool can_take = chosen < s;
    const bool can_skip = rest_after >= s - chosen;
    if (can_take && can_skip) {
      state[i] = 1;
      const double take = conditional_alpha(a, state, static_cast<double>(s - chosen - 1),
                                            static_cast<double>(rest_after));
      state[i] = -1;
      const double skip = conditional_alpha(a, state, static_cast<double>(s - chosen),
                                            static_cast<double>(rest_after));
      state[i] = take <= skip ? 1 : -1;
    } else {
      state[i] = can_take ? 1 : -1;
    }
    if (state[i] == 1) {
      ++chosen;
      out.E0.push_back(i);
    }
  }
  out.alpha_E0 = subset_alpha(a, out.E0);
  if (out.alpha_E0 > out.E0_bound * (1.0 + 1e-12) + 1e-300)
    throw InternalAlarm("select_subset: conditional expectations exceeded the average");

  std::vector<std::size_t> rest;
  for (std::size_t i : out.E0) {
    double row = 0.0;
    for (std::size_t j : out.E0)
      if (j != i) row += a(static_cast<Index>(i), static_cast<Index>(j));
    const bool heavy = out.alpha_E0 > 0.0 && row >= out.alpha_E0 / kd;
    if (!heavy) rest.push_back(i);
  }
  if (rest.size() < k) throw InternalAlarm("select_subset: too many heavy rows");
  out.D.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(k));
  for (std::size_t i : out.D) {
    double row = 0.0;
    for (std::size_t j : out.D)
      if (j != i) row += a(static_cast<Index>(i), static_cast<Index>(j));
    out.max_row = std::max(out.max_row, row);
  }
  if (out.max_row > out.row_bound * (1.0 + 1e-12) + 1e-300)
    throw InternalAlarm("select_subset: selected rows exceed the bound");
  return out;
}

LeftInverse build_left_inverse(const Matrix& u, const MeasureSpace& mu, const std::vector<AtomSet>& sets,
                               double delta, double gamma) {
  const Index k = u.cols();
  const Index atoms = u.rows();
  if (static_cast<Index>(sets.size()) != k || atoms != static_cast<Index>(mu.atom_count()))
    throw ShapeError("build_left_inverse: shape mismatch");
  if (!(gamma < delta) || !(gamma >= 0.0)) throw HypothesisError("build_left_inverse: need 0 <= gamma < delta");
  double unorm = 0.0;
  for (Index i = 0; i < k; ++i) unorm = std::max(unorm, lp_norm(mu.weights(), u.col(i), 1.0));
  if (unorm > 1.0 + 1e-12) throw HypothesisError("build_left_inverse: ||U|| must be <= 1");
  const Matrix a = cross_masses(u, mu, sets);
  for (Index i = 0; i < k; ++i) {
    if (a(i, i) < delta * (1.0 - 1e-12)) throw HypothesisError("build_left_inverse: diagonal mass below delta");
    if (a.row(i).sum() - a(i, i) > gamma * (1.0 + 1e-12) + 1e-15)
      throw HypothesisError("build_left_inverse: cross mass above gamma");
  }
  Matrix w = Matrix::Zero(k, atoms);
  for (Index i = 0; i < k; ++i)
    for (std::size_t atom : sets[static_cast<std::size_t>(i)].members()) {
      const auto at = static_cast<Index>(atom);
      w(i, at) = mu.weight(atom) * sgn(u(at, i));
    }
  const Matrix wu = w * u;
  Eigen::PartialPivLU<Matrix> lu(wu);
  LeftInverse out;
  out.q = lu.solve(w);
  if (!out.q.allFinite()) throw InternalAlarm("build_left_inverse: WU is singular");
  out.residual = (out.q * u - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  out.norm = l1_to_l1k_norm(out.q, mu);
  out.margin = delta - gamma;
  if (out.residual > 1e-9 || out.norm > 1.0 / out.margin + 1e-8)
    throw InternalAlarm("build_left_inverse: left inverse misses its bounds");
  return out;
}

Factorization factor_l1(const LinOp& t, const std::vector<FactorItem>& items, double delta) {
  const MeasureSpace& mu = t.measure();
  if (items.empty()) throw DomainError("factor_l1: no items");
  if (!(delta > 0.0) || delta > 1.0 + 1e-12) throw DomainError("factor_l1: need 0 < delta <= 1");
  const double norm = op_norm(t, 1.0).value;
  if (!(norm > 0.0)) throw DomainError("factor_l1: T = 0");
  const Index atoms = t.rows();
  const auto m = items.size();

  std::vector<AtomSet> sets;
  Matrix x(atoms, static_cast<Index>(m));
  Vector diag(static_cast<Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Index>(i);
    if (t.domain().norm(items[i].z) > 1.0 + 1e-9) throw HypothesisError("factor_l1: z_i outside Ball(Z)");
    x.col(ii) = t.apply(items[i].z) / norm;
    sets.push_back(items[i].F);
    diag(ii) = lp_norm(mu.weights(), x.col(ii).cwiseProduct(items[i].F.indicator(mu.atom_count())), 1.0);
    if (diag(ii) < delta * (1.0 - 1e-9)) throw HypothesisError("factor_l1: item mass below delta ||T||");
  }
  if (!pairwise_disjoint(sets)) throw HypothesisError("factor_l1: sets must be pairwise disjoint");

  Factorization out;
  FactorizationWitness& w = out.witness;
  w.norm_t = norm;
  BoundReport& r = out.report;
  r.guaranteed_k = delta * static_cast<double>(m) / 8.0;
  r.k_vacuous = r.guaranteed_k < 1.0;
  r.guaranteed_gamma = 2.0 / (delta * norm);
  r.inputs = {{"delta", delta}, {"m", static_cast<double>(m)}, {"norm_t", norm}};

  auto finish = [&](const std::vector<std::size_t>& chosen, const Matrix& q) {
    w.k = chosen.size();
    w.selected = chosen;
    w.A.resize(t.cols(), static_cast<Index>(w.k));
    for (std::size_t i = 0; i < w.k; ++i) w.A.col(static_cast<Index>(i)) = items[chosen[i]].z;
    w.B = q / norm;
    w.norm_a = z_norm_max(t, w.A);
    w.norm_b = l1_to_l1k_norm(w.B, mu);
    w.residual = (w.B * t.matrix() * w.A - Matrix::Identity(static_cast<Index>(w.k), static_cast<Index>(w.k)))
                     .cwiseAbs()
                     .maxCoeff();
    w.norm_product = w.norm_a * w.norm_b * norm;
    r.achieved_k = w.k;
    r.achieved_gamma = w.norm_a * w.norm_b;
    if (w.residual > 1e-8) throw InternalAlarm("factor_l1: B T A differs from the identity");
  };

  if (m >= 4) {
    const std::size_t k0 =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(delta * static_cast<double>(m) / 8.0 - 1e-12)));
    for (std::size_t k = std::min(k0, m / 2); k >= 2; --k) {
      const SubsetSelection sel = select_subset(x, mu, sets, k);
      const Matrix sub_a = sel.a;
      double cross = 0.0;
      for (std::size_t i : sel.D) {
        double row = 0.0;
        for (std::size_t j : sel.D)
          if (j != i) row += sub_a(static_cast<Index>(i), static_cast<Index>(j));
        cross = std::max(cross, row);
      }
      const double gamma = std::min({sel.row_bound, sel.max_row, cross});
      r.inputs["gamma_sigma_form"] = sel.row_bound;
      if (gamma > 0.5 * delta) continue;
      Matrix u(atoms, static_cast<Index>(k));
      std::vector<AtomSet> fs;
      for (std::size_t i = 0; i < k; ++i) {
        u.col(static_cast<Index>(i)) = x.col(static_cast<Index>(sel.D[i]));
        fs.push_back(sets[sel.D[i]]);
      }
      const LeftInverse li = build_left_inverse(u, mu, fs, delta, gamma);
      w.margin = li.margin;
      finish(sel.D, li.q);
      return out;
    }
  }

  // Scalar witness from the heaviest item.
  Index best = 0;
  diag.maxCoeff(&best);
  const auto bi = static_cast<std::size_t>(best);
  Matrix u = x.col(best);
  const LeftInverse li = build_left_inverse(u, mu, {sets[bi]}, diag(best), 0.0);
  w.margin = li.margin;
  finish({bi}, li.q);
  return out;
}

LinfFactorization factor_linf_dual(const LinOp& v, double delta) {
  if (v.domain().kind() != BallKind::kSignCube) throw DomainError("factor_linf_dual: domain must be l_inf^m");
  const auto* x = std::get_if<NormedSpace>(&v.codomain());
  if (!x) throw DomainError("factor_linf_dual: codomain must be a normed space");
  const double vnorm = op_norm(v).value;
  if (std::abs(vnorm - 1.0) > 1e-9) throw DomainError("factor_linf_dual: normalize V to norm 1");
  const Index m = v.cols();
  const NormedSpace xd = x->dual();

  Matrix dual_vertices;
  if (xd.vertex_enumerable()) dual_vertices = xd.vertices();
  std::vector<FactorItem> items;
  for (Index i = 0; i < m; ++i) {
    const Vector col = v.matrix().col(i);
    const double cn = x->norm(col);
    if (cn < delta * (1.0 - 1e-12) || !(cn > 0.0)) throw HypothesisError("factor_linf_dual: ||V e_i|| < delta");
    Vector zstar;
    if (dual_vertices.cols() > 0) {
      Index arg = 0;
      (dual_vertices.transpose() * col).maxCoeff(&arg);
      zstar = dual_vertices.col(arg);
    } else {
      zstar = x->norming_functional(col);
    }
    items.push_back({zstar, AtomSet{static_cast<std::size_t>(i)}});
  }
  const LinOp adj = LinOp::into_lp(xd, MeasureSpace::counting(static_cast<std::size_t>(m)),
                                   v.matrix().transpose(), 1.0);
  LinfFactorization out;
  out.dual = factor_l1(adj, items, delta);
  const FactorizationWitness& w1 = out.dual.witness;
  out.A = w1.B.transpose();
  out.B = w1.A.transpose();
  out.norm_a = out.A.cwiseAbs().rowwise().sum().maxCoeff();
  double nb = 0.0;
  for (Index i = 0; i < out.B.rows(); ++i) nb = std::max(nb, x->dual_norm(out.B.row(i).transpose()));
  out.norm_b = nb;
  const auto k = static_cast<Index>(w1.k);
  out.residual = (out.B * v.matrix() * out.A - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  out.norm_product = out.norm_a * out.norm_b * vnorm;
  if (std::abs(out.norm_product - w1.norm_product) > 1e-9 * std::max(1.0, w1.norm_product))
    throw InternalAlarm("factor_linf_dual: transposed witness changes the norm product");
  out.report = out.dual.report;
  out.report.achieved_gamma = out.norm_a * out.norm_b;
  return out;
}

Theorem8Result theorem8_pipeline(const LinOp& t, double p, double q, double tol) {
  if (!(p > 1.0) || std::isinf(p) || !(q > p)) throw DomainError("theorem8: need 1 < p < q <= inf");
  Theorem8Result out;
  out.norm_t = op_norm(t, 1.0).value;
  if (!(out.norm_t > 0.0)) throw DomainError("theorem8: T = 0");
  const LinOp t1 = t.with_exponent(1.0);

  const MaureyForm fp = maurey_density(t1, p, tol);
  const MaureyForm fq = maurey_density(t1, q, tol);
  const DensityCertificate cp = c1q(t1, p, tol);
  out.c1p_upper = cp.upper;
  out.c1q_upper = std::max(std::isinf(q) ? c1inf(t1) : c1q(t1, q, tol).upper, fq.value);

  const MixedOperator mixed = mix_and_renormalize(t1, fp, fq);
  out.phi = mixed.phi.values();
  out.extraction = rosenthal_extract(mixed.t1, p, q, tol);
  out.c1p_lower = std::min(cp.lower, out.extraction.constants.K * out.extraction.constants.norm);

  out.sigma = 1.0 - conjugate(q) / conjugate(p);
  out.Delta = std::pow(out.norm_t, out.sigma) * std::pow(out.c1q_upper, 1.0 - out.sigma) / out.c1p_lower;
  out.delta = std::pow(4.0 * out.Delta, -1.0 / out.sigma);

  std::vector<FactorItem> items;
  out.min_item_mass = std::numeric_limits<double>::infinity();
  for (const ExtractionItem& it : out.extraction.items) {
    std::vector<std::size_t> atoms;
    for (std::size_t a : it.F.members()) atoms.push_back(mixed.kept_atoms[a]);
    FactorItem fi{it.z, AtomSet(std::move(atoms))};
    const Vector img = t1.apply(fi.z).cwiseProduct(fi.F.indicator(t1.measure().atom_count()));
    out.min_item_mass = std::min(out.min_item_mass, lp_norm(t1.measure().weights(), img, 1.0) / out.norm_t);
    items.push_back(std::move(fi));
  }
  if (out.min_item_mass < out.delta * (1.0 - 1e-9))
    throw InternalAlarm("theorem8: extracted item below the (4 Delta)^{-1/sigma} mass bound");

  out.fact = factor_l1(t1, items, out.delta);
  BoundReport& r = out.fact.report;
  r.guaranteed_gamma = 2.0 * std::pow(4.0 * out.Delta, 1.0 / out.sigma) / out.norm_t;
  r.guaranteed_k = 0.125 * out.delta * std::pow(out.c1p_lower / (8.0 * out.norm_t), conjugate(p));
  r.k_vacuous = r.guaranteed_k < 1.0;
  r.inputs["p"] = p;
  r.inputs["q"] = q;
  r.inputs["sigma"] = out.sigma;
  r.inputs["Delta"] = out.Delta;
  r.inputs["C1p"] = out.c1p_lower;
  r.inputs["C1q"] = out.c1q_upper;
  return out;
}

}  // namespace densfact
