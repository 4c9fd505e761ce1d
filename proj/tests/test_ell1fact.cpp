#include <algorithm>
#include <cmath>
#include <numeric>

#include "densfact/ell1fact.hpp"
#include "densfact/errors.hpp"
#include "densfact/rng.hpp"
#include "doctest.h"

using namespace densfact;

namespace {

double binom(double n, double k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= static_cast<int>(k); ++i) r = r * (n - k + i) / i;
  return r;
}

// All s-subsets of {0..m-1} in lexicographic order.
std::vector<std::vector<std::size_t>> subsets(std::size_t m, std::size_t s) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<bool> mask(m, false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(s), true);
  do {
    std::vector<std::size_t> e;
    for (std::size_t i = 0; i < m; ++i)
      if (mask[i]) e.push_back(i);
    out.push_back(e);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

double brute_alpha(const Matrix& a, const std::vector<std::size_t>& e) {
  double s = 0.0;
  for (std::size_t i : e)
    for (std::size_t j : e)
      if (i != j) s += a(static_cast<Index>(i), static_cast<Index>(j));
  return s;
}

double exact_l1_norm(const Matrix& q, const MeasureSpace& mu) {
  double best = 0.0;
  for (Index a = 0; a < q.cols(); ++a) best = std::max(best, q.col(a).cwiseAbs().sum() / mu.weights()(a));
  return best;
}

LinOp l1_identity(Index d) {
  return LinOp::into_lp(NormedSpace::cross_polytope(d), MeasureSpace::uniform_probability(static_cast<std::size_t>(d)),
                        static_cast<double>(d) * Matrix::Identity(d, d));
}

void check_witness(const LinOp& t, const Factorization& f) {
  const FactorizationWitness& w = f.witness;
  CHECK(w.residual <= 1e-8);
  const Matrix bta = w.B * t.matrix() * w.A;
  CHECK((bta - Matrix::Identity(bta.rows(), bta.cols())).cwiseAbs().maxCoeff() <= 1e-8);
  double norm_a = 0.0;
  for (Index i = 0; i < w.A.cols(); ++i) norm_a = std::max(norm_a, t.domain().norm(w.A.col(i)));
  CHECK(norm_a == doctest::Approx(w.norm_a).epsilon(1e-12));
  CHECK(exact_l1_norm(w.B, t.measure()) == doctest::Approx(w.norm_b).epsilon(1e-12));
  CHECK(f.report.gamma_met());
  CHECK(f.report.k_met());
  CHECK(w.norm_product == doctest::Approx(w.norm_a * w.norm_b * w.norm_t));
}

}  // namespace

TEST_SUITE("ell1fact") {

TEST_CASE("subset selection without cross mass") {
  const Matrix a = Matrix::Zero(6, 6);
  const SubsetSelection s = select_subset(a, 6.0, 3);
  CHECK(s.D.size() == 3);
  CHECK(s.max_row == 0.0);
  CHECK(std::is_sorted(s.D.begin(), s.D.end()));
}

TEST_CASE("subset selection with uniform cross mass") {
  Matrix a = Matrix::Ones(4, 4);
  a.diagonal().setZero();
  const SubsetSelection s = select_subset(a, 4.0, 2);
  REQUIRE(s.D.size() == 2);
  const double bound = 3.0 / 6.0 * 4.0;
  CHECK(s.row_bound == doctest::Approx(bound));
  for (const auto& d : subsets(4, 2)) CHECK(brute_alpha(a, d) / 2.0 <= bound);
  CHECK(s.max_row <= bound);
  CHECK_THROWS_AS(select_subset(Matrix::Zero(2, 2), 1.0, 1), DomainError);
  CHECK_THROWS_AS(select_subset(Matrix::Zero(5, 5), 1.0, 3), DomainError);
}

TEST_CASE("subset selection against exhaustive enumeration") {
  Rng rng(17);
  int instances = 0;
  for (std::size_t m = 4; m <= 8; ++m) {
    for (int rep = 0; rep < 40; ++rep, ++instances) {
      const MeasureSpace mu = MeasureSpace::uniform_probability(m);
      Matrix x = rng.normal_matrix(static_cast<Index>(m), static_cast<Index>(m));
      std::vector<AtomSet> sets;
      for (std::size_t j = 0; j < m; ++j) sets.push_back(AtomSet{j});
      const Matrix a = cross_masses(x, mu, sets);
      double total = 0.0;
      for (Index i = 0; i < x.cols(); ++i) total += lp_norm(mu.weights(), x.col(i), 1.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          CHECK(a(static_cast<Index>(i), static_cast<Index>(j)) ==
                doctest::Approx(std::abs(x(static_cast<Index>(j), static_cast<Index>(i))) / static_cast<double>(m)));

      const double alpha = brute_alpha(a, [&] {
        std::vector<std::size_t> all(m);
        std::iota(all.begin(), all.end(), 0);
        return all;
      }());
      for (std::size_t k = 2; 2 * k <= m; ++k) {
        const std::size_t s = 2 * k;
        double sum = 0.0;
        for (const auto& e : subsets(m, s)) sum += brute_alpha(a, e);
        CHECK(sum == doctest::Approx(binom(static_cast<double>(m) - 2, static_cast<double>(s) - 2) * alpha));

        const SubsetSelection sel = select_subset(x, mu, sets, k);
        REQUIRE(sel.D.size() == k);
        CHECK(sel.E0.size() == s);
        CHECK(subset_alpha(a, sel.E0) == doctest::Approx(brute_alpha(a, sel.E0)));
        CHECK(sel.alpha_E0 <= binom(static_cast<double>(s), 2) / binom(static_cast<double>(m), 2) * alpha * (1 + 1e-12));
        const double bound = (2.0 * static_cast<double>(k) - 1.0) / binom(static_cast<double>(m), 2) * total;
        for (std::size_t i : sel.D) {
          CHECK(std::find(sel.E0.begin(), sel.E0.end(), i) != sel.E0.end());
          double row = 0.0;
          for (std::size_t j : sel.D)
            if (j != i) row += a(static_cast<Index>(i), static_cast<Index>(j));
          CHECK(row <= bound * (1 + 1e-12));
        }
      }
    }
  }
  CHECK(instances == 200);
}

TEST_CASE("left inverse constructions") {
  const MeasureSpace mu = MeasureSpace::uniform_probability(4);
  Matrix u = Matrix::Zero(4, 2);
  u(0, 0) = 4.0;
  u(2, 1) = -4.0;
  const LeftInverse li = build_left_inverse(u, mu, {AtomSet{0}, AtomSet{2}}, 1.0, 0.0);
  CHECK(li.residual <= 1e-12);
  CHECK(li.norm == doctest::Approx(1.0));
  CHECK(exact_l1_norm(li.q, mu) == doctest::Approx(1.0));

  Matrix single = Matrix::Zero(4, 1);
  single(1, 0) = 2.0;
  single(3, 0) = 1.0;
  const LeftInverse one = build_left_inverse(single, mu, {AtomSet{1, 3}}, 0.75, 0.0);
  CHECK(one.norm == doctest::Approx(1.0 / 0.75));
  CHECK((one.q * single)(0, 0) == doctest::Approx(1.0));

  // Columns of mass 1/2 on their own atom with cross mass 1/4 = delta / 2.
  Matrix p = Matrix::Zero(4, 2);
  p(0, 0) = 2.0;
  p(1, 0) = 1.0;
  p(1, 1) = 2.0;
  p(0, 1) = 1.0;
  const double delta = 0.5;
  const double gamma = 0.25;
  const LeftInverse pert = build_left_inverse(p, mu, {AtomSet{0}, AtomSet{1}}, delta, gamma);
  CHECK(pert.residual <= 1e-9);
  CHECK(exact_l1_norm(pert.q, mu) == doctest::Approx(pert.norm));
  CHECK(pert.norm <= 1.0 / (delta - gamma) + 1e-8);
  CHECK(pert.norm <= 2.0 / delta / (1.0 - gamma / delta) + 1e-8);

  CHECK_THROWS_AS(build_left_inverse(p, mu, {AtomSet{0}, AtomSet{1}}, 0.5, 0.5), HypothesisError);
}

TEST_CASE("factorization of l1 identities") {
  for (Index d : {1, 4, 9, 12, 16}) {
    const LinOp t = l1_identity(d);
    std::vector<FactorItem> items;
    for (Index i = 0; i < d; ++i)
      items.push_back({Vector::Unit(d, i), AtomSet{static_cast<std::size_t>(i)}});
    const Factorization f = factor_l1(t, items, 1.0);
    check_witness(t, f);
    const std::size_t expected = d >= 4 ? std::max<std::size_t>(2, static_cast<std::size_t>((d + 7) / 8)) : 1;
    CHECK(f.witness.k == expected);
    CHECK(f.witness.norm_product <= 2.0 + 1e-7);
    CHECK(f.report.guaranteed_gamma == doctest::Approx(2.0));
  }
}

TEST_CASE("factorization from extracted items") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(4), MeasureSpace::uniform_probability(8),
                                   rng.normal_matrix(8, 4));
    const ExtractionResult ex = rosenthal_extract(t, 1.5, 4.0);
    std::vector<FactorItem> items;
    double delta = 1.0;
    const double norm = op_norm(t, 1.0).value;
    for (const auto& it : ex.items) {
      items.push_back({it.z, it.F});
      const Vector tz = t.apply(it.z).cwiseProduct(it.F.indicator(8));
      delta = std::min(delta, lp_norm(t.measure().weights(), tz, 1.0) / norm);
    }
    const Factorization f = factor_l1(t, items, delta);
    check_witness(t, f);
    CHECK(f.witness.norm_product <= 2.0 / delta + 1e-7);
  }
  const LinOp t = l1_identity(3);
  CHECK_THROWS_AS(factor_l1(t, {}, 0.5), DomainError);
  CHECK_THROWS_AS(factor_l1(t, {{Vector::Unit(3, 0), AtomSet{1}}}, 0.5), HypothesisError);
  CHECK_THROWS_AS(factor_l1(t, {{Vector::Unit(3, 0), AtomSet{0}}, {Vector::Unit(3, 1), AtomSet{0, 1}}}, 0.5),
                  HypothesisError);
}

TEST_CASE("l_inf factorizations through the adjoint") {
  for (Index m : {4, 8, 12}) {
    const LinOp v(NormedSpace::sign_cube(m), NormedSpace::sign_cube(m), Matrix::Identity(m, m));
    const LinfFactorization f = factor_linf_dual(v, 1.0);
    CHECK(f.residual <= 1e-8);
    CHECK(static_cast<double>(f.report.achieved_k) >= static_cast<double>(m) / 8.0);
    CHECK(f.norm_product <= 2.0 + 1e-7);
    CHECK(f.norm_product == doctest::Approx(f.dual.witness.norm_product).epsilon(1e-9));
    CHECK((f.B * v.matrix() * f.A - Matrix::Identity(f.A.cols(), f.A.cols())).cwiseAbs().maxCoeff() <= 1e-8);
  }

  Matrix z = Matrix::Identity(3, 3);
  z(2, 2) = 0.0;
  CHECK_THROWS_AS(factor_linf_dual(LinOp(NormedSpace::sign_cube(3), NormedSpace::sign_cube(3), z), 0.5),
                  HypothesisError);

  const double eps = 0.25;
  Matrix dg = Matrix::Identity(4, 4);
  dg.diagonal().tail(3).setConstant(eps);
  const LinfFactorization small = factor_linf_dual(LinOp(NormedSpace::sign_cube(4), NormedSpace::sign_cube(4), dg), eps);
  CHECK(small.report.guaranteed_gamma == doctest::Approx(2.0 / eps));
  CHECK(small.norm_product <= 2.0 / eps + 1e-7);
}

TEST_CASE("theorem 8 pipeline on scaled identities") {
  for (Index d : {8, 12, 16}) {
    const LinOp t = l1_identity(d);
    const Theorem8Result r = theorem8_pipeline(t, 2.0, kInfinity);
    check_witness(t, r.fact);
    CHECK(r.sigma == doctest::Approx(0.5));
    CHECK(r.delta == doctest::Approx(std::pow(4.0 * r.Delta, -1.0 / r.sigma)));
    CHECK(r.fact.report.guaranteed_gamma == doctest::Approx(2.0 * std::pow(4.0 * r.Delta, 2.0) / r.norm_t));
    CHECK(r.min_item_mass >= r.delta * (1.0 - 1e-9));
  }
  // q = inf: sigma = 1/p and 2 (4 Delta)^{1/sigma} = 2^{2p+1} Delta^p.
  for (double p : {1.5, 2.0, 3.0}) {
    Rng rng(7);
    const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(3), MeasureSpace::uniform_probability(6),
                                   rng.normal_matrix(6, 3));
    const Theorem8Result r = theorem8_pipeline(t, p, kInfinity);
    check_witness(t, r.fact);
    CHECK(r.sigma == doctest::Approx(1.0 / p));
    CHECK(r.fact.report.guaranteed_gamma * r.norm_t ==
          doctest::Approx(std::pow(2.0, 2.0 * p + 1.0) * std::pow(r.Delta, p)).epsilon(1e-9));
  }
  // Delta = 1 when C_{1,p} = C_{1,q} = ||T||: a rank one operator.
  Matrix rank1 = Vector::LinSpaced(4, 1.0, 4.0) * Vector::Ones(2).transpose();
  const LinOp r1 = LinOp::into_lp(NormedSpace::cross_polytope(2), MeasureSpace::uniform_probability(4), rank1);
  const Theorem8Result one = theorem8_pipeline(r1, 2.0, 4.0);
  CHECK(one.Delta == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(one.fact.report.guaranteed_gamma * one.norm_t ==
        doctest::Approx(2.0 * std::pow(4.0, 1.0 / one.sigma)).epsilon(1e-5));
}

}
