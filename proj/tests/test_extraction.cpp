#include <cmath>

#include "densfact/density.hpp"
#include "densfact/errors.hpp"
#include "densfact/extraction.hpp"
#include "densfact/rng.hpp"
#include "doctest.h"

using namespace densfact;

namespace {

const MeasureSpace kHalves({0.5, 0.5});

LinOp l1_identity(Index d) {
  return LinOp::into_lp(NormedSpace::cross_polytope(d), MeasureSpace::uniform_probability(static_cast<std::size_t>(d)),
                        static_cast<double>(d) * Matrix::Identity(d, d));
}

void check_invariants(const LinOp& t, const ExtractionResult& r) {
  REQUIRE(r.m() >= 1);
  std::vector<AtomSet> sets;
  const double norm = op_norm(t, 1.0).value;
  for (const auto& item : r.items) {
    sets.push_back(item.F);
    CHECK(t.domain().norm(item.z) <= 1.0 + 1e-9);
    const Fun g(t.measure(), t.apply(item.z) / norm);
    const double lhs = sigma_product(g, item.F, r.constants.sigma, r.constants.q);
    CHECK(lhs == doctest::Approx(item.lhs).epsilon(1e-12));
    CHECK(lhs >= r.rhs - 1e-9);
    CHECK(item.mass == doctest::Approx(item.F.measure(t.measure())));
  }
  CHECK(pairwise_disjoint(sets));
  double before_last = 0.0;
  for (std::size_t i = 0; i + 1 < r.items.size(); ++i) before_last += r.items[i].mass;
  CHECK(before_last <= r.constants.eta + 1e-12);
  if (r.guaranteed_m >= 1.0) CHECK(static_cast<double>(r.m()) > r.guaranteed_m);
}

}  // namespace

TEST_SUITE("extraction") {

TEST_CASE("level set split on two atoms") {
  const Fun g(kHalves, Vector::Map(std::vector<double>{2.0, 0.0}.data(), 2));
  const AtomSet f = level_set_split(g, AtomSet{}, 2.0, kInfinity, 0.5);
  CHECK(f == AtomSet{0});
  // gamma = (kappa^p / 2)^{1/(p-1)} = 1/8; the bounds are evaluated directly.
  CHECK(f.measure(kHalves) < std::pow(std::sqrt(2.0) / 0.5, 2.0));
  CHECK(sigma_product(g, f, 0.5, kInfinity) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sigma_product(g, f, 0.5, kInfinity) > std::pow(2.0, -0.5) * 0.5);

  CHECK_THROWS_AS(level_set_split(g, AtomSet{0}, 2.0, kInfinity, 0.5), HypothesisError);

  const Fun flat(kHalves, Vector::Ones(2));
  const AtomSet both = level_set_split(flat, AtomSet{}, 2.0, kInfinity, 0.9);
  CHECK(both == AtomSet{0, 1});
  CHECK(sigma_product(flat, both, 0.5, kInfinity) == doctest::Approx(1.0));

  const Fun big(kHalves, Vector::Constant(2, 3.0));
  CHECK_THROWS_AS(level_set_split(big, AtomSet{}, 2.0, kInfinity, 0.5), DomainError);
}

TEST_CASE("level set excludes ties at gamma") {
  // kappa^p / 2 = gamma^{p-1} with p = 2 gives gamma = kappa^2 / 2 = 0.5 at kappa = 1.
  const Fun g(kHalves, Vector::Map(std::vector<double>{1.5, 0.5}.data(), 2));
  CHECK(level_set_split(g, AtomSet{}, 2.0, 4.0, 1.0) == AtomSet{0});
}

TEST_CASE("level set bounds against a brute-force oracle") {
  Rng rng(3);
  const MeasureSpace mu = MeasureSpace::uniform_probability(6);
  for (int trial = 0; trial < 200; ++trial) {
    Vector v = rng.normal_matrix(6, 1).col(0);
    v /= lp_norm(mu.weights(), v, 1.0);
    const Fun g(mu, v);
    const double p = 1.5 + 0.1 * (trial % 10);
    const double q = trial % 3 ? 2.0 * p : kInfinity;
    const AtomSet e = trial % 2 ? AtomSet{} : AtomSet{static_cast<std::size_t>(trial % 6)};
    const double outside = lp_norm(g.restricted(e.complement(6)), p);
    const double kappa = 0.6 * outside;
    const AtomSet f = level_set_split(g, e, p, q, kappa);
    const double gamma = std::pow(std::pow(kappa, p) / 2.0, 1.0 / (p - 1.0));
    AtomSet expected;
    for (std::size_t a = 0; a < 6; ++a)
      if (std::abs(v(static_cast<Index>(a))) > gamma && !e.contains(a)) expected = expected.unite(AtomSet{a});
    CHECK(f == expected);
    const double sigma = 1.0 - conjugate(q) / conjugate(p);
    CHECK(f.measure(mu) < std::pow(std::pow(2.0, 1.0 / p) / kappa, conjugate(p)));
    CHECK(sigma_product(g, f, sigma, q) > std::pow(2.0, -1.0 / p) * kappa);
  }
}

TEST_CASE("witness search") {
  Matrix m(2, 2);
  m << 2, 0, 0, 2;
  const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(2), kHalves, m);
  const Witness w = find_witness(t, AtomSet{0}, 2.0, 0.5);
  CHECK(std::abs(w.z(1)) == doctest::Approx(1.0));
  CHECK(w.z(0) == 0.0);
  CHECK(w.value == doctest::Approx(std::sqrt(2.0)));

  const Witness full = find_witness(t, AtomSet{}, 2.0, 0.5);
  CHECK(full.value == doctest::Approx(op_norm(t, 2.0).value));

  const LinOp zero = LinOp::into_lp(NormedSpace::cross_polytope(2), kHalves, Matrix::Zero(2, 2));
  CHECK_THROWS_AS(find_witness(zero, AtomSet{}, 2.0, 0.5), HypothesisError);
}

TEST_CASE("extraction on l1 identities matches direct simulation") {
  for (Index d = 2; d <= 8; ++d) {
    const LinOp t = l1_identity(d);
    const ExtractionResult r = rosenthal_extract(t, 2.0, kInfinity);
    check_invariants(t, r);
    // h = 1 is optimal by symmetry: K = ||T : Z -> L_2|| = sqrt(d), so C = 1 and eta = 1/4.
    CHECK(r.constants.K == doctest::Approx(std::sqrt(static_cast<double>(d))).epsilon(1e-8));
    CHECK(r.constants.C == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.constants.eta == doctest::Approx(0.25).epsilon(1e-8));
    // Each step removes one atom of mass 1/d; the loop runs while j/d <= eta.
    std::size_t expected = 0;
    while (static_cast<double>(expected) / static_cast<double>(d) <= r.constants.eta) ++expected;
    CHECK(r.m() == expected);
    for (const auto& item : r.items) CHECK(item.F.size() == 1);
  }
}

TEST_CASE("extraction on rank one and random operators") {
  Matrix rank1 = Vector::LinSpaced(4, 1.0, 4.0) * Vector::Ones(3).transpose();
  const LinOp r1 = LinOp::into_lp(NormedSpace::cross_polytope(3), MeasureSpace::uniform_probability(4), rank1);
  const ExtractionResult a = rosenthal_extract(r1, 2.0, 4.0);
  check_invariants(r1, a);
  CHECK(a.constants.K == doctest::Approx(1.0).epsilon(1e-8));

  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Rng rng(seed);
    const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(3), MeasureSpace::uniform_probability(6),
                                   rng.normal_matrix(6, 3));
    const ExtractionResult r = rosenthal_extract(t, 1.5, 3.0);
    check_invariants(t, r);
    const ExtractionResult again = rosenthal_extract(t, 1.5, 3.0);
    REQUIRE(again.m() == r.m());
    for (std::size_t i = 0; i < r.m(); ++i) {
      CHECK(again.items[i].F == r.items[i].F);
      CHECK((again.items[i].z - r.items[i].z).norm() == 0.0);
    }
  }
}

TEST_CASE("extraction domain errors") {
  const LinOp zero = LinOp::into_lp(NormedSpace::cross_polytope(2), kHalves, Matrix::Zero(2, 2));
  CHECK_THROWS_AS(rosenthal_extract(zero, 2.0, 4.0), DomainError);
  CHECK_THROWS_AS(rosenthal_extract(l1_identity(2), 2.0, 1.5), DomainError);
  const LinOp heavy = LinOp::into_lp(NormedSpace::cross_polytope(2), MeasureSpace({1.0, 1.0}), Matrix::Identity(2, 2));
  CHECK_THROWS_AS(rosenthal_extract(heavy, 2.0, 4.0), DomainError);
}

}
