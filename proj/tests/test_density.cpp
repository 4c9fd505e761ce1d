#include <cmath>

#include "densfact/density.hpp"
#include "densfact/errors.hpp"
#include "densfact/rng.hpp"
#include "doctest.h"

using namespace densfact;

namespace {

LinOp two_atom() {
  Matrix m(2, 2);
  m << 2, 0, 0, 2;
  return LinOp::into_lp(NormedSpace::cross_polytope(2), MeasureSpace({0.5, 0.5}), m);
}

LinOp random_op(std::uint64_t seed, Index atoms, Index dim) {
  Rng rng(seed);
  Matrix m = rng.normal_matrix(atoms, dim);
  return LinOp::into_lp(NormedSpace::cross_polytope(dim), MeasureSpace::uniform_probability(atoms), m);
}

// ||h||_{q*} max_j ||h^{-1} T e_j||_q written out for the two-atom example.
double two_atom_objective(double h0, double h1, double q) {
  const double s = conjugate(q);
  const double hs = std::pow(0.5 * std::pow(h0, s) + 0.5 * std::pow(h1, s), 1.0 / s);
  const double c0 = std::pow(0.5 * std::pow(2.0 / h0, q), 1.0 / q);
  const double c1 = std::pow(0.5 * std::pow(2.0 / h1, q), 1.0 / q);
  return hs * std::max(c0, c1);
}

}  // namespace

TEST_SUITE("density") {

TEST_CASE("c1q on the symmetric two-atom example") {
  const DensityCertificate cert = c1q(two_atom(), 2.0);
  CHECK(cert.upper == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  CHECK(cert.lower <= cert.upper);
  CHECK(cert.gap <= 1e-9 * cert.upper + 1e-12);
  CHECK(cert.h(0) == doctest::Approx(cert.h(1)).epsilon(1e-6));

  double best = kInfinity;
  for (int i = 1; i <= 400; ++i) best = std::min(best, two_atom_objective(i / 200.0, 1.0, 2.0));
  CHECK(best == doctest::Approx(cert.upper).epsilon(1e-9));
  for (double q : {1.5, 3.0, 5.0}) {
    double grid = kInfinity;
    for (int i = 1; i <= 400; ++i) grid = std::min(grid, two_atom_objective(i / 200.0, 1.0, q));
    CHECK(c1q(two_atom(), q).upper == doctest::Approx(grid).epsilon(1e-7));
  }
}

TEST_CASE("c1q trivial cases") {
  const LinOp zero = LinOp::into_lp(NormedSpace::cross_polytope(2), MeasureSpace({0.5, 0.5}), Matrix::Zero(2, 2));
  const DensityCertificate z = c1q(zero, 2.0);
  CHECK(z.upper == 0.0);
  CHECK(z.lower == 0.0);

  Matrix one(1, 1);
  one << 1.0;
  const LinOp single = LinOp::into_lp(NormedSpace::cross_polytope(1), MeasureSpace({1.0}), one);
  for (double q : {1.5, 2.0, 4.0, 10.0}) CHECK(c1q(single, q).upper == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("c1q sandwich, scaling and recomputation") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const LinOp t = random_op(seed, 5, 3);
    const double norm = op_norm(t, 1.0).value;
    const double env = c1inf(t);
    double prev = norm;
    for (double q : {1.5, 2.0, 3.0, 6.0}) {
      const DensityCertificate cert = c1q(t, q, 1e-8);
      CHECK(cert.upper >= norm * (1.0 - 1e-8));
      CHECK(cert.upper <= env * (1.0 + 1e-8));
      CHECK(cert.upper >= prev * (1.0 - 1e-6));
      prev = cert.upper;
      CHECK(density_upper(t, cert.h.values(), q) == doctest::Approx(cert.upper).epsilon(1e-9));
      CHECK(density_dual_value(t, cert.lambda, q) <= cert.upper * (1.0 + 1e-9));
      CHECK(cert.h.values().minCoeff() >= 1e-12);
      CHECK(c1q(t.scaled(3.0), q, 1e-8).upper == doctest::Approx(3.0 * cert.upper).epsilon(1e-6));
    }
  }
}

TEST_CASE("c1inf is the integral of the envelope") {
  CHECK(c1inf(two_atom()) == doctest::Approx(2.0));
  const LinOp zero = LinOp::into_lp(NormedSpace::cross_polytope(3), MeasureSpace::uniform_probability(4),
                                    Matrix::Zero(4, 3));
  CHECK(c1inf(zero) == 0.0);

  Rng rng(11);
  const Vector col = rng.normal_matrix(6, 1).col(0);
  const Matrix rank1 = col * Vector::LinSpaced(3, 1.0, 3.0).transpose();
  const LinOp r1 = LinOp::into_lp(NormedSpace::cross_polytope(3), MeasureSpace::uniform_probability(6), rank1);
  CHECK(c1inf(r1) == doctest::Approx(op_norm(r1, 1.0).value).epsilon(1e-12));

  // The envelope density is optimal; a coarse density grid never beats it.
  double grid = kInfinity;
  for (int i = 1; i <= 200; ++i) {
    const double h0 = i / 100.0;
    const double norm_h = 0.5 * h0 + 0.5;
    grid = std::min(grid, norm_h * std::max(2.0 / h0, 2.0));
  }
  CHECK(grid == doctest::Approx(2.0));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LinOp t = random_op(seed, 4, 3);
    CHECK(c1inf(t) <= 3.0 * op_norm(t, 1.0).value * (1.0 + 1e-12));
  }
}

TEST_CASE("maurey densities") {
  Matrix one(1, 1);
  one << 3.0;
  const MaureyForm single = maurey_density(LinOp::into_lp(NormedSpace::cross_polytope(1), MeasureSpace({2.0}), one), 2.0);
  CHECK(single.phi(0) == doctest::Approx(0.5));

  const MaureyForm inf = maurey_density(two_atom(), kInfinity);
  CHECK(inf.phi(0) == doctest::Approx(1.0));
  CHECK(inf.phi(1) == doctest::Approx(1.0));
  CHECK(inf.value == doctest::Approx(2.0));

  const LinOp id = LinOp::into_lp(NormedSpace::cross_polytope(4), MeasureSpace::uniform_probability(4),
                                  4.0 * Matrix::Identity(4, 4));
  const MaureyForm sym = maurey_density(id, 2.0, 1e-10);
  for (std::size_t a = 0; a < 4; ++a) CHECK(sym.phi(a) == doctest::Approx(1.0).epsilon(1e-5));

  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const LinOp t = random_op(seed, 5, 3);
    for (double r : {1.5, 3.0}) {
      const MaureyForm f = maurey_density(t, r, 1e-8);
      CHECK(f.phi.integral() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(maurey_value(t, f.phi.values(), r) == doctest::Approx(f.value).epsilon(1e-9));
      CHECK(f.value <= c1q(t, r, 1e-8).upper * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("mix and renormalize") {
  const MaureyForm a = maurey_density(two_atom(), 2.0);
  const MixedOperator same = mix_and_renormalize(two_atom(), a, a);
  CHECK(same.phi(0) == doctest::Approx(a.phi(0)));
  CHECK(same.t1.matrix()(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(same.t1.matrix()(1, 1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(same.t1.measure().weight(0) == doctest::Approx(0.5).epsilon(1e-6));

  Matrix m(3, 2);
  m << 1, 2, -1, 0, 0, 0;
  const LinOp dropped = LinOp::into_lp(NormedSpace::cross_polytope(2), MeasureSpace::uniform_probability(3), m);
  const MaureyForm p = maurey_density(dropped, 1.5);
  const MaureyForm q = maurey_density(dropped, 4.0);
  const MixedOperator mixed = mix_and_renormalize(dropped, p, q);
  CHECK(mixed.kept_atoms == std::vector<std::size_t>{0, 1});
  CHECK(op_norm(mixed.t1, 1.0).value == doctest::Approx(op_norm(dropped, 1.0).value).epsilon(1e-9));

  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const LinOp t = random_op(seed, 5, 3);
    const MaureyForm fp = maurey_density(t, 1.5, 1e-8);
    const MaureyForm fq = maurey_density(t, 3.0, 1e-8);
    const MixedOperator mix = mix_and_renormalize(t, fp, fq);
    CHECK(mix.phi.integral() == doctest::Approx(1.0).epsilon(1e-12));
    for (double r : {1.5, 3.0}) {
      const double c = c1q(t, r, 1e-8).upper;
      CHECK(op_norm(mix.t1, r).value <= std::pow(2.0, 1.0 / conjugate(r)) * c * (1.0 + 1e-6));
      CHECK(c1q(mix.t1, r, 1e-8).upper == doctest::Approx(c).epsilon(1e-5));
    }
  }
}

TEST_CASE("pi_t through the adjoint density") {
  const LinOp id(NormedSpace::sign_cube(2), NormedSpace::euclidean(2), Matrix::Identity(2, 2));
  CHECK(pi_dual(id, 1.0).value == doctest::Approx(2.0).epsilon(1e-5));
  const PiResult two = pi_dual(id, 2.0, 1e-8);
  CHECK(two.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
  CHECK(two.lower <= two.upper);
  const LinOp zero(NormedSpace::sign_cube(2), NormedSpace::euclidean(2), Matrix::Zero(2, 2));
  CHECK(pi_dual(zero, 2.0).value == 0.0);

  // pi_1 from l_inf^N into l_1^k equals sum_i ||U e_i||_1.
  Rng rng(5);
  const Matrix u = rng.normal_matrix(3, 4);
  const LinOp into_l1(NormedSpace::sign_cube(4), NormedSpace::cross_polytope(3), u);
  CHECK(pi_dual(into_l1, 1.0).value == doctest::Approx(u.cwiseAbs().sum()).epsilon(1e-9));
  CHECK_THROWS_AS(pi_dual(LinOp(NormedSpace::sign_cube(3), NormedSpace::euclidean(3), Matrix::Identity(3, 3)), 2.0),
                  CapacityError);
}

TEST_CASE("pi_t lower bound for the l2 identity") {
  CHECK(pi_t_l2_lower(4, 1) == doctest::Approx(2.0));
  CHECK(pi_t_l2_lower(9, 4) == doctest::Approx(1.5));
  CHECK_THROWS_AS(pi_t_l2_lower(0, 2), DomainError);
}

}
