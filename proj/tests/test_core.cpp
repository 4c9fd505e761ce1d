#include <cmath>

#include "densfact/convex_ops.hpp"
#include "densfact/errors.hpp"
#include "densfact/linop.hpp"
#include "densfact/lp.hpp"
#include "densfact/measure.hpp"
#include "densfact/normed_space.hpp"
#include "densfact/rng.hpp"
#include "doctest.h"

using namespace densfact;

TEST_SUITE("core") {

TEST_CASE("conjugate exponents") {
  CHECK(conjugate(2.0) == doctest::Approx(2.0));
  CHECK(conjugate(kInfinity) == 1.0);
  CHECK(conjugate(4.0 / 3.0) == doctest::Approx(4.0));
  for (double t : {1.1, 1.5, 3.0, 7.25, 100.0}) {
    CHECK(conjugate(conjugate(t)) == doctest::Approx(t).epsilon(1e-12));
    CHECK(std::abs(1.0 / t + 1.0 / conjugate(t) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(conjugate(1.0), DomainError);
  CHECK_THROWS_AS(conjugate(0.5), DomainError);
}

TEST_CASE("measure spaces and atom sets") {
  CHECK_THROWS(MeasureSpace({0.5, 0.0}));
  CHECK(MeasureSpace({0.5, 0.5}).is_probability());
  CHECK_FALSE(MeasureSpace({1.0, 1.0}).is_probability());
  const AtomSet a{0, 2};
  const AtomSet b{1};
  CHECK(pairwise_disjoint({a, b}));
  CHECK_FALSE(pairwise_disjoint({a, b, AtomSet{2, 3}}));
  CHECK(a.unite(b).size() == 3);
  CHECK(a.complement(4) == AtomSet{1, 3});
  CHECK(a.measure(MeasureSpace({0.1, 0.2, 0.3, 0.4})) == doctest::Approx(0.4));
}

TEST_CASE("lp norms on two atoms") {
  const MeasureSpace mu{0.5, 0.5};
  CHECK(lp_norm(Fun(mu, Vector::Ones(2)), 1.0) == doctest::Approx(1.0));
  const Fun f(mu, Vector::Unit(2, 0) * 2.0);
  CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(lp_norm(f, kInfinity) == doctest::Approx(2.0));
  CHECK_THROWS_AS(lp_norm(f, 0.5), DomainError);
  Rng rng(3);
  const MeasureSpace p = MeasureSpace::uniform_probability(7);
  const Fun g(p, rng.normal_vector(7));
  double prev = 0.0;
  for (double r : {1.0, 1.5, 2.0, 4.0, 10.0, kInfinity}) {
    const double v = lp_norm(g, r);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("operator norms") {
  const MeasureSpace mu{0.5, 0.5};
  const Matrix two = 2.0 * Matrix::Identity(2, 2);
  const NormResult id = op_norm(LinOp::into_lp(NormedSpace::cross_polytope(2), mu, two));
  CHECK(id.value == doctest::Approx(1.0));
  CHECK(id.certified);
  CHECK(op_norm(LinOp::into_lp(NormedSpace::cross_polytope(2), mu, Matrix::Zero(2, 2))).value == 0.0);

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix t = rng.normal_matrix(3, 3);
    const MeasureSpace w = MeasureSpace::uniform_probability(3);
    const LinOp op = LinOp::into_lp(NormedSpace::cross_polytope(3), w, t, 2.0);
    double brute = 0.0;
    for (Index j = 0; j < 3; ++j) brute = std::max(brute, lp_norm(w.weights(), t.col(j), 2.0));
    CHECK(op_norm(op).value == doctest::Approx(brute).epsilon(1e-12));
    for (int s = 0; s < 200; ++s) {
      Vector x = rng.normal_vector(3);
      x /= x.cwiseAbs().sum();
      CHECK(lp_norm(w.weights(), t * x, 2.0) <= brute + 1e-9);
    }
  }
}

TEST_CASE("sign cube norm into L_1 by enumeration") {
  Rng rng(5);
  const Matrix t = rng.normal_matrix(4, 3);
  const MeasureSpace mu = MeasureSpace::uniform_probability(4);
  double brute = 0.0;
  for (int s = 0; s < 8; ++s) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x(i) = (s >> i) & 1 ? -1.0 : 1.0;
    brute = std::max(brute, lp_norm(mu.weights(), t * x, 1.0));
  }
  CHECK(op_norm(LinOp::into_lp(NormedSpace::sign_cube(3), mu, t)).value == doctest::Approx(brute));
  CHECK_THROWS_AS(NormedSpace::sign_cube(25).vertex_pairs(), CapacityError);
}

TEST_CASE("duals and norming functionals") {
  const NormedSpace l1 = NormedSpace::cross_polytope(3);
  const NormedSpace dual = l1.dual();
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    const Vector x = rng.normal_vector(3);
    CHECK(dual.norm(x) == doctest::Approx(x.cwiseAbs().maxCoeff()));
    const Vector f = l1.norming_functional(x);
    CHECK(l1.dual_norm(f) == doctest::Approx(1.0));
    CHECK(f.dot(x) == doctest::Approx(l1.norm(x)));
  }
  const Matrix hexagon = (Matrix(2, 3) << 1, 0, 1, 0, 1, 1).finished();
  const NormedSpace h = NormedSpace::vertex_pairs(hexagon);
  const NormedSpace hd = h.dual();
  for (int i = 0; i < 10; ++i) {
    const Vector f = rng.normal_vector(2);
    const double brute = (hexagon.transpose() * f).cwiseAbs().maxCoeff();
    CHECK(hd.norm(f) == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("linear programs against vertex enumeration") {
  // max x + 2y on x + y <= 4, x + 3y <= 6, x, y >= 0: vertices (0,0), (4,0), (0,2), (3,1).
  LinearProgram lp(2);
  lp.objective = Vector::Zero(2);
  lp.objective << -1.0, -2.0;
  lp.add_inequality((Vector(2) << 1, 1).finished(), 4.0);
  lp.add_inequality((Vector(2) << 1, 3).finished(), 6.0);
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.optimal());
  CHECK(s.certified());
  CHECK(s.value == doctest::Approx(-5.0));
  CHECK(s.x(0) == doctest::Approx(3.0));
  CHECK(s.x(1) == doctest::Approx(1.0));
  CHECK(std::abs(s.value - s.dual_value) <= 1e-8);

  LinearProgram bad(1);
  bad.objective = Vector::Ones(1);
  bad.add_inequality(Vector::Ones(1), -1.0);
  CHECK(solve_lp(bad).status == LpStatus::kInfeasible);
  CHECK_THROWS_AS(solve_lp_checked(bad, "test"), InfeasibleError);
}

TEST_CASE("norm-preserving extension from a subspace of l_inf") {
  const Extension e = extend_functional(Matrix::Ones(2, 1), Vector::Ones(1));
  CHECK(e.norm == doctest::Approx(1.0));
  CHECK(e.psi.sum() == doctest::Approx(1.0));
  CHECK(e.restriction_residual <= 1e-9);

  const Extension zero = extend_functional(Matrix::Ones(3, 1), Vector::Zero(1));
  CHECK(zero.norm == doctest::Approx(0.0));

  const Extension axis = extend_functional(Matrix(Vector::Unit(3, 0)), Vector::Ones(1));
  CHECK(axis.norm == doctest::Approx(1.0));
  CHECK(axis.psi(0) == doctest::Approx(1.0));

  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    const Matrix basis = rng.normal_matrix(4, 2);
    const Vector values = rng.normal_vector(2);
    const Extension x = extend_functional(basis, values);
    // ||phi||_{F*} = max over the vertices of Ball(F) = polar of the rows of the basis.
    const Matrix poly = polar_vertex_pairs(basis.transpose());
    const double phi_norm = (poly.transpose() * values).cwiseAbs().maxCoeff();
    CHECK(x.norm <= phi_norm * (1 + 1e-8) + 1e-12);
    CHECK(x.norm >= phi_norm * (1 - 1e-8) - 1e-12);
    CHECK(x.restriction_residual <= 1e-9);
  }
}

TEST_CASE("minimal preimages and quotient norms") {
  const MinNormResult id = min_norm_preimage(
      LinOp::into_lp(NormedSpace::cross_polytope(2), MeasureSpace::counting(2), Matrix::Identity(2, 2)),
      (Vector(2) << 0.3, -0.7).finished());
  CHECK(id.x(0) == doctest::Approx(0.3));
  CHECK(id.x(1) == doctest::Approx(-0.7));
  const MinNormResult sum = weighted_l1_min_norm(Matrix::Ones(1, 2), Vector::Ones(2), Vector::Ones(1));
  CHECK(sum.norm == doctest::Approx(1.0));
  CHECK(weighted_l1_min_norm(Matrix::Ones(1, 2), Vector::Ones(2), Vector::Zero(1)).norm == doctest::Approx(0.0));
  CHECK_THROWS_AS(weighted_l1_min_norm(Matrix::Zero(1, 2), Vector::Ones(2), Vector::Ones(1)), InfeasibleError);

  const MeasureSpace half{0.5, 0.5};
  const Vector x = Vector::Ones(2);
  CHECK(quotient_norm(half, Matrix::Zero(2, 0), x) == doctest::Approx(1.0));
  CHECK(quotient_norm(half, Matrix::Identity(2, 2), x) == doctest::Approx(0.0));
  CHECK(quotient_norm(half, (Matrix(2, 1) << 1, -1).finished(), x) == doctest::Approx(1.0));
  // Grid oracle for min_t 1/2 |1 - 2t| + 1/2 |3 + t|.
  const Vector y = (Vector(2) << 1.0, 3.0).finished();
  double grid = kInfinity;
  for (int i = -40000; i <= 40000; ++i) {
    const double t = i * 1e-4;
    grid = std::min(grid, 0.5 * std::abs(1 - 2 * t) + 0.5 * std::abs(3 + t));
  }
  CHECK(quotient_norm(half, (Matrix(2, 1) << 2, -1).finished(), y) == doctest::Approx(grid).epsilon(1e-6));
}

TEST_CASE("seeded generator streams") {
  Rng a(42);
  Rng b(42);
  CHECK(a.normal() == b.normal());
  CHECK(Rng(42).split(3).normal() == Rng(42).split(3).normal());
  CHECK(Rng(42).split(3).normal() != Rng(42).split(4).normal());
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
}

}  // TEST_SUITE
