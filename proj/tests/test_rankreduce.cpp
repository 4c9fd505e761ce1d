#include <cmath>

#include "densfact/density.hpp"
#include "densfact/errors.hpp"
#include "densfact/rankreduce.hpp"
#include "densfact/rng.hpp"
#include "doctest.h"

using namespace densfact;

namespace {

double l1_operator_norm(const Matrix& p, const MeasureSpace& mu) {
  // ||P : L_1(mu) -> L_1(mu)|| = max_a ||P e_a / mu_a||_{L_1}.
  double best = 0.0;
  for (Index a = 0; a < p.cols(); ++a)
    best = std::max(best, lp_norm(mu.weights(), p.col(a), 1.0) / mu.weights()(a));
  return best;
}

double max_row_sum(const Matrix& q) { return q.cwiseAbs().rowwise().sum().maxCoeff(); }

// C_{1,p} of a 2-atom, 2-column operator on weights (1/2, 1/2) by a grid over h = (h0, 1).
double two_atom_c1p(const Matrix& u, double p) {
  const double s = conjugate(p);
  double best = kInfinity;
  for (int i = 1; i <= 600; ++i) {
    const double h0 = i / 100.0;
    const double hs = std::pow(0.5 * std::pow(h0, s) + 0.5, 1.0 / s);
    double worst = 0.0;
    for (Index j = 0; j < 2; ++j) {
      const double v = 0.5 * std::pow(std::abs(u(0, j)) / h0, p) + 0.5 * std::pow(std::abs(u(1, j)), p);
      worst = std::max(worst, std::pow(v, 1.0 / p));
    }
    best = std::min(best, hs * worst);
  }
  return best;
}

}  // namespace

TEST_SUITE("rankreduce") {

TEST_CASE("epsilon nets") {
  const NetCover line = epsilon_net(NormedSpace::euclidean(1), 0.5);
  CHECK(line.pairs() == 1);
  CHECK(std::abs(line.points(0, 0)) == doctest::Approx(1.0));

  const NormedSpace disc = NormedSpace::euclidean(2);
  const NetCover net = epsilon_net(disc, 0.5);
  CHECK(net.size() <= 12);
  CHECK(static_cast<double>(net.size()) < net_volume_bound(2, 0.5));
  Rng rng(99);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vector x = rng.normal_matrix(2, 1).col(0);
    x /= disc.norm(x);
    worst = std::max(worst, distance_to_net(disc, net, x));
  }
  CHECK(worst <= 0.5);

  for (const NormedSpace& sp : {NormedSpace::cross_polytope(3), NormedSpace::sign_cube(3)}) {
    const NetCover n3 = epsilon_net(sp, 0.5);
    CHECK(static_cast<double>(n3.size()) < net_volume_bound(3, 0.5));
    double far = 0.0;
    for (int i = 0; i < 2000; ++i) {
      Vector x = rng.normal_matrix(3, 1).col(0);
      x /= sp.norm(x);
      far = std::max(far, distance_to_net(sp, n3, x));
    }
    CHECK(far <= 0.5);
  }
  CHECK(net_volume_bound(2, 0.5) == doctest::Approx(25.0));
}

TEST_CASE("l1 rank reduction") {
  const MeasureSpace mu = MeasureSpace::uniform_probability(4);
  Rng rng(4);
  const Matrix row = rng.normal_matrix(1, 4);
  const Matrix rank1 = Vector::LinSpaced(3, 1.0, 2.0) * row;
  const ProjectionWitness r1 = l1_rank_reduction(rank1, mu, 0.5);
  CHECK(r1.rank <= 2);
  CHECK((rank1 * r1.P - rank1).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(l1_operator_norm(r1.P, mu) == doctest::Approx(r1.beta_achieved).epsilon(1e-9));
  CHECK(r1.beta_achieved <= 2.0 + 1e-7);

  const Matrix inj = rng.normal_matrix(3, 3);
  const ProjectionWitness full = l1_rank_reduction(inj, MeasureSpace::uniform_probability(3), 0.5);
  CHECK(full.residual <= 1e-8);
  CHECK((inj * full.P - inj).cwiseAbs().maxCoeff() <= 1e-8);

  const ProjectionWitness zero = l1_rank_reduction(Matrix::Zero(2, 4), mu, 0.5);
  CHECK(zero.rank == 0);
  CHECK(zero.P.cwiseAbs().maxCoeff() == 0.0);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng r(seed);
    const Matrix u = r.normal_matrix(2, 6);
    const MeasureSpace m6 = MeasureSpace::uniform_probability(6);
    const ProjectionWitness w = l1_rank_reduction(u, m6, 0.5);
    CHECK((u * w.P - u).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(w.beta_achieved <= w.beta_cap + 1e-7);
    CHECK(static_cast<double>(w.rank) <= w.rank_cap);
    CHECK(l1_operator_norm(w.P, m6) == doctest::Approx(w.beta_achieved).epsilon(1e-9));
  }
}

TEST_CASE("C(K) rank projections") {
  const Matrix axis = Vector::Unit(4, 1);
  const ProjectionWitness a = ck_rank_projection(axis, 0.5);
  CHECK(max_row_sum(a.P) == doctest::Approx(1.0));
  CHECK((a.P * axis - axis).cwiseAbs().maxCoeff() <= 1e-12);

  const Matrix ones = Vector::Ones(4);
  const ProjectionWitness o = ck_rank_projection(ones, 0.5);
  CHECK((o.P * ones - ones).cwiseAbs().maxCoeff() <= 1e-9);

  Rng rng(8);
  for (int rep = 0; rep < 4; ++rep) {
    const Matrix f = rng.normal_matrix(4, 2);
    const ProjectionWitness w = ck_rank_projection(f, 0.5);
    CHECK(w.rank <= 12);
    CHECK(max_row_sum(w.P) == doctest::Approx(w.beta_achieved).epsilon(1e-9));
    CHECK(w.beta_achieved <= 2.0 + 1e-7);
    CHECK((w.P * f - f).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("minimal extensions") {
  const MeasureSpace halves({0.5, 0.5});
  Matrix m(2, 2);
  m << 2.0, 1.0, 0.5, 1.0;
  const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(2), halves, m);

  const MinExtension all = min_extension_c1p(t, Matrix::Identity(2, 2), 2.0);
  CHECK(all.value == doctest::Approx(c1q(t, 2.0).upper).epsilon(1e-5));
  CHECK((all.u_opt - m).cwiseAbs().maxCoeff() <= 1e-9);

  const MinExtension none = min_extension_c1p(t, Matrix::Zero(2, 0), 2.0);
  CHECK(none.value == doctest::Approx(0.0));

  const MinExtension half = min_extension_c1p(t, Vector::Unit(2, 0), 2.0, 1e-7);
  CHECK(half.lower <= half.value + 1e-9);
  CHECK(half.value <= c1q(t, 2.0).upper * (1 + 1e-6));
  CHECK((half.u_opt.col(0) - m.col(0)).cwiseAbs().maxCoeff() <= 1e-9);
  double grid = kInfinity;
  Matrix cand = m;
  for (int i = -40; i <= 40; ++i)
    for (int j = -40; j <= 40; ++j) {
      cand(0, 1) = i / 20.0;
      cand(1, 1) = j / 20.0;
      grid = std::min(grid, two_atom_c1p(cand, 2.0));
    }
  CHECK(half.lower <= grid * (1 + 1e-6));
  CHECK(half.value == doctest::Approx(grid).epsilon(1e-2));
}

TEST_CASE("projection keeping the extension value") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(seed);
    const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(3), MeasureSpace::uniform_probability(6),
                                   rng.normal_matrix(6, 3));
    const Prop13Result r = prop13_projection(t, Matrix::Identity(3, 3), 2.0, 0.5);
    CHECK(r.c1p_pt >= r.extension.value * (1.0 - 1e-3));
    CHECK(r.projection.beta_achieved <= r.projection.beta_cap + 1e-7);
    CHECK(r.projection.residual <= 1e-8);
  }
  Matrix rank1 = Vector::LinSpaced(4, 1.0, 4.0) * Vector::Ones(2).transpose();
  const LinOp r1 = LinOp::into_lp(NormedSpace::cross_polytope(2), MeasureSpace::uniform_probability(4), rank1);
  const Prop13Result small = prop13_projection(r1, Matrix::Identity(2, 2), 2.0, 0.5);
  CHECK(small.projection.rank <= 2);
  const Prop13Result zero = prop13_projection(r1, Matrix::Zero(2, 0), 2.0, 0.5);
  CHECK(zero.extension.value == doctest::Approx(0.0));
}

TEST_CASE("theorem 11 pipeline") {
  const Index d = 3;
  const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(d), MeasureSpace::uniform_probability(d),
                                 static_cast<double>(d) * Matrix::Identity(d, d));
  const Theorem11Result r = theorem11_pipeline(t, Matrix::Identity(d, d), 2.0, 0.5);
  CHECK(r.witness.residual <= 1e-8);
  CHECK(r.report.gamma_met());
  CHECK(r.report.achieved_k >= 1);
  const Matrix bta = r.witness.B * t.matrix() * r.witness.A;
  CHECK((bta - Matrix::Identity(bta.rows(), bta.cols())).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(r.c1inf_pt <= r.net_cap * (1 + 1e-9));

  Matrix one(2, 1);
  one << 1.0, 2.0;
  const LinOp line = LinOp::into_lp(NormedSpace::cross_polytope(1), MeasureSpace::uniform_probability(2), one);
  const Theorem11Result n1 = theorem11_pipeline(line, Matrix::Identity(1, 1), 2.0, 0.5);
  CHECK(n1.report.achieved_k >= 1);
  CHECK(n1.witness.residual <= 1e-8);
}

TEST_CASE("theorem 16 pipeline") {
  const Index d = 4;
  const LinOp id(NormedSpace::sign_cube(d), NormedSpace::sign_cube(d), Matrix::Identity(d, d));
  const Theorem16Result r = theorem16_pipeline(id, Matrix::Identity(d, 2), 2.0, 0.5);
  CHECK(r.residual <= 1e-8);
  CHECK(r.report.gamma_met());
  CHECK((r.B * id.matrix() * r.A - Matrix::Identity(r.A.cols(), r.A.cols())).cwiseAbs().maxCoeff() <= 1e-8);

  Rng rng(2);
  const Matrix e = rng.normal_matrix(8, 2);
  const LinOp u(NormedSpace::sign_cube(8), NormedSpace::sign_cube(8), Matrix::Identity(8, 8));
  const Theorem16Result g = theorem16_pipeline(u, e, 2.0, 0.5, std::sqrt(2.0 / 2.0) / 8.0);
  CHECK(g.residual <= 1e-8);
  CHECK(g.projection.residual <= 1e-8);
  CHECK(g.report.achieved_k >= 1);
}

}
