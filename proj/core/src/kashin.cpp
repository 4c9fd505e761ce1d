#include "densfact/kashin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "densfact/density.hpp"
#include "densfact/errors.hpp"
#include "densfact/rng.hpp"

namespace densfact {

namespace {

double ratio_of(const Matrix& w, const Vector& c) {
  const Vector f = w * c;
  const double l1 = f.cwiseAbs().sum();
  if (l1 <= 0.0) return 0.0;
  return std::sqrt(static_cast<double>(w.rows())) * f.norm() / l1;
}

// Direction on which the rows listed in `zero` vanish.
Vector vertex_direction(const Matrix& w, const std::vector<Index>& zero) {
  const Index m = w.cols();
  if (zero.empty()) return Vector::Ones(m);
  Matrix cols(m, static_cast<Index>(zero.size()));
  for (std::size_t i = 0; i < zero.size(); ++i) cols.col(static_cast<Index>(i)) = w.row(zero[i]).transpose();
  const Eigen::HouseholderQR<Matrix> qr(cols);
  Vector last = Vector::Zero(m);
  last(m - 1) = 1.0;
  return qr.householderQ() * last;
}

}  // namespace

double l2_l1_ratio(const Matrix& w, int restarts, std::uint64_t seed, Vector* argmax) {
  const Index N = w.rows();
  const Index m = w.cols();
  if (m == 0 || N < m) throw ShapeError("l2_l1_ratio: need a nonempty basis with rows >= cols");
  if (restarts < 1) throw DomainError("l2_l1_ratio: need at least one restart");
  const Rng base(seed);
  double best = 0.0;
  Vector best_c = Vector::Zero(m);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = base.split(static_cast<std::uint64_t>(r));
    Vector c = rng.normal_vector(m).normalized();
    // Projected subgradient on the sphere toward small ||W c||_1.
    for (int it = 0; it < 30; ++it) {
      const Vector s = (w * c).unaryExpr([](double x) { return sgn(x); });
      Vector g = w.transpose() * s;
      g -= g.dot(c) * c;
      c = (c - 0.3 / std::sqrt(static_cast<double>(N) * (it + 1)) * g).normalized();
    }
    // The maximum of the ratio sits at a vertex: m-1 coordinates of W c vanish.
    std::vector<Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector f = (w * c).cwiseAbs();
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return f(a) < f(b) || (f(a) == f(b) && a < b); });
    std::vector<Index> zero(order.begin(), order.begin() + (m - 1));
    std::vector<Index> rest(order.begin() + (m - 1), order.end());
    Vector cur = vertex_direction(w, zero);
    double val = ratio_of(w, cur);
    bool improved = true;
    for (int pass = 0; pass < 200 && improved; ++pass) {
      improved = false;
      for (std::size_t i = 0; i < zero.size() && !improved; ++i) {
        for (std::size_t j = 0; j < rest.size() && !improved; ++j) {
          std::swap(zero[i], rest[j]);
          const Vector cand = vertex_direction(w, zero);
          const double cv = ratio_of(w, cand);
          if (cv > val * (1.0 + 1e-12)) {
            cur = cand;
            val = cv;
            improved = true;
          } else {
            std::swap(zero[i], rest[j]);
          }
        }
      }
    }
    if (val > best) {
      best = val;
      best_c = cur;
    }
  }
  if (argmax) *argmax = best_c;
  return best;
}

KashinPair random_kashin_pair(int n, std::uint64_t seed, int restarts) {
  if (n < 1 || n > 8) throw CapacityError("random_kashin_pair: n must lie in [1, 8]");
  KashinPair p;
  p.n = n;
  p.seed = seed;
  p.restarts = restarts;
  const Index N = 3 * n;
  Rng rng(seed);
  const Matrix g = rng.normal_matrix(N, N);
  Eigen::HouseholderQR<Matrix> qr(g);
  p.U = qr.householderQ() * Matrix::Identity(N, N);
  const Matrix& r = qr.matrixQR();
  for (Index i = 0; i < N; ++i)
    if (r(i, i) < 0.0) p.U.col(i) *= -1.0;
  if ((p.U.transpose() * p.U - Matrix::Identity(N, N)).cwiseAbs().maxCoeff() > 1e-10)
    throw InternalAlarm("random_kashin_pair: U is not orthogonal");
  p.E1 = p.U.leftCols(2 * n);
  p.E2 = p.U.rightCols(2 * n);
  p.b_e1 = l2_l1_ratio(p.E1, restarts, mix_seed(seed, 1), &p.extremal_e1);
  p.b_e2 = l2_l1_ratio(p.E2, restarts, mix_seed(seed, 2));
  p.b_hat = std::max({1.0, p.b_e1, p.b_e2});
  return p;
}

KashinOperator build_kashin_operator(const KashinPair& pair, int samples, std::uint64_t sample_seed) {
  const Index n = pair.n;
  const Index N = 3 * n;
  const MeasureSpace mu = MeasureSpace::uniform_probability(static_cast<std::size_t>(N));
  NormedSpace f = NormedSpace::quotient(mu, pair.U.rightCols(2 * n));
  Matrix umat = Matrix::Zero(2 * n, n);
  umat.topRows(n) = std::sqrt(static_cast<double>(N)) * Matrix::Identity(n, n);
  LinOp u(NormedSpace::euclidean(n), f, umat);
  LinOp v = u.scaled(pair.b_hat);
  KashinOperator op{pair, f, u, v};
  op.b_hat = pair.b_hat;

  const Matrix mid = pair.U.middleCols(n, n);
  op.norm_projection = Eigen::JacobiSVD<Matrix>(mid * mid.transpose()).singularValues()(0);
  op.pi1_inf1 = mu.total_mass();
  op.norm_i12 = pair.b_e2;
  op.B_hat = op.b_hat * op.norm_projection * op.pi1_inf1 * op.norm_i12;

  Rng rng(sample_seed);
  std::vector<Vector> dirs;
  if (pair.extremal_e1.size() == 2 * n && pair.extremal_e1.segment(n, n).norm() > 1e-12)
    dirs.push_back(pair.extremal_e1.segment(n, n));
  for (int s = 0; s < samples; ++s) dirs.push_back(rng.normal_vector(n));
  op.min_ratio = kInfinity;
  for (const Vector& e : dirs) {
    const Vector en = e.normalized();
    op.min_ratio = std::min(op.min_ratio, f.norm(v.apply(en)));
  }
  op.checked = static_cast<int>(dirs.size());
  op.verified = op.min_ratio >= 1.0 - 1e-7;
  if (!(u.matrix().cwiseAbs().maxCoeff() > 0.0)) throw InternalAlarm("build_kashin_operator: u = 0");
  return op;
}

KashinOperator kashin_operator(int n, std::uint64_t seed, int restarts, int max_draws) {
  for (int attempt = 0; attempt < max_draws; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : mix_seed(seed, 100 + static_cast<std::uint64_t>(attempt));
    KashinOperator op = build_kashin_operator(random_kashin_pair(n, s, restarts));
    op.draws = attempt + 1;
    if (op.verified) return op;
  }
  throw ConvergenceError("kashin_operator: no verified pair within the redraw budget");
}

Lemma23Report lemma23_driver(double n, double B_hat, double gl_j) {
  if (!(n >= 1.0 && B_hat > 0.0 && gl_j >= 1.0)) throw DomainError("lemma23_driver: need n >= 1, B > 0, gl >= 1");
  Lemma23Report out;
  ConstantLedger& l = out.ledger;
  l.name = "lemma23";
  l.inputs = {{"n", n}, {"B_hat", B_hat}, {"gl_j", gl_j}};
  const double threshold = 32.0 * B_hat * gl_j;
  const double t = n / (threshold * threshold);
  l.values["t"] = t;
  l.values["threshold"] = threshold;
  if (t > 1.0) {
    const double c = pi_t_l2_lower(n, t);
    l.values["c"] = c;
    out.feasible = c >= threshold * (1.0 - 1e-12);
  }
  l.flags["hypothesis_met"] = out.feasible;
  BoundReport& r = out.report;
  r.guaranteed_gamma = 2.0;
  if (out.feasible) {
    const Cor19Growth g = cor19_growth(n, t, l.values["c"]);
    l.values["alpha"] = g.alpha;
    l.values["c1"] = g.c1;
    l.values["log_M"] = g.log_M;
    l.values["j_feasible"] = g.j_feasible;
    l.flags["no_guarantee"] = g.no_guarantee;
    r.guaranteed_k = g.j_feasible;
  }
  r.k_vacuous = r.guaranteed_k <= 1.0;
  r.inputs = l.values;
  return out;
}

Lemma23Report lemma23_driver(const KashinOperator& op, double gl_j) {
  Lemma23Report out = lemma23_driver(static_cast<double>(op.pair.n), op.B_hat, gl_j);
  out.ledger.inputs["b_hat"] = op.b_hat;
  return out;
}

}  // namespace densfact
