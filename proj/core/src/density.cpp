#include "densfact/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace densfact {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxNewtonSteps = 5000;

double log_sum_exp(const Vector& z) {
  const double m = z.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((z.array() - m).exp().sum());
}

// The atoms on which some vertex image is nonzero, and the vertex images.
struct Reduced {
  Matrix images;                 // atoms x J (all atoms)
  std::vector<Index> kept;       // atoms with a positive envelope
  Vector mu;                     // weights of kept atoms
  Matrix logabs;                 // J x kept: log |Y_ja|, -inf where zero
};

Reduced reduce(const LinOp& t) {
  Reduced r;
  r.images = vertex_images(t);
  const Vector& w = t.measure().weights();
  for (Index a = 0; a < r.images.rows(); ++a)
    if (r.images.row(a).cwiseAbs().maxCoeff() > 0.0) r.kept.push_back(a);
  const Index k = static_cast<Index>(r.kept.size());
  r.mu.resize(k);
  r.logabs.resize(r.images.cols(), k);
  for (Index i = 0; i < k; ++i) {
    const Index a = r.kept[static_cast<std::size_t>(i)];
    r.mu(i) = w(a);
    for (Index j = 0; j < r.images.cols(); ++j) {
      const double v = std::abs(r.images(a, j));
      r.logabs(j, i) = v > 0.0 ? std::log(v) : kNegInf;
    }
  }
  return r;
}

// Barrier objective for  min t  s.t.  f_j(y) <= t,  log sum mu e^y <= 0, where
// f_j(y) = log sum_a mu_a |Y_ja|^q e^{(1-q) y_a}.
class Barrier {
 public:
  Barrier(const Reduced& r, double q) : r_(r), q_(q), logmu_(r.mu.array().log()) {
    base_ = r.logabs * q;
    base_.rowwise() += logmu_.transpose();
  }

  Index atoms() const { return r_.mu.size(); }
  Index pairs() const { return r_.logabs.rows(); }

  Vector f(const Vector& y) const {
    Vector out(pairs());
    for (Index j = 0; j < pairs(); ++j) {
      Vector z = base_.row(j).transpose() + (1.0 - q_) * y;
      out(j) = log_sum_exp(z);
    }
    return out;
  }
  double g(const Vector& y) const { return log_sum_exp(logmu_ + y); }

  double value(const Vector& y, double t, double tau) const {
    const double gy = g(y);
    if (!(gy < 0.0)) return std::numeric_limits<double>::infinity();
    const Vector fy = f(y);
    double v = tau * t - std::log(-gy);
    for (Index j = 0; j < pairs(); ++j) {
      const double s = t - fy(j);
      if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(s);
    }
    return v;
  }

  // Newton direction (dy, dt); returns the squared Newton decrement.
  double newton(const Vector& y, double t, double tau, Vector& dy, double& dt) const {
    const Index n = atoms();
    const Index m = pairs();
    Matrix p(m, n);
    Vector s(m);
    for (Index j = 0; j < m; ++j) {
      Vector z = base_.row(j).transpose() + (1.0 - q_) * y;
      const double lse = log_sum_exp(z);
      p.row(j) = (z.array() - lse).exp().transpose();
      s(j) = t - lse;
    }
    const double gy = g(y);
    const double u = -gy;
    const Vector rr = (logmu_ + y).array().unaryExpr([gy](double v) { return std::exp(v - gy); });
    const double c = 1.0 - q_;
    const Vector inv_s = s.cwiseInverse();
    const Vector inv_s2 = inv_s.cwiseAbs2();

    Matrix h = Matrix::Zero(n + 1, n + 1);
    Vector grad(n + 1);
    grad.head(n) = c * (p.transpose() * inv_s) + rr / u;
    grad(n) = tau - inv_s.sum();
    Matrix hyy = (c * c) * (p.transpose() * (inv_s2 - inv_s).asDiagonal() * p);
    hyy.diagonal() += (c * c) * (p.transpose() * inv_s);
    hyy.diagonal() += rr / u;
    hyy += rr * rr.transpose() * (1.0 / (u * u) - 1.0 / u);
    h.topLeftCorner(n, n) = hyy;
    const Vector hyt = -c * (p.transpose() * inv_s2);
    h.col(n).head(n) = hyt;
    h.row(n).head(n) = hyt.transpose();
    h(n, n) = inv_s2.sum();

    Vector d;
    Eigen::LDLT<Matrix> ldlt(h);
    if (ldlt.info() == Eigen::Success) d = -ldlt.solve(grad);
    if (d.size() == 0 || !d.allFinite() || grad.dot(d) >= 0.0) {
      const double ridge = 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
      h.diagonal().array() += ridge;
      d = -h.fullPivLu().solve(grad);
    }
    dy = d.head(n);
    dt = d(n);
    return -grad.dot(d);
  }

 private:
  const Reduced& r_;
  double q_;
  Vector logmu_;
  Matrix base_;
};

Vector lambda_from_slacks(const Barrier& b, const Vector& y, double t) {
  const Vector fy = b.f(y);
  Vector lam = (t - fy.array()).inverse().matrix();
  return lam / lam.sum();
}

// Normalized density w (sum mu w = 1 on kept atoms) to full-length h.
Vector density_from_y(const Reduced& r, const Vector& y, double q, Index atoms) {
  const double lse = log_sum_exp(r.mu.array().log().matrix() + y);
  Vector h = Vector::Constant(atoms, kDensityFloor);
  const double expo = (q - 1.0) / q;
  for (std::size_t i = 0; i < r.kept.size(); ++i) {
    const double logw = y(static_cast<Index>(i)) - lse;
    h(r.kept[i]) = std::max(std::exp(expo * logw), kDensityFloor);
  }
  return h;
}

}  // namespace

double density_upper(const LinOp& t, const Vector& h, double q) {
  const Vector& w = t.measure().weights();
  if (h.size() != w.size()) throw ShapeError("density_upper: density length mismatch");
  if (h.minCoeff() <= 0.0) throw DomainError("density_upper: density must be positive");
  const Matrix y = vertex_images(t);
  double best = 0.0;
  for (Index j = 0; j < y.cols(); ++j)
    best = std::max(best, lp_norm(w, y.col(j).cwiseQuotient(h), q));
  return lp_norm(w, h, conjugate(q)) * best;
}

double density_dual_value(const LinOp& t, const Vector& lambda, double q) {
  const Matrix y = vertex_images(t);
  if (lambda.size() != y.cols()) throw ShapeError("density_dual_value: one weight per vertex pair");
  const Vector& w = t.measure().weights();
  double total = 0.0;
  for (Index a = 0; a < y.rows(); ++a) {
    Vector z(y.cols());
    for (Index j = 0; j < y.cols(); ++j) {
      const double v = std::abs(y(a, j));
      z(j) = (lambda(j) > 0.0 && v > 0.0) ? std::log(lambda(j)) + q * std::log(v) : kNegInf;
    }
    const double lse = log_sum_exp(z);
    if (lse > kNegInf) total += w(a) * std::exp(lse / q);
  }
  return total;
}

DensityCertificate solve_c1q(const LinOp& t, double q, double tol) {
  if (!(q > 1.0) || std::isinf(q)) throw DomainError("c1q: exponent must lie in (1, inf)");
  if (!t.domain().vertex_enumerable()) throw CapacityError("c1q: domain ball is not vertex-enumerable");
  const MeasureSpace& space = t.measure();
  const Index atoms = static_cast<Index>(space.atom_count());
  const Reduced r = reduce(t);

  DensityCertificate cert{Fun(space, Vector::Ones(atoms))};
  cert.q = q;
  cert.s_exponent = conjugate(q);
  const Index pairs = r.images.cols();
  cert.lambda = Vector::Constant(pairs, pairs ? 1.0 / static_cast<double>(pairs) : 0.0);

  const double l1_norm = [&] {
    double best = 0.0;
    for (Index j = 0; j < pairs; ++j) best = std::max(best, lp_norm(space.weights(), r.images.col(j), 1.0));
    return best;
  }();

  if (r.kept.empty()) {
    const Vector h = Vector::Constant(atoms, std::pow(1.0 / space.total_mass(), 1.0 / cert.s_exponent));
    cert.h = Fun(space, h);
    cert.converged = true;
    return cert;
  }

  const Barrier bar(r, q);
  const Index n = bar.atoms();
  Vector y = Vector::Constant(n, std::log(0.5 / r.mu.sum()));
  double tt = bar.f(y).maxCoeff() + 1.0;
  double tau = 1.0;

  double best_upper = std::numeric_limits<double>::infinity();
  Vector best_h;
  double best_lower = l1_norm;
  Vector best_lambda = cert.lambda;
  int steps = 0;
  bool done = false;

  while (!done && steps < kMaxNewtonSteps) {
    for (int inner = 0; inner < 200 && steps < kMaxNewtonSteps; ++inner) {
      Vector dy;
      double dt = 0.0;
      const double dec2 = bar.newton(y, tt, tau, dy, dt);
      ++steps;
      if (!(dec2 > 1e-14)) break;
      const double phi0 = bar.value(y, tt, tau);
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vector y1 = y + alpha * dy;
        const double t1 = tt + alpha * dt;
        const double phi1 = bar.value(y1, t1, tau);
        if (std::isfinite(phi1) && phi1 <= phi0 - 0.25 * alpha * dec2) {
          y = y1;
          tt = t1;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }

    const Vector h = density_from_y(r, y, q, atoms);
    const double upper = density_upper(t, h, q);
    if (upper < best_upper) {
      best_upper = upper;
      best_h = h;
    }
    const Vector lam = lambda_from_slacks(bar, y, tt);
    const double lower = density_dual_value(t, lam, q);
    if (lower > best_lower) {
      best_lower = lower;
      best_lambda = lam;
    }
    if (best_upper - best_lower <= tol * best_upper) done = true;
    if (tau > 1e16) break;
    tau *= 8.0;
  }

  cert.h = Fun(space, best_h);
  cert.upper = density_upper(t, best_h, q);
  cert.lower = std::min(best_lower, cert.upper);
  cert.gap = cert.upper - cert.lower;
  cert.lambda = best_lambda;
  cert.newton_steps = steps;
  cert.converged = cert.gap <= tol * cert.upper;
  return cert;
}

DensityCertificate c1q(const LinOp& t, double q, double tol) {
  DensityCertificate cert = solve_c1q(t, q, tol);
  if (!cert.converged)
    throw DensityConvergenceError("c1q: relative gap " + std::to_string(cert.relative_gap()) +
                                      " above tolerance",
                                  cert);
  return cert;
}

double c1inf(const LinOp& t) {
  const Vector env = envelope(t);
  const double value = t.measure().weights().dot(env);
  if (t.domain().vertex_enumerable() && value > 0.0) {
    Eigen::FullPivLU<Matrix> lu(t.matrix());
    lu.setThreshold(1e-12);
    const double cap = static_cast<double>(lu.rank()) * op_norm(t, 1.0).value;
    if (value > cap * (1.0 + 1e-9))
      throw InternalAlarm("c1inf: envelope integral exceeds rank times norm");
  }
  return value;
}

double maurey_value(const LinOp& t, const Vector& phi, double r) {
  const Vector& w = t.measure().weights();
  if (phi.size() != w.size()) throw ShapeError("maurey_value: density length mismatch");
  const Matrix y = vertex_images(t);
  std::vector<Index> support;
  for (Index a = 0; a < phi.size(); ++a) {
    if (phi(a) > 0.0) {
      support.push_back(a);
    } else if (y.row(a).cwiseAbs().maxCoeff() > 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  const Index k = static_cast<Index>(support.size());
  Vector nu(k);
  for (Index i = 0; i < k; ++i) nu(i) = w(support[i]) * phi(support[i]);
  double best = 0.0;
  Vector vals(k);
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < k; ++i) vals(i) = y(support[i], j) / phi(support[i]);
    best = std::max(best, k ? lp_norm(nu, vals, r) : 0.0);
  }
  return best;
}

MaureyForm maurey_density(const LinOp& t, double r, double tol) {
  const MeasureSpace& space = t.measure();
  const Vector& w = space.weights();
  const Index atoms = w.size();
  if (std::isinf(r)) {
    const Vector env = envelope(t);
    const double total = w.dot(env);
    Vector phi = total > 0.0 ? Vector(env / total) : Vector(Vector::Constant(atoms, 1.0 / space.total_mass()));
    MaureyForm form{Fun(space, phi), r, 0.0, total};
    form.value = maurey_value(t, phi, r);
    return form;
  }
  const DensityCertificate cert = c1q(t, r, tol);
  const Vector env = envelope(t);
  Vector phi = Vector::Zero(atoms);
  const double s = cert.s_exponent;
  for (Index a = 0; a < atoms; ++a)
    if (env(a) > 0.0) phi(a) = std::pow(cert.h(static_cast<std::size_t>(a)), s);
  const double mass = w.dot(phi);
  if (mass > 0.0) {
    phi /= mass;
  } else {
    phi.setConstant(1.0 / space.total_mass());
  }
  MaureyForm form{Fun(space, phi), r, 0.0, cert.lower};
  form.value = maurey_value(t, phi, r);
  return form;
}

MixedOperator mix_and_renormalize(const LinOp& t, const MaureyForm& phi_p, const MaureyForm& phi_q) {
  const MeasureSpace& space = t.measure();
  if (!(phi_p.phi.space() == space) || !(phi_q.phi.space() == space))
    throw DomainError("mix_and_renormalize: densities live on a different measure space");
  const Vector phi = 0.5 * (phi_p.phi.values() + phi_q.phi.values());
  const Vector env = envelope(t);
  std::vector<std::size_t> kept;
  for (Index a = 0; a < phi.size(); ++a) {
    if (phi(a) > 0.0) {
      kept.push_back(static_cast<std::size_t>(a));
    } else if (env(a) > 0.0) {
      throw DomainError("mix_and_renormalize: density vanishes where T does not");
    }
  }
  if (kept.empty()) throw DomainError("mix_and_renormalize: density vanishes identically");
  const Index k = static_cast<Index>(kept.size());
  Vector nu(k);
  Matrix m(k, t.cols());
  for (Index i = 0; i < k; ++i) {
    const auto a = static_cast<Index>(kept[static_cast<std::size_t>(i)]);
    nu(i) = space.weight(kept[static_cast<std::size_t>(i)]) * phi(a);
  }
  const double mass = nu.sum();
  nu /= mass;
  for (Index i = 0; i < k; ++i) {
    const auto a = static_cast<Index>(kept[static_cast<std::size_t>(i)]);
    m.row(i) = t.matrix().row(a) * (mass / phi(a));
  }
  MixedOperator out{LinOp::into_lp(t.domain(), MeasureSpace(nu), m, 1.0), Fun(space, phi), kept};

  for (const MaureyForm* form : {&phi_p, &phi_q}) {
    const double factor = std::pow(2.0, 1.0 / conjugate(form->r));
    const double achieved = op_norm(out.t1, form->r).value;
    if (achieved > factor * form->value * (1.0 + 1e-9) + 1e-12)
      throw InternalAlarm("mix_and_renormalize: mixed density exceeds the 2^{1/r*} bound");
  }
  return out;
}

PiResult pi_dual(const LinOp& u, double t, double tol) {
  if (!(t >= 1.0)) throw DomainError("pi_dual: t must be >= 1");
  if (u.domain().kind() != BallKind::kSignCube)
    throw DomainError("pi_dual: domain must be l_inf^N");
  const auto* target = std::get_if<NormedSpace>(&u.codomain());
  if (!target) throw DomainError("pi_dual: codomain must be a normed space");
  const Index big_n = u.cols();
  const MeasureSpace counting = MeasureSpace::counting(static_cast<std::size_t>(big_n));
  PiResult out;
  if (u.matrix().cwiseAbs().maxCoeff() == 0.0) {
    out.certified = true;
    return out;
  }

  auto evaluate = [&](const NormedSpace& dual_ball) {
    const LinOp adj = LinOp::into_lp(dual_ball, counting, u.matrix().transpose(), 1.0);
    if (t == 1.0) {
      const double v = c1inf(adj);
      return std::pair{v, v};
    }
    const double q = conjugate(t);
    if (std::isinf(q)) {
      const double v = c1inf(adj);
      return std::pair{v, v};
    }
    const DensityCertificate cert = solve_c1q(adj, q, tol);
    return std::pair{cert.lower, cert.upper};
  };

  if (target->kind() == BallKind::kEuclidean) {
    if (target->dim() > 2) throw CapacityError("pi_dual: Euclidean codomain supported up to dimension 2");
    if (target->dim() == 1) {
      const auto [lo, hi] = evaluate(NormedSpace::cross_polytope(1));
      out = {hi, lo, hi, hi - lo <= tol * hi};
      return out;
    }
    constexpr int kPolygon = 2048;
    Matrix v(2, kPolygon);
    for (int i = 0; i < kPolygon; ++i) {
      const double a = std::numbers::pi * i / kPolygon;
      v(0, i) = std::cos(a);
      v(1, i) = std::sin(a);
    }
    // Inscribed polygon B_K with B_K in the disc in B_K / cos(pi / 2K).
    const auto [lo, hi] = evaluate(NormedSpace::vertex_pairs(v));
    const double widen = 1.0 / std::cos(std::numbers::pi / (2.0 * kPolygon));
    out.lower = lo;
    out.upper = hi * widen;
    out.value = out.upper;
    out.certified = out.upper - out.lower <= std::max(tol, 1e-6) * out.upper;
    return out;
  }
  const auto [lo, hi] = evaluate(target->dual());
  out = {hi, lo, hi, hi - lo <= tol * hi};
  return out;
}

double pi_t_l2_lower(double n, double t) {
  if (!(n >= 1.0) || !(t >= 1.0)) throw DomainError("pi_t_l2_lower: need n >= 1 and t >= 1");
  return std::sqrt(n / t);
}

}  // namespace densfact
