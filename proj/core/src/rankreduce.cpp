#include "densfact/rankreduce.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "densfact/bounds.hpp"
#include "densfact/convex_ops.hpp"
#include "densfact/density.hpp"
#include "densfact/errors.hpp"
#include "densfact/rng.hpp"

namespace densfact {

namespace {

constexpr double kMaxNetBound = 3125.0;  // (2/eps + 1)^n at eps = 1/2, n = 5

// Column-wise norms of a NormedSpace, vectorized over many points.
class NormEval {
 public:
  explicit NormEval(const NormedSpace& s) : kind_(s.kind()) {
    switch (kind_) {
      case BallKind::kVertexList:
      case BallKind::kQuotient: facets_ = s.dual().vertex_pairs(); break;
      case BallKind::kInducedL1:
        facets_ = s.generators();
        weights_ = s.ambient()->weights();
        break;
      default: break;
    }
  }

  Eigen::RowVectorXd operator()(const Matrix& x) const {
    switch (kind_) {
      case BallKind::kSignCube: return x.cwiseAbs().colwise().maxCoeff();
      case BallKind::kCrossPolytope: return x.cwiseAbs().colwise().sum();
      case BallKind::kEuclidean: return x.colwise().norm();
      case BallKind::kInducedL1: return weights_.transpose() * (facets_ * x).cwiseAbs();
      default: return (facets_.transpose() * x).cwiseAbs().colwise().maxCoeff();
    }
  }

 private:
  BallKind kind_;
  Matrix facets_;
  Vector weights_;
};

Eigen::RowVectorXd pm_distance(const NormEval& ev, const Matrix& cand, const Vector& x) {
  const Eigen::RowVectorXd a = ev(cand.colwise() - x);
  const Eigen::RowVectorXd b = ev(cand.colwise() + x);
  return a.cwiseMin(b);
}

Matrix sphere_candidates(const NormedSpace& space, const NormEval& ev, std::uint64_t seed) {
  const Index n = space.dim();
  Matrix verts(n, 0);
  if (space.vertex_enumerable()) verts = space.vertex_pairs();
  Index random = 4000;
  for (Index i = 1; i < n; ++i) random *= 3;
  random = std::min<Index>(random, 60000);
  Rng rng(seed);
  Matrix cand(n, verts.cols() + random);
  cand.leftCols(verts.cols()) = verts;
  cand.rightCols(random) = rng.normal_matrix(n, random);
  const Eigen::RowVectorXd norms = ev(cand);
  Index kept = 0;
  for (Index j = 0; j < cand.cols(); ++j) {
    if (norms(j) <= 1e-12) continue;
    cand.col(kept++) = cand.col(j) / norms(j);
  }
  cand.conservativeResize(n, kept);
  return cand;
}

NetCover greedy_pack(const NormEval& ev, const Matrix& cand, double eps, double radius) {
  NetCover net;
  net.epsilon = eps;
  net.packing_radius = radius;
  std::vector<Index> chosen;
  Eigen::RowVectorXd mind =
      Eigen::RowVectorXd::Constant(cand.cols(), std::numeric_limits<double>::infinity());
  Index next = 0;
  while (true) {
    chosen.push_back(next);
    mind = mind.cwiseMin(pm_distance(ev, cand, cand.col(next)));
    const double far = mind.maxCoeff(&next);
    if (far <= radius) {
      net.covering_radius = far;
      break;
    }
  }
  net.points.resize(cand.rows(), static_cast<Index>(chosen.size()));
  for (std::size_t i = 0; i < chosen.size(); ++i) net.points.col(static_cast<Index>(i)) = cand.col(chosen[i]);
  return net;
}

double l1_operator_norm(const Matrix& p, const MeasureSpace& mu) {
  const Vector& w = mu.weights();
  double best = 0.0;
  for (Index a = 0; a < p.cols(); ++a) best = std::max(best, w.dot(p.col(a).cwiseAbs()) / w(a));
  return best;
}

Index numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 1e-14) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-10 * s(0)) ++r;
  return r;
}

}  // namespace

double net_volume_bound(Index n, double eps) {
  return std::pow(2.0 / eps + 1.0, static_cast<double>(n));
}

NetCover epsilon_net(const NormedSpace& space, double eps, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon_net: eps must lie in (0,1)");
  const Index n = space.dim();
  const double bound = net_volume_bound(n, eps);
  if (bound > kMaxNetBound * (1.0 + 1e-12))
    throw CapacityError("epsilon_net: (2/eps+1)^n exceeds the net size guard");
  const NormEval ev(space);
  const Matrix cand = sphere_candidates(space, ev, seed);
  // Pack slightly below eps so fresh directions are covered too; fall back
  // toward eps if the count would break the volume bound.
  for (double factor : {0.8, 0.9, 1.0}) {
    NetCover net = greedy_pack(ev, cand, eps, factor * eps);
    if (static_cast<double>(net.size()) < bound || factor == 1.0) {
      if (static_cast<double>(net.size()) >= bound)
        throw InternalAlarm("epsilon_net: packing exceeded the volume bound");
      return net;
    }
  }
  throw InternalAlarm("epsilon_net: unreachable");
}

double distance_to_net(const NormedSpace& space, const NetCover& net, const Vector& x) {
  const NormEval ev(space);
  return pm_distance(ev, net.points, x).minCoeff();
}

ProjectionWitness l1_rank_reduction(const Matrix& u, const MeasureSpace& mu, double eps,
                                    std::optional<Index> rank) {
  const Index d = u.cols();
  if (static_cast<std::size_t>(d) != mu.atom_count())
    throw ShapeError("l1_rank_reduction: columns of u must match the atoms");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("l1_rank_reduction: eps must lie in (0,1)");
  ProjectionWitness w;
  w.beta_cap = 1.0 / (1.0 - eps);

  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullV);
  const Index n = rank ? std::min(*rank, d) : numerical_rank(u);
  w.rank_cap = 0.5 * net_volume_bound(n, eps);
  if (n == 0) {
    w.P = Matrix::Zero(d, d);
    w.residual = u.cwiseAbs().maxCoeff();
    return w;
  }
  if (n == d) {
    w.P = Matrix::Identity(d, d);
    w.beta_achieved = 1.0;
    w.rank = d;
    return w;
  }

  const Matrix v = svd.matrixV().leftCols(n);
  const NormedSpace f = NormedSpace::quotient(mu, v);
  const NetCover net = epsilon_net(f, eps);
  const Index k = net.pairs();
  w.net_pairs = k;
  const Matrix q = w.beta_cap * net.points;

  const Matrix q0 = v.transpose();
  Matrix q1(d, k);
  for (Index i = 0; i < k; ++i) q1.col(i) = weighted_l1_min_norm(q0, mu.weights(), q.col(i)).x;

  Matrix q2(k, d);
  const Vector ones = Vector::Ones(k);
  for (Index a = 0; a < d; ++a) {
    const MinNormResult r = weighted_l1_min_norm(q, ones, q0.col(a));
    if (r.norm > mu.weight(static_cast<std::size_t>(a)) * (1.0 + 1e-7))
      throw InternalAlarm("l1_rank_reduction: net does not cover Ball(F)");
    q2.col(a) = r.x;
  }

  w.P = q1 * q2;
  w.beta_achieved = l1_operator_norm(w.P, mu);
  w.rank = numerical_rank(w.P);
  w.residual = (u * w.P - u).cwiseAbs().maxCoeff();
  return w;
}

ProjectionWitness ck_rank_projection(const Matrix& basis, double eps) {
  const Index d = basis.rows();
  const Index n = basis.cols();
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("ck_rank_projection: eps must lie in (0,1)");
  if (n == 0 || numerical_rank(basis) < n)
    throw DomainError("ck_rank_projection: basis must have full column rank");
  ProjectionWitness w;
  w.beta_cap = 1.0 / (1.0 - eps);
  w.rank_cap = 0.5 * net_volume_bound(n, eps);

  // Ball(F*) = conv{+/- rows of the basis} in coordinates c.
  const NormedSpace fdual = NormedSpace::vertex_pairs(basis.transpose());
  const NetCover net = epsilon_net(fdual, eps);
  const Index k = net.pairs();
  w.net_pairs = k;
  const Matrix j = w.beta_cap * net.points.transpose();  // k x n

  Matrix j2(k, d);
  for (Index i = 0; i < k; ++i) j2.row(i) = extend_functional(basis, j.row(i).transpose()).psi.transpose();
  Matrix j1(d, k);
  for (Index a = 0; a < d; ++a) j1.row(a) = extend_functional(j, basis.row(a).transpose()).psi.transpose();

  w.P = j1 * j2;
  w.beta_achieved = w.P.cwiseAbs().rowwise().sum().maxCoeff();
  w.rank = numerical_rank(w.P);
  w.residual = (w.P * basis - basis).cwiseAbs().maxCoeff();
  return w;
}

namespace {

struct Orth {
  Matrix basis;
  Matrix complement;
};

Orth orthonormal_split(const Matrix& z0, Index dim) {
  Orth o;
  if (z0.cols() == 0) {
    o.basis = Matrix(dim, 0);
    o.complement = Matrix::Identity(dim, dim);
    return o;
  }
  Eigen::JacobiSVD<Matrix> svd(z0, Eigen::ComputeFullU);
  const Index r = numerical_rank(z0);
  o.basis = svd.matrixU().leftCols(r);
  o.complement = svd.matrixU().rightCols(dim - r);
  return o;
}

// minimize sum_j lam_j |c_j + d_j . x|^p by damped Newton; x is warm-started.
double inner_min(const Vector& c, const Matrix& d, const Vector& lam, double p, Vector& x) {
  auto h = [&](const Vector& y) {
    const Vector e = c + d.transpose() * y;
    return lam.dot(e.cwiseAbs().array().pow(p).matrix());
  };
  double hx = h(x);
  if (d.rows() == 0) return hx;
  for (int it = 0; it < 200; ++it) {
    const Vector e = c + d.transpose() * x;
    const double scale = std::max(e.cwiseAbs().maxCoeff(), 1e-300);
    Vector g1(e.size()), w(e.size());
    for (Index j = 0; j < e.size(); ++j) {
      const double ae = std::abs(e(j));
      g1(j) = lam(j) * p * std::pow(ae, p - 1.0) * sgn(e(j));
      w(j) = lam(j) * p * (p - 1.0) * std::pow(e(j) * e(j) + 1e-18 * scale * scale, 0.5 * (p - 2.0));
    }
    const Vector grad = d * g1;
    Matrix hess = d * w.asDiagonal() * d.transpose();
    hess.diagonal().array() += 1e-12 * hess.diagonal().maxCoeff() + 1e-300;
    const Vector dx = -hess.ldlt().solve(grad);
    const double slope = grad.dot(dx);
    if (!(slope < 0.0)) break;
    double step = 1.0;
    double hn = h(x + dx);
    while (hn > hx + 1e-4 * step * slope && step > 1e-12) {
      step *= 0.5;
      hn = h(x + step * dx);
    }
    if (!(hn < hx)) break;
    x += step * dx;
    const double dec = hx - hn;
    hx = hn;
    if (dec <= 1e-15 * hx) break;
  }
  return hx;
}

Vector project_simplex(const Vector& v) {
  Vector s = v;
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    cum += s(i);
    const double th = (cum - 1.0) / static_cast<double>(i + 1);
    if (s(i) - th > 0.0) theta = th;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

// Gradient in u of sum_a mu_a (sum_j lam_j |(u v_j)_a|^p)^{1/p}.
Matrix danskin_gradient(const Matrix& u, const Matrix& v, const Vector& lam, const Vector& mu, double p) {
  const Matrix e = u * v;
  Matrix g = Matrix::Zero(u.rows(), u.cols());
  for (Index a = 0; a < u.rows(); ++a) {
    double h = 0.0;
    Vector coef(v.cols());
    for (Index j = 0; j < v.cols(); ++j) {
      const double ae = std::abs(e(a, j));
      h += lam(j) * std::pow(ae, p);
      coef(j) = lam(j) * std::pow(ae, p - 1.0) * sgn(e(a, j));
    }
    if (h <= 0.0) continue;
    g.row(a) = mu(a) * std::pow(h, 1.0 / p - 1.0) * (v * coef).transpose();
  }
  return g;
}

double c1p_lower_of(const NormedSpace& domain, const MeasureSpace& mu, const Matrix& m, double p) {
  if (m.cwiseAbs().maxCoeff() <= 1e-14) return 0.0;
  return solve_c1q(LinOp::into_lp(domain, mu, m), p, 1e-10).lower;
}

}  // namespace

MinExtension min_extension_c1p(const LinOp& t, const Matrix& z0, double p, double tol) {
  if (!(p > 1.0) || std::isinf(p)) throw DomainError("min_extension_c1p: need 1 < p < inf");
  if (z0.rows() != t.cols()) throw ShapeError("min_extension_c1p: Z_0 basis has the wrong dimension");
  const MeasureSpace& mu = t.measure();
  const Index atoms = t.rows();
  const Index dz = t.cols();
  MinExtension out;
  const Orth o = orthonormal_split(z0, dz);
  if (o.basis.cols() == 0) {
    out.u_opt = Matrix::Zero(atoms, dz);
    out.dual = Matrix::Zero(atoms, dz);
    out.converged = true;
    return out;
  }

  const Matrix v = t.domain().vertex_pairs();
  const Index J = v.cols();
  const Matrix cv = t.matrix() * v;                   // atoms x J
  const Matrix d = o.complement.transpose() * v;     // m x J
  const Index m = d.rows();
  const Vector& w = mu.weights();

  Matrix x = Matrix::Zero(m, atoms);
  auto psi = [&](const Vector& lam, Matrix& xs, Vector& grad) {
    double val = 0.0;
    grad = Vector::Zero(J);
    for (Index a = 0; a < atoms; ++a) {
      Vector xa = xs.col(a);
      const double h = inner_min(cv.row(a).transpose(), d, lam, p, xa);
      xs.col(a) = xa;
      if (h <= 0.0) continue;
      val += w(a) * std::pow(h, 1.0 / p);
      const Vector e = cv.row(a).transpose() + d.transpose() * xa;
      grad += w(a) / p * std::pow(h, 1.0 / p - 1.0) * e.cwiseAbs().array().pow(p).matrix();
    }
    return val;
  };

  Vector lam = Vector::Constant(J, 1.0 / static_cast<double>(J));
  Vector grad;
  double val = psi(lam, x, grad);
  double step = 1.0 / std::max(grad.cwiseAbs().maxCoeff(), 1e-300);
  int it = 0;
  for (; it < 5000; ++it) {
    const double fw_gap = grad.maxCoeff() - lam.dot(grad);
    if (fw_gap <= 0.1 * tol * std::max(val, 1e-300)) break;
    bool moved = false;
    while (step > 1e-16 / std::max(grad.cwiseAbs().maxCoeff(), 1e-300)) {
      const Vector cand = project_simplex(lam + step * grad);
      Matrix xc = x;
      Vector gc;
      const double vc = psi(cand, xc, gc);
      if (vc >= val + 1e-4 * grad.dot(cand - lam) && vc > val) {
        lam = cand;
        x = xc;
        grad = gc;
        val = vc;
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  out.iterations = it;
  out.lambda = lam;
  out.lower = val;
  out.u_opt = t.matrix() + x.transpose() * o.complement.transpose();
  const double upper = out.u_opt.cwiseAbs().maxCoeff() > 1e-14
                           ? solve_c1q(LinOp::into_lp(t.domain(), mu, out.u_opt), p, 1e-10).upper
                           : 0.0;
  out.value = std::max(upper, out.lower);
  out.gap = out.value - out.lower;
  out.dual = danskin_gradient(out.u_opt, v, lam, w, p);
  out.converged = out.gap <= tol * std::max(out.value, 1e-300);
  if (!out.converged)
    throw MinExtensionError("min_extension_c1p: duality gap above tolerance", out);
  return out;
}

Prop13Result prop13_projection(const LinOp& t, const Matrix& z0, double p, double eps, double tol) {
  Prop13Result r;
  r.extension = min_extension_c1p(t, z0, p, 0.1 * tol);
  const MeasureSpace& mu = t.measure();
  const Orth o = orthonormal_split(z0, t.cols());
  r.n = o.basis.cols() ? static_cast<double>(numerical_rank(t.matrix() * o.basis)) : 0.0;
  const Matrix g = r.extension.dual * o.basis * o.basis.transpose();
  const Matrix v = t.matrix() * g.transpose();
  r.projection = l1_rank_reduction(v, mu, eps, static_cast<Index>(r.n));
  r.c1p_pt = c1p_lower_of(t.domain(), mu, r.projection.P * t.matrix(), p);
  const double a = r.extension.value;
  if (r.c1p_pt < a * (1.0 - tol))
    throw InternalAlarm("prop13_projection: C_{1,p}(PT) = " + std::to_string(r.c1p_pt) +
                        " below A = " + std::to_string(a));
  return r;
}

Theorem11Result theorem11_pipeline(const LinOp& t, const Matrix& z0, double p, double eps, double tol) {
  Theorem11Result out;
  out.prop13 = prop13_projection(t, z0, p, eps, tol);
  const MeasureSpace& mu = t.measure();
  const Matrix& P = out.prop13.projection.P;
  const LinOp pt = LinOp::into_lp(t.domain(), mu, P * t.matrix());
  const double norm_t = op_norm(t, 1.0).value;
  const double norm_pt = op_norm(pt, 1.0).value;
  const double n = std::max(out.prop13.n, 1.0);
  out.c1inf_pt = c1inf(pt);
  out.net_cap = 0.5 * net_volume_bound(static_cast<Index>(n), eps) * norm_pt;
  if (out.c1inf_pt > out.net_cap * (1.0 + 1e-9))
    throw InternalAlarm("theorem11: C_{1,inf}(PT) exceeds N ||PT||");

  out.inner = theorem8_pipeline(pt, p, kInfinity, 1e-9);
  out.c = std::min(out.prop13.extension.lower, out.inner.c1p_lower) / norm_t;

  out.witness = out.inner.fact.witness;
  out.witness.B = out.inner.fact.witness.B * P;
  out.witness.norm_b = l1_to_l1k_norm(out.witness.B, mu);
  out.witness.norm_t = norm_t;
  const Index k = static_cast<Index>(out.witness.k);
  out.witness.residual = (out.witness.B * t.matrix() * out.witness.A - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  out.witness.norm_product = out.witness.norm_a * out.witness.norm_b * norm_t;

  const GammaK g = prop15_bounds(n, p, eps, out.c, norm_t);
  BoundReport& r = out.report;
  r.achieved_k = out.witness.k;
  r.achieved_gamma = out.witness.norm_a * out.witness.norm_b;
  r.guaranteed_gamma = g.gamma;
  r.guaranteed_k = g.k;
  r.k_vacuous = g.k < 1.0;
  r.inputs = {{"n", n}, {"p", p}, {"eps", eps}, {"c", out.c}, {"norm_t", norm_t},
              {"A", out.prop13.extension.value}, {"norm_P", out.prop13.projection.beta_achieved}};
  if (std::abs(eps - 0.5) < 1e-15 && out.c >= 32.0) {
    const GammaK g11 = thm11_bounds(n, p, norm_t);
    r.inputs["thm11_gamma"] = g11.gamma;
    r.inputs["thm11_k"] = g11.k;
  }
  return out;
}

Theorem16Result theorem16_pipeline(const LinOp& u, const Matrix& e, double t, double eps,
                                   std::optional<double> c, double tol) {
  if (u.domain().kind() != BallKind::kSignCube) throw DomainError("theorem16: U must act on l_inf^d");
  if (u.targets_measure()) throw DomainError("theorem16: codomain must be a NormedSpace");
  if (!(t > 1.0) || std::isinf(t)) throw DomainError("theorem16: need 1 < t < inf");
  const Index d = u.cols();
  if (e.rows() != d) throw ShapeError("theorem16: E basis must live in l_inf^d");
  Theorem16Result out;
  out.projection = ck_rank_projection(e, eps);
  const Matrix& P = out.projection.P;
  const NormedSpace& x = std::get<NormedSpace>(u.codomain());
  const NormedSpace xdual = x.dual();
  const Matrix up = u.matrix() * P;
  const LinOp tstar = LinOp::into_lp(xdual, MeasureSpace::counting(static_cast<std::size_t>(d)), up.transpose());
  out.norm_u = op_norm(u).value;

  out.inner = theorem8_pipeline(tstar, conjugate(t), kInfinity, tol);
  const FactorizationWitness& w = out.inner.fact.witness;
  out.A = P * w.B.transpose();
  out.B = w.A.transpose();
  out.norm_a = out.A.cwiseAbs().rowwise().sum().maxCoeff();
  out.norm_b = 0.0;
  for (Index i = 0; i < w.A.cols(); ++i) out.norm_b = std::max(out.norm_b, xdual.norm(w.A.col(i)));
  const Index k = static_cast<Index>(w.k);
  out.residual = (out.B * u.matrix() * out.A - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();

  const double measured = out.inner.c1p_lower / out.norm_u;
  out.c = c ? *c : measured;
  const double n = static_cast<double>(e.cols());
  const GammaK g = prop18_bounds(n, t, eps, out.c, out.norm_u);
  BoundReport& r = out.report;
  r.achieved_k = w.k;
  r.achieved_gamma = out.norm_a * out.norm_b;
  r.guaranteed_gamma = g.gamma;
  r.guaranteed_k = g.k;
  r.k_vacuous = g.k < 1.0;
  r.inputs = {{"n", n}, {"t", t}, {"eps", eps}, {"c", out.c}, {"c_measured", measured},
              {"norm_u", out.norm_u}, {"norm_P", out.projection.beta_achieved}};
  if (std::abs(eps - 0.5) < 1e-15 && out.c >= 32.0) {
    const GammaK g16 = thm16_bounds(n, t, out.norm_u);
    r.inputs["thm16_gamma"] = g16.gamma;
    r.inputs["thm16_k"] = g16.k;
  }
  return out;
}

}  // namespace densfact
