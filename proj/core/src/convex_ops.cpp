#include "densfact/convex_ops.hpp"

#include <algorithm>

#include "densfact/errors.hpp"
#include "densfact/linop.hpp"
#include "densfact/lp.hpp"

namespace densfact {

MinNormResult weighted_l1_min_norm(const Matrix& q, const Vector& weights, const Vector& y) {
  const Index m = q.rows();
  const Index d = q.cols();
  if (weights.size() != d || y.size() != m) throw ShapeError("weighted_l1_min_norm: shape mismatch");
  MinNormResult out;
  if (y.size() == 0 || y.cwiseAbs().maxCoeff() == 0.0) {
    out.x = Vector::Zero(d);
    out.dual = Vector::Zero(m);
    return out;
  }
  // x = a - b with a, b >= 0.
  LinearProgram lp(2 * d);
  lp.objective << weights, weights;
  lp.eq_matrix.resize(m, 2 * d);
  lp.eq_matrix << q, -q;
  lp.eq_rhs = y;
  const LpSolution sol = solve_lp_checked(lp, "weighted_l1_min_norm");
  out.x = sol.x.head(d) - sol.x.tail(d);
  out.norm = weights.dot(out.x.cwiseAbs());
  out.dual = sol.eq_duals;
  out.residual = (q * out.x - y).cwiseAbs().maxCoeff();
  return out;
}

MinNormResult min_norm_preimage(const LinOp& q, const Vector& y) {
  if (q.domain().kind() != BallKind::kCrossPolytope)
    throw DomainError("min_norm_preimage: domain must be an l_1 ball");
  return weighted_l1_min_norm(q.matrix(), Vector::Ones(q.cols()), y);
}

Extension extend_functional(const Matrix& basis, const Vector& values) {
  if (basis.cols() != values.size()) throw ShapeError("extend_functional: one value per basis vector");
  const MinNormResult r =
      weighted_l1_min_norm(basis.transpose(), Vector::Ones(basis.rows()), values);
  Extension e;
  e.psi = r.x;
  e.norm = r.norm;
  e.restriction_residual = values.size() ? (basis.transpose() * r.x - values).cwiseAbs().maxCoeff() : 0.0;
  return e;
}

double quotient_norm(const MeasureSpace& ambient, const Matrix& kernel_span, const Vector& x) {
  const Index d = static_cast<Index>(ambient.atom_count());
  if (x.size() != d || kernel_span.rows() != d) throw ShapeError("quotient_norm: shape mismatch");
  const Vector& w = ambient.weights();
  if (kernel_span.cols() == 0) return w.dot(x.cwiseAbs());
  const Index k = kernel_span.cols();
  // a - b + K c = x, minimize w.(a + b), c free.
  LinearProgram lp(2 * d + k);
  lp.objective.head(d) = w;
  lp.objective.segment(d, d) = w;
  lp.eq_matrix.resize(d, 2 * d + k);
  lp.eq_matrix << Matrix::Identity(d, d), -Matrix::Identity(d, d), kernel_span;
  lp.eq_rhs = x;
  for (Index j = 0; j < k; ++j) lp.set_free(2 * d + j);
  const LpSolution sol = solve_lp_checked(lp, "quotient_norm");
  return std::max(sol.value, 0.0);
}

}  // namespace densfact
