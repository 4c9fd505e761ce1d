#pragma once

#include "densfact/measure.hpp"
#include "densfact/types.hpp"

namespace densfact {

class LinOp;

struct MinNormResult {
  Vector x;          ///< optimal point
  double norm = 0;   ///< sum_i w_i |x_i|
  Vector dual;       ///< y with |Q^T y| <= w coordinatewise and y.rhs = norm
  double residual = 0;  ///< max |Q x - rhs|
};

/// minimize sum_i w_i |x_i| subject to Q x = y. Throws InfeasibleError if y
/// is outside the range of Q.
MinNormResult weighted_l1_min_norm(const Matrix& q, const Vector& weights, const Vector& y);

/// Minimal-norm preimage under Q for a CrossPolytope domain (weights 1).
MinNormResult min_norm_preimage(const LinOp& q, const Vector& y);

struct Extension {
  Vector psi;                  ///< functional on l_inf^d, as an l_1^d vector
  double norm = 0;             ///< ||psi||_1
  double restriction_residual = 0;  ///< max |basis^T psi - values|
};

/// Norm-preserving extension to l_inf^d of the functional on F = span(basis
/// columns) given by its values on the basis.
Extension extend_functional(const Matrix& basis, const Vector& values);

/// min over y in span(kernel_span) of ||x - y||_{L_1(ambient)}.
double quotient_norm(const MeasureSpace& ambient, const Matrix& kernel_span, const Vector& x);

}  // namespace densfact
