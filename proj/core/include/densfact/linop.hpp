#pragma once

#include <variant>

#include "densfact/measure.hpp"
#include "densfact/normed_space.hpp"
#include "densfact/types.hpp"

namespace densfact {

/// L_r(mu) as an operator codomain.
struct LpTarget {
  MeasureSpace space;
  double exponent = 1.0;

  bool operator==(const LpTarget&) const = default;
};

using Codomain = std::variant<NormedSpace, LpTarget>;

/// Matrix operator from a NormedSpace into a NormedSpace or an L_r space.
class LinOp {
 public:
  LinOp(NormedSpace domain, Codomain codomain, Matrix matrix);

  static LinOp into_lp(NormedSpace domain, MeasureSpace space, Matrix matrix, double r = 1.0);

  const NormedSpace& domain() const noexcept { return domain_; }
  const Codomain& codomain() const noexcept { return codomain_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  Index rows() const noexcept { return matrix_.rows(); }
  Index cols() const noexcept { return matrix_.cols(); }

  bool targets_measure() const noexcept { return std::holds_alternative<LpTarget>(codomain_); }
  /// Throws DomainError unless the codomain is an L_r space.
  const LpTarget& target() const;
  const MeasureSpace& measure() const { return target().space; }

  /// Codomain norm of y; for L_r codomains, `r` overrides the exponent when given.
  double codomain_norm(const Vector& y) const;
  double codomain_norm(const Vector& y, double r) const;

  Vector apply(const Vector& x) const { return matrix_ * x; }

  /// this o inner. The inner codomain must be a NormedSpace equal to this domain,
  /// or dimensions must agree when `check_spaces` is false.
  LinOp compose(const LinOp& inner, bool check_spaces = true) const;
  LinOp scaled(double factor) const;
  LinOp with_exponent(double r) const;
  LinOp with_matrix(Matrix matrix) const;

  /// Transpose as an operator between dual spaces (both sides NormedSpace).
  LinOp adjoint() const;

 private:
  NormedSpace domain_;
  Codomain codomain_;
  Matrix matrix_;
};

struct NormResult {
  double value = 0.0;
  bool certified = false;
  Vector witness;  ///< maximizing domain vector
};

/// Operator norm; `r` selects the L_r exponent for measure codomains.
NormResult op_norm(const LinOp& t, double r);
NormResult op_norm(const LinOp& t);

/// max over domain vertices of |T v|_a, atomwise (the envelope).
Vector envelope(const LinOp& t);

/// Images T v of one representative per +/- domain vertex pair, as columns.
Matrix vertex_images(const LinOp& t);

}  // namespace densfact
