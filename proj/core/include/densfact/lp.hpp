#pragma once

#include <string_view>
#include <vector>

#include "densfact/types.hpp"

namespace densfact {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string_view to_string(LpStatus status) noexcept;

/// minimize c.x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,
/// x_j >= 0 unless free[j] (an empty `free` means every variable is nonnegative).
struct LinearProgram {
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ub_matrix;
  Vector ub_rhs;
  std::vector<bool> free;

  explicit LinearProgram(Index variables);
  Index variables() const noexcept { return objective.size(); }

  void add_equality(const Vector& row, double rhs);
  void add_inequality(const Vector& row, double rhs);
  void set_free(Index j, bool is_free = true);
};

/// Primal solution together with a dual certificate. Duals follow the
/// convention  max b_eq.y + b_ub.z  s.t.  A_eq^T y + A_ub^T z <= c (= c on free
/// columns), z <= 0.
struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double value = 0.0;
  Vector eq_duals;
  Vector ub_duals;
  double dual_value = 0.0;
  double primal_violation = 0.0;
  double dual_violation = 0.0;
  double gap = 0.0;
  int iterations = 0;

  bool optimal() const noexcept { return status == LpStatus::kOptimal; }
  /// Feasibility within kFeasibilityTol and gap within kGapTol (1 + |value|).
  bool certified() const noexcept;
};

/// Dense two-phase primal simplex (Dantzig pricing, Bland fallback on stalls).
LpSolution solve_lp(const LinearProgram& lp);

/// Same as solve_lp but throws InfeasibleError / ConvergenceError on failure.
LpSolution solve_lp_checked(const LinearProgram& lp, std::string_view context);

}  // namespace densfact
