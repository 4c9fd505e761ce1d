#include "densfact/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "densfact/errors.hpp"

namespace densfact {

std::string_view to_string(LpStatus status) noexcept {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

LinearProgram::LinearProgram(Index variables)
    : objective(Vector::Zero(variables)),
      eq_matrix(0, variables),
      eq_rhs(0),
      ub_matrix(0, variables),
      ub_rhs(0),
      free(static_cast<std::size_t>(variables), false) {}

void LinearProgram::add_equality(const Vector& row, double rhs) {
  if (row.size() != variables()) throw ShapeError("add_equality: row length mismatch");
  eq_matrix.conservativeResize(eq_matrix.rows() + 1, variables());
  eq_matrix.row(eq_matrix.rows() - 1) = row.transpose();
  eq_rhs.conservativeResize(eq_rhs.size() + 1);
  eq_rhs(eq_rhs.size() - 1) = rhs;
}

void LinearProgram::add_inequality(const Vector& row, double rhs) {
  if (row.size() != variables()) throw ShapeError("add_inequality: row length mismatch");
  ub_matrix.conservativeResize(ub_matrix.rows() + 1, variables());
  ub_matrix.row(ub_matrix.rows() - 1) = row.transpose();
  ub_rhs.conservativeResize(ub_rhs.size() + 1);
  ub_rhs(ub_rhs.size() - 1) = rhs;
}

void LinearProgram::set_free(Index j, bool is_free) {
  if (free.empty()) free.assign(static_cast<std::size_t>(variables()), false);
  free.at(static_cast<std::size_t>(j)) = is_free;
}

bool LpSolution::certified() const noexcept {
  return optimal() && primal_violation <= kFeasibilityTol &&
         gap <= kGapTol * (1.0 + std::abs(value));
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

class Tableau {
 public:
  Tableau(const Matrix& a, const Vector& b, Index structural)
      : rows_(a.rows()), structural_(structural), t_(a.rows() + 1, structural + a.rows() + 1) {
    t_.setZero();
    t_.topLeftCorner(rows_, structural_) = a;
    for (Index i = 0; i < rows_; ++i) t_(i, structural_ + i) = 1.0;
    t_.col(rhs_col()).head(rows_) = b;
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Index i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = structural_ + i;
  }

  Index rhs_col() const { return t_.cols() - 1; }
  Index columns() const { return structural_ + rows_; }
  bool is_artificial(Index j) const { return j >= structural_; }

  void set_costs(const Vector& cost) {
    // cost has length columns(); objective row holds reduced costs.
    t_.row(rows_).setZero();
    t_.row(rows_).head(columns()) = cost.transpose();
    for (Index i = 0; i < rows_; ++i) {
      const double cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  void pivot(Index r, Index s) {
    t_.row(r) /= t_(r, s);
    for (Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, s);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    t_(r, s) = 1.0;
    basis_[static_cast<std::size_t>(r)] = s;
  }

  // Runs simplex iterations; returns status. Artificial columns may enter only
  // when allow_artificial is set.
  LpStatus run(bool allow_artificial, int max_iter, int& iterations) {
    int degenerate_streak = 0;
    while (iterations < max_iter) {
      const bool bland = degenerate_streak > 50;
      Index enter = -1;
      double best = -kCostTol;
      for (Index j = 0; j < columns(); ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        const double rc = t_(rows_, j);
        if (rc < best) {
          enter = j;
          best = rc;
          if (bland) break;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      Index leave = -1;
      double ratio = 0.0;
      for (Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double r = std::max(t_(i, rhs_col()), 0.0) / a;
        if (leave < 0 || r < ratio - 1e-14 ||
            (std::abs(r - ratio) <= 1e-14 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          ratio = r;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate_streak = ratio <= 1e-14 ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
    return LpStatus::kIterationLimit;
  }

  // Pivots basic artificials out where possible.
  void drive_out_artificials() {
    for (Index i = 0; i < rows_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Index best = -1;
      double mag = 1e-9;
      for (Index j = 0; j < structural_; ++j) {
        if (std::abs(t_(i, j)) > mag) {
          mag = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  double objective_value() const { return -t_(rows_, rhs_col()); }
  const std::vector<Index>& basis() const { return basis_; }

 private:
  Index rows_;
  Index structural_;
  Matrix t_;
  std::vector<Index> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const Index n = lp.variables();
  const Index meq = lp.eq_matrix.rows();
  const Index mub = lp.ub_matrix.rows();
  const Index m = meq + mub;
  if (lp.eq_rhs.size() != meq || lp.ub_rhs.size() != mub ||
      (meq > 0 && lp.eq_matrix.cols() != n) || (mub > 0 && lp.ub_matrix.cols() != n))
    throw ShapeError("solve_lp: inconsistent problem dimensions");

  auto is_free = [&](Index j) {
    return !lp.free.empty() && lp.free[static_cast<std::size_t>(j)];
  };

  // Column layout: x+ for every variable, x- for free variables, one slack per
  // inequality row.
  std::vector<Index> minus_col(static_cast<std::size_t>(n), -1);
  Index cols = n;
  for (Index j = 0; j < n; ++j)
    if (is_free(j)) minus_col[static_cast<std::size_t>(j)] = cols++;
  const Index slack0 = cols;
  cols += mub;

  Matrix a = Matrix::Zero(m, cols);
  Vector b(m);
  Vector c = Vector::Zero(cols);
  for (Index j = 0; j < n; ++j) {
    c(j) = lp.objective(j);
    const Index mc = minus_col[static_cast<std::size_t>(j)];
    if (mc >= 0) c(mc) = -lp.objective(j);
  }
  auto fill_row = [&](Index row, const auto& src) {
    for (Index j = 0; j < n; ++j) {
      a(row, j) = src(j);
      const Index mc = minus_col[static_cast<std::size_t>(j)];
      if (mc >= 0) a(row, mc) = -src(j);
    }
  };
  for (Index i = 0; i < meq; ++i) {
    fill_row(i, lp.eq_matrix.row(i));
    b(i) = lp.eq_rhs(i);
  }
  for (Index i = 0; i < mub; ++i) {
    fill_row(meq + i, lp.ub_matrix.row(i));
    a(meq + i, slack0 + i) = 1.0;
    b(meq + i) = lp.ub_rhs(i);
  }
  Vector row_sign = Vector::Ones(m);
  for (Index i = 0; i < m; ++i) {
    if (b(i) < 0) {
      a.row(i) *= -1.0;
      b(i) *= -1.0;
      row_sign(i) = -1.0;
    }
  }

  LpSolution sol;
  sol.x = Vector::Zero(n);
  sol.eq_duals = Vector::Zero(meq);
  sol.ub_duals = Vector::Zero(mub);

  Tableau tab(a, b, cols);
  const int max_iter = static_cast<int>(200 * (m + cols) + 1000);

  Vector phase1 = Vector::Zero(cols + m);
  phase1.tail(m).setOnes();
  tab.set_costs(phase1);
  LpStatus st = tab.run(true, max_iter, sol.iterations);
  if (st == LpStatus::kIterationLimit) {
    sol.status = st;
    return sol;
  }
  const double scale = 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  if (tab.objective_value() > 1e-9 * scale) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }
  tab.drive_out_artificials();

  Vector phase2 = Vector::Zero(cols + m);
  phase2.head(cols) = c;
  tab.set_costs(phase2);
  st = tab.run(false, max_iter, sol.iterations);
  sol.status = st;
  if (st != LpStatus::kOptimal) return sol;

  // Recompute the basic solution and the duals from the basis matrix.
  Matrix basis_matrix = Matrix::Zero(m, m);
  Vector cb = Vector::Zero(m);
  const auto& basis = tab.basis();
  for (Index i = 0; i < m; ++i) {
    const Index j = basis[static_cast<std::size_t>(i)];
    if (j < cols) {
      basis_matrix.col(i) = a.col(j);
      cb(i) = c(j);
    } else {
      basis_matrix(j - cols, i) = 1.0;
    }
  }
  Vector std_x = Vector::Zero(cols);
  Vector y = Vector::Zero(m);
  if (m > 0) {
    Eigen::FullPivLU<Matrix> lu(basis_matrix);
    const Vector xb = lu.solve(b);
    for (Index i = 0; i < m; ++i) {
      const Index j = basis[static_cast<std::size_t>(i)];
      if (j < cols) std_x(j) = std::max(xb(i), 0.0);
    }
    y = lu.transpose().solve(cb);
  }
  for (Index j = 0; j < n; ++j) {
    sol.x(j) = std_x(j);
    const Index mc = minus_col[static_cast<std::size_t>(j)];
    if (mc >= 0) sol.x(j) -= std_x(mc);
  }
  for (Index i = 0; i < m; ++i) y(i) *= row_sign(i);
  sol.eq_duals = y.head(meq);
  sol.ub_duals = y.tail(mub);

  sol.value = lp.objective.dot(sol.x);
  sol.dual_value = (meq ? lp.eq_rhs.dot(sol.eq_duals) : 0.0) + (mub ? lp.ub_rhs.dot(sol.ub_duals) : 0.0);
  sol.gap = std::abs(sol.value - sol.dual_value);

  double viol = 0.0;
  if (meq) viol = std::max(viol, (lp.eq_matrix * sol.x - lp.eq_rhs).cwiseAbs().maxCoeff());
  if (mub) viol = std::max(viol, (lp.ub_matrix * sol.x - lp.ub_rhs).maxCoeff());
  for (Index j = 0; j < n; ++j)
    if (!is_free(j)) viol = std::max(viol, -sol.x(j));
  sol.primal_violation = std::max(viol, 0.0);

  Vector reduced = lp.objective;
  if (meq) reduced -= lp.eq_matrix.transpose() * sol.eq_duals;
  if (mub) reduced -= lp.ub_matrix.transpose() * sol.ub_duals;
  double dviol = 0.0;
  for (Index j = 0; j < n; ++j)
    dviol = std::max(dviol, is_free(j) ? std::abs(reduced(j)) : -reduced(j));
  if (mub) dviol = std::max(dviol, sol.ub_duals.maxCoeff());
  sol.dual_violation = std::max(dviol, 0.0);
  return sol;
}

LpSolution solve_lp_checked(const LinearProgram& lp, std::string_view context) {
  LpSolution sol = solve_lp(lp);
  switch (sol.status) {
    case LpStatus::kOptimal: break;
    case LpStatus::kInfeasible:
      throw InfeasibleError(std::string(context) + ": linear program is infeasible");
    case LpStatus::kUnbounded:
      throw InternalAlarm(std::string(context) + ": linear program is unbounded");
    case LpStatus::kIterationLimit:
      throw ConvergenceError(std::string(context) + ": simplex iteration limit reached");
  }
  if (!sol.certified())
    throw ConvergenceError(std::string(context) + ": solution failed certification (violation " +
                           std::to_string(sol.primal_violation) + ", gap " +
                           std::to_string(sol.gap) + ")");
  return sol;
}

}  // namespace densfact
