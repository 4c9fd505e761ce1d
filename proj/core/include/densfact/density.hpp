#pragma once

#include <vector>

#include "densfact/errors.hpp"
#include "densfact/linop.hpp"
#include "densfact/measure.hpp"

namespace densfact {

/// Density h certifying an upper bound on C_{1,q}(T), with a lower bound.
struct DensityCertificate {
  Fun h;
  double q = 2.0;
  double s_exponent = 2.0;  ///< 1/q + 1/s = 1, i.e. s = q*
  double upper = 0.0;       ///< ||h||_s * ||h^{-1} T : Z -> L_q||
  double lower = 0.0;
  double gap = 0.0;         ///< upper - lower
  Vector lambda{};          ///< dual weights over domain vertex pairs
  int newton_steps = 0;
  bool converged = false;

  double relative_gap() const noexcept { return upper > 0 ? gap / upper : 0.0; }
};

class DensityConvergenceError : public ConvergenceError {
 public:
  DensityConvergenceError(const std::string& what, DensityCertificate best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const DensityCertificate& best() const noexcept { return best_; }

 private:
  DensityCertificate best_;
};

/// Solves for C_{1,q}(T) without throwing on a missed tolerance; `converged`
/// reports whether relative_gap() <= tol.
DensityCertificate solve_c1q(const LinOp& t, double q, double tol = 1e-9);

/// Same as solve_c1q but throws DensityConvergenceError if tol is not reached.
DensityCertificate c1q(const LinOp& t, double q, double tol = 1e-9);

/// ||h||_{q*} * max_j ||h^{-1} T v_j||_{L_q}, evaluated from scratch.
double density_upper(const LinOp& t, const Vector& h, double q);

/// Hoelder dual value sum_a mu_a (sum_j lambda_j |T v_j|_a^q)^{1/q}.
double density_dual_value(const LinOp& t, const Vector& lambda, double q);

/// int max_j |T v_j| dmu, the exact value of C_{1,inf}(T).
double c1inf(const LinOp& t);

struct MaureyForm {
  Fun phi;           ///< int phi dmu = 1
  double r = 2.0;
  double value = 0;  ///< ||phi^{-1} T : Z -> L_r(phi dmu)||
  double lower = 0;  ///< certified lower bound on C_{1,r}(T)
};

/// ||phi^{-1} T : Z -> L_r(phi dmu)|| with the 0/0 = 0 convention.
double maurey_value(const LinOp& t, const Vector& phi, double r);

MaureyForm maurey_density(const LinOp& t, double r, double tol = 1e-9);

struct MixedOperator {
  LinOp t1;                  ///< phi^{-1} T into L_1(phi dmu)
  Fun phi;
  std::vector<std::size_t> kept_atoms;  ///< atoms of mu carried by the new measure
};

MixedOperator mix_and_renormalize(const LinOp& t, const MaureyForm& phi_p, const MaureyForm& phi_q);

struct PiResult {
  double value = 0;  ///< best estimate (the certified upper value)
  double lower = 0;
  double upper = 0;
  bool certified = false;
};

/// pi_t(U) for U from l_inf^N, through C_{1,t*}(U*).
PiResult pi_dual(const LinOp& u, double t, double tol = 1e-9);

/// sqrt(n / t).
double pi_t_l2_lower(double n, double t);

}  // namespace densfact
