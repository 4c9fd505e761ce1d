#pragma once

#include <cstdint>
#include <optional>

#include "densfact/ell1fact.hpp"
#include "densfact/linop.hpp"
#include "densfact/normed_space.hpp"

namespace densfact {

/// Symmetric epsilon-net of the unit sphere: the net is {+x, -x : x a column}.
struct NetCover {
  Matrix points;  ///< one representative per +/- pair, unit vectors as columns
  double epsilon = 0.5;
  double packing_radius = 0.5;   ///< separation threshold used by the greedy
  double covering_radius = 0.0;  ///< max distance from a candidate to the net

  Index pairs() const noexcept { return points.cols(); }
  Index size() const noexcept { return 2 * points.cols(); }
};

/// (2/eps + 1)^n.
double net_volume_bound(Index n, double eps);

/// Greedy farthest-point packing over sphere candidates (normalized ball
/// vertices plus seeded random directions).
NetCover epsilon_net(const NormedSpace& space, double eps, std::uint64_t seed = 0x5eedULL);

/// min over net points y of norm(x - y).
double distance_to_net(const NormedSpace& space, const NetCover& net, const Vector& x);

struct ProjectionWitness {
  Matrix P;                  ///< W -> W
  double beta_achieved = 0;  ///< ||P||
  double beta_cap = 0;       ///< (1 - eps)^{-1}
  Index rank = 0;
  double rank_cap = 0;       ///< N = (2/eps + 1)^n / 2
  double residual = 0;       ///< max |uP - u| or max |Qf - f| on F
  Index net_pairs = 0;
};

/// P on L_1(mu) with uP = u, ||P|| <= (1-eps)^{-1}; `rank` overrides the
/// numerical rank of u.
ProjectionWitness l1_rank_reduction(const Matrix& u, const MeasureSpace& mu, double eps,
                                    std::optional<Index> rank = std::nullopt);

/// Q on l_inf^d with Qf = f for f in span(basis columns).
ProjectionWitness ck_rank_projection(const Matrix& basis, double eps);

struct MinExtension {
  double value = 0;   ///< C_{1,p}(u_opt), upper estimate of A
  double lower = 0;   ///< dual value, lower bound on A
  Matrix u_opt;       ///< atoms x dim Z
  Matrix dual;        ///< G with Phi(u) = Tr(G^T u); Phi <= C_{1,p} everywhere
  Vector lambda;      ///< weights over domain vertex pairs
  double gap = 0;
  int iterations = 0;
  bool converged = false;
};

class MinExtensionError : public ConvergenceError {
 public:
  MinExtensionError(const std::string& what, MinExtension best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const MinExtension& best() const noexcept { return best_; }

 private:
  MinExtension best_;
};

/// inf { C_{1,p}(u) : u = T on span(z0 columns) }.
MinExtension min_extension_c1p(const LinOp& t, const Matrix& z0, double p, double tol = 1e-6);

struct Prop13Result {
  ProjectionWitness projection;
  MinExtension extension;
  double c1p_pt = 0;  ///< certified lower bound on C_{1,p}(PT)
  double n = 0;       ///< dim T Z_0
};

/// Throws InternalAlarm when C_{1,p}(PT) < A (1 - tol).
Prop13Result prop13_projection(const LinOp& t, const Matrix& z0, double p, double eps,
                               double tol = 1e-3);

struct Theorem11Result {
  Prop13Result prop13;
  Theorem8Result inner;  ///< the factorization pipeline applied to PT with q = inf
  FactorizationWitness witness;  ///< B' = B P, same A
  BoundReport report;
  double c = 0;        ///< certified C_{1,p}(PT) / ||T||
  double c1inf_pt = 0;
  double net_cap = 0;  ///< N ||PT||
};

Theorem11Result theorem11_pipeline(const LinOp& t, const Matrix& z0, double p, double eps,
                                   double tol = 1e-3);

struct Theorem16Result {
  ProjectionWitness projection;
  Theorem8Result inner;  ///< on (UP)^*
  Matrix A;              ///< l_inf^k -> l_inf^d
  Matrix B;              ///< X -> l_inf^k
  double norm_a = 0;
  double norm_b = 0;
  double norm_u = 0;
  double residual = 0;   ///< max |B U A - I|
  double c = 0;
  BoundReport report;
};

/// `c` defaults to C_{1,t*}((UP)^*) / ||U||, a valid stand-in for
/// pi_t(U|_E) / ||U||.
Theorem16Result theorem16_pipeline(const LinOp& u, const Matrix& e, double t, double eps,
                                   std::optional<double> c = std::nullopt, double tol = 1e-6);

}  // namespace densfact
