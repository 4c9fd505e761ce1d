#pragma once

#include <cstdint>

#include "densfact/bounds.hpp"
#include "densfact/ell1fact.hpp"
#include "densfact/linop.hpp"

namespace densfact {

/// Two 2n-dimensional subspaces of L^{3n} (normalized counting measure)
/// spanned by column blocks of a random orthogonal U.
struct KashinPair {
  int n = 0;
  Matrix U;   ///< 3n x 3n orthogonal
  Matrix E1;  ///< U[:, 0:2n]
  Matrix E2;  ///< U[:, n:3n]
  double b_hat = 1;  ///< max over E1, E2 of the estimated sup ||f||_2 / ||f||_1
  double b_e1 = 1;
  double b_e2 = 1;
  Vector extremal_e1;  ///< maximizing direction found in E1 (coordinates in E1)
  int restarts = 0;
  std::uint64_t seed = 0;
  bool estimate_flag = true;  ///< b_hat comes from a nonconvex search; never certified
};

/// sup of ||W c||_2 / ||W c||_1 over c != 0 (normalized counting measure on
/// the rows of W, W with orthonormal columns), by multistart vertex search.
/// Writes the best direction to `argmax` when given.
double l2_l1_ratio(const Matrix& w, int restarts, std::uint64_t seed, Vector* argmax = nullptr);

KashinPair random_kashin_pair(int n, std::uint64_t seed, int restarts = 64);

struct KashinOperator {
  KashinPair pair;
  NormedSpace F;      ///< L_1^{3n} / E2^perp, coordinates U[:, n:3n]^T x
  LinOp u;            ///< l_2^n -> F_n, the natural map
  LinOp v;            ///< b_hat u
  double b_hat = 1;
  double B_hat = 1;   ///< ||P|| pi_1(i_{inf,1}) ||i_{1,2}|| b_hat, bounding pi_1(v*)
  double norm_projection = 1;
  double pi1_inf1 = 1;
  double norm_i12 = 1;
  double min_ratio = 0;  ///< min ||v e|| / ||e|| over checked directions
  int checked = 0;
  bool verified = false;
  int draws = 1;
};

/// Builds F_n, u and v from a pair and checks ||v e|| >= ||e|| on `samples`
/// seeded directions plus the extremal one; `verified` records the outcome.
KashinOperator build_kashin_operator(const KashinPair& pair, int samples = 1000,
                                     std::uint64_t sample_seed = 0x6b617368ULL);

/// Redraws the pair (seeds mix_seed(seed, attempt)) until verified, at most
/// `max_draws` times; throws ConvergenceError otherwise.
KashinOperator kashin_operator(int n, std::uint64_t seed, int restarts = 64, int max_draws = 8);

struct Lemma23Report {
  BoundReport report;
  ConstantLedger ledger;
  bool feasible = false;
};

/// t = n / (2^5 B_hat gl_j)^2 and c = sqrt(n / t); emits the growth ledger.
Lemma23Report lemma23_driver(const KashinOperator& op, double gl_j);
Lemma23Report lemma23_driver(double n, double B_hat, double gl_j);

}  // namespace densfact
