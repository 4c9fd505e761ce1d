#pragma once

#include <map>
#include <string>
#include <vector>

#include "densfact/density.hpp"
#include "densfact/extraction.hpp"
#include "densfact/linop.hpp"
#include "densfact/measure.hpp"

namespace densfact {

/// Unit ball of L_1(mu) as a vertex list conv{+/- e_a / mu_a}.
NormedSpace l1_space(const MeasureSpace& mu);

/// ||Q : L_1(mu) -> l_1^k|| = max_a ||Q e_a||_1 / mu_a.
double l1_to_l1k_norm(const Matrix& q, const MeasureSpace& mu);

struct SubsetSelection {
  std::vector<std::size_t> E0;  ///< the 2k-subset from conditional expectations
  std::vector<std::size_t> D;   ///< selected k indices (ascending)
  Matrix a;                     ///< a_ij = int_{A_j} |x_i|
  double alpha = 0;             ///< sum_{i != j} a_ij
  double alpha_E0 = 0;
  double E0_bound = 0;          ///< binom(2k,2) binom(m,2)^{-1} alpha
  double total_norm = 0;        ///< sum_i ||x_i||_1
  double row_bound = 0;         ///< (2k-1) binom(m,2)^{-1} total_norm
  double max_row = 0;           ///< max_{i in D} sum_{j in D \ i} a_ij
};

/// a_ij = int_{A_j} |x_i| dmu for columns x_i of `x` (atoms x m).
Matrix cross_masses(const Matrix& x, const MeasureSpace& mu, const std::vector<AtomSet>& sets);

SubsetSelection select_subset(const Matrix& x, const MeasureSpace& mu, const std::vector<AtomSet>& sets,
                              std::size_t k);
/// Same selection from a precomputed cross-mass matrix.
SubsetSelection select_subset(const Matrix& a, double total_norm, std::size_t k);

/// alpha(E) = sum_{i in E} sum_{j in E \ i} a_ij.
double subset_alpha(const Matrix& a, const std::vector<std::size_t>& e);

struct LeftInverse {
  Matrix q;            ///< k x atoms
  double norm = 0;     ///< ||Q : L_1(mu) -> l_1^k||
  double residual = 0; ///< max |QU - I|
  double margin = 0;   ///< delta - gamma
};

/// Q = (WU)^{-1} W with W rows mu_a 1_{F_i} sgn(U e_i). Requires
/// ||1_{F_i} U e_i|| >= delta and max_i sum_{j != i} ||1_{F_j} U e_i|| <= gamma < delta.
LeftInverse build_left_inverse(const Matrix& u, const MeasureSpace& mu, const std::vector<AtomSet>& sets,
                               double delta, double gamma);

struct FactorizationWitness {
  std::size_t k = 0;
  Matrix A;               ///< ambient columns A e_i
  Matrix B;               ///< rows of B
  double norm_a = 0;
  double norm_b = 0;
  double norm_t = 0;
  double residual = 0;    ///< max |B T A - I|
  double norm_product = 0;  ///< ||A|| ||B|| ||T||
  double margin = 0;        ///< delta - gamma used by the left inverse (normalized T)
  std::vector<std::size_t> selected;  ///< item indices used for A
};

struct BoundReport {
  double guaranteed_k = 0;
  std::size_t achieved_k = 0;
  double guaranteed_gamma = 0;
  double achieved_gamma = 0;
  bool k_vacuous = false;
  std::map<std::string, double> inputs;

  bool k_met() const noexcept;
  bool gamma_met() const noexcept { return achieved_gamma <= guaranteed_gamma + 1e-7; }
};

struct FactorItem {
  Vector z;
  AtomSet F;
};

struct Factorization {
  FactorizationWitness witness;
  BoundReport report;
};

/// Witness for gamma_T(l_1^k) <= 2 / (delta ||T||).
Factorization factor_l1(const LinOp& t, const std::vector<FactorItem>& items, double delta);

/// l_inf^k factorization through V : l_inf^m -> X with ||V|| = 1, through the adjoint.
struct LinfFactorization {
  Factorization dual;      ///< the l_1^k witness for V*
  Matrix A;                ///< l_inf^k -> l_inf^m
  Matrix B;                ///< X -> l_inf^k
  double norm_a = 0;
  double norm_b = 0;
  double residual = 0;
  double norm_product = 0;
  BoundReport report;
};

LinfFactorization factor_linf_dual(const LinOp& v, double delta);

struct Theorem8Result {
  Factorization fact;
  ExtractionResult extraction;
  Vector phi;  ///< mixed density (phi_p + phi_q) / 2
  double norm_t = 0;
  double c1p_lower = 0;
  double c1p_upper = 0;
  double c1q_upper = 0;
  double sigma = 0;
  double Delta = 0;
  double delta = 0;
  double min_item_mass = 0;  ///< min_i ||1_{F_i} T z_i||_1 / ||T||
};

Theorem8Result theorem8_pipeline(const LinOp& t, double p, double q, double tol = 1e-9);

}  // namespace densfact
