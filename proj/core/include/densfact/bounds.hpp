#pragma once

#include <map>
#include <string>

namespace densfact {

/// Inputs and derived constants of one theorem, keyed by name.
struct ConstantLedger {
  std::string name;
  std::map<std::string, double> inputs;
  std::map<std::string, double> values;
  std::map<std::string, bool> flags;

  double value(const std::string& key) const;
  bool flag(const std::string& key) const;
  bool operator==(const ConstantLedger&) const = default;
};

struct GammaK {
  double gamma = 0;
  double k = 0;
  bool k_vacuous() const noexcept { return k < 1.0; }
};

struct Thm8Bounds {
  double sigma = 0;
  double Delta = 0;
  double delta = 0;  ///< (4 Delta)^{-1/sigma}, the per-item mass fraction
  double gamma_bound = 0;
  double k_bound = 0;
  double m_bound = 0;  ///< (C1p / (8 ||T||))^{p*}

  ConstantLedger ledger() const;
};

Thm8Bounds thm8_bounds(double norm_t, double c1p, double c1q, double p, double q);

/// Growth bounds from pi_r and pi_t; the second set uses c = pi_t / ||U|| and pi_1 <= N ||U||.
ConstantLedger cor9_cor10_bounds(double norm_u, double pi_r, double pi_t, double r, double t, double N);

/// gamma < 4 (2/((1-eps)c))^p (2/eps+1)^{n(p-1)} / ||T||,
/// k > 4^{p-2} ((1-eps)c/8)^{p p*} (2/eps+1)^{-n(p-1)}.
GammaK prop15_bounds(double n, double p, double eps, double c, double norm_t);
/// delta = (p-1)n: gamma < 5^delta / ||T||, k > 5^{-delta} 2^{n/delta}.
GammaK thm11_bounds(double n, double p, double norm_t = 1.0);

/// D = (2^8 C ||U||)^2, p* = n/D; flag "obvious_branch" when n < 2D.
ConstantLedger cor12a_bounds(double n, double C, double norm_u);
/// D = eta C^2 q C_q^2 ||U||^2; eta has no default.
ConstantLedger cor12b_bounds(double n, double C, double q, double cq, double norm_u, double eta);

/// gamma < 4 (2/((1-eps)c))^{t*} (2/eps+1)^{n/(t-1)} / ||U||,
/// k > 4^{t*-2} ((1-eps)c/8)^{t t*} (2/eps+1)^{-n/(t-1)}.
GammaK prop18_bounds(double n, double t, double eps, double c, double norm_u);
/// alpha = n/(t-1): gamma < 5^alpha / ||U||, k > 5^{-alpha} 2^{n/alpha}.
GammaK thm16_bounds(double n, double t, double norm_u = 1.0);

/// ln 2 ln(4/3) / ln 5.
double c1_constant();

struct Cor19Growth {
  double alpha = 0;
  double c1 = 0;
  double log_M = 0;
  double M = 0;
  double j_feasible = 0;  ///< min(5^{-alpha} 2^{n/alpha}, 3/4 exp(c1 n / alpha^2))
  bool no_guarantee = false;  ///< j_feasible <= 1

  ConstantLedger ledger() const;
};

Cor19Growth cor19_growth(double n, double t, double c);

/// g_{ij} >= g_i * 2 / (1 + 1/g_j), from lower bounds keyed by index.
double james_giesy_iterate(const std::map<long, double>& g, long i, long j);
/// A B^{m-1} with B = 2/(1 + 1/A): the bound on g_{j0^m} starting from g_{j0} = A.
double james_giesy_chain(double a, int m);

/// One admissible (A_1, A_2) pair with the four displayed constraints.
ConstantLedger cor20_constants(double a, double b, double n);

/// delta for given (B, gl, m).
ConstantLedger thm21_delta(double B, double gl, double m);

}  // namespace densfact
