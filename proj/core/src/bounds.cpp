#include "densfact/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "densfact/errors.hpp"
#include "densfact/measure.hpp"

namespace densfact {

namespace {

const double kLn2 = std::log(2.0);
const double kLn5 = std::log(5.0);

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

double ConstantLedger::value(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw DomainError("ledger " + name + ": no value '" + key + "'");
  return it->second;
}

bool ConstantLedger::flag(const std::string& key) const {
  const auto it = flags.find(key);
  if (it == flags.end()) throw DomainError("ledger " + name + ": no flag '" + key + "'");
  return it->second;
}

Thm8Bounds thm8_bounds(double norm_t, double c1p, double c1q, double p, double q) {
  require(p > 1.0 && q > p && !std::isinf(p), "thm8_bounds: need 1 < p < q <= inf");
  require(norm_t > 0.0 && c1p > 0.0, "thm8_bounds: need ||T|| > 0 and C1p > 0");
  require(c1p <= c1q * (1.0 + 1e-9), "thm8_bounds: need C1p <= C1q");
  Thm8Bounds b;
  b.sigma = 1.0 - conjugate(q) / conjugate(p);
  const double log_delta = b.sigma * std::log(norm_t) + (1.0 - b.sigma) * std::log(c1q) - std::log(c1p);
  b.Delta = std::exp(log_delta);
  const double log4d = std::log(4.0) + log_delta;
  b.delta = std::exp(-log4d / b.sigma);
  b.gamma_bound = 2.0 * std::exp(log4d / b.sigma) / norm_t;
  b.m_bound = std::exp(conjugate(p) * std::log(c1p / (8.0 * norm_t)));
  b.k_bound = 0.125 * b.delta * b.m_bound;
  return b;
}

ConstantLedger Thm8Bounds::ledger() const {
  ConstantLedger l;
  l.name = "theorem8";
  l.values = {{"sigma", sigma}, {"Delta", Delta}, {"delta", delta},
              {"gamma_bound", gamma_bound}, {"k_bound", k_bound}, {"m_bound", m_bound}};
  l.flags["k_vacuous"] = k_bound < 1.0;
  return l;
}

ConstantLedger cor9_cor10_bounds(double norm_u, double pi_r, double pi_t, double r, double t, double N) {
  require(r >= 1.0 && t > r && !std::isinf(t), "cor9_cor10_bounds: need 1 <= r < t < inf");
  require(norm_u > 0.0 && pi_r > 0.0 && pi_t > 0.0 && N >= 1.0, "cor9_cor10_bounds: positive inputs");
  ConstantLedger l;
  l.name = "corollary9_10";
  l.inputs = {{"norm_u", norm_u}, {"pi_r", pi_r}, {"pi_t", pi_t}, {"r", r}, {"t", t}, {"N", N}};

  auto cor9 = [&](double rr, double pr, double& sigma, double& delta, double& gamma, double& k) {
    sigma = 1.0 - rr / t;
    delta = std::pow(norm_u, sigma) * std::pow(pr, 1.0 - sigma) / pi_t;
    const double e = std::pow(4.0 * delta, 1.0 / sigma);
    gamma = 2.0 * e / norm_u;
    k = 0.125 / e * std::pow(pi_t / (8.0 * norm_u), t);
  };
  double sigma, delta, g9, k9;
  cor9(r, pi_r, sigma, delta, g9, k9);
  double s1, d1, g9r1, k9r1;
  cor9(1.0, N * norm_u, s1, d1, g9r1, k9r1);

  const double c = pi_t / norm_u;
  const double ts = conjugate(t);
  l.values = {{"sigma", sigma},
              {"Delta", delta},
              {"gamma9", g9},
              {"k9", k9},
              {"gamma9_r1", g9r1},
              {"k9_r1", k9r1},
              {"c", c},
              {"t_star", ts},
              {"gamma10", 2.0 * std::pow(4.0 / c, ts) * std::pow(N, ts - 1.0) / norm_u},
              {"k10", std::pow(2.0, ts - 3.0) * std::pow(c / 8.0, ts + t) * std::pow(N, 1.0 - ts)}};
  l.flags["k9_vacuous"] = k9 < 1.0;
  l.flags["k10_vacuous"] = l.values["k10"] < 1.0;
  return l;
}

GammaK prop15_bounds(double n, double p, double eps, double c, double norm_t) {
  require(n >= 1.0 && p > 1.0 && !std::isinf(p), "prop15_bounds: need n >= 1, 1 < p < inf");
  require(eps > 0.0 && eps < 1.0 && c > 0.0 && norm_t > 0.0, "prop15_bounds: need eps in (0,1), c, ||T|| > 0");
  const double lnet = n * (p - 1.0) * std::log(2.0 / eps + 1.0);
  GammaK g;
  g.gamma = 4.0 * std::exp(p * std::log(2.0 / ((1.0 - eps) * c)) + lnet) / norm_t;
  g.k = std::exp((p - 2.0) * std::log(4.0) + p * conjugate(p) * std::log((1.0 - eps) * c / 8.0) - lnet);
  return g;
}

GammaK thm11_bounds(double n, double p, double norm_t) {
  require(n >= 1.0 && p > 1.0 && !std::isinf(p) && norm_t > 0.0, "thm11_bounds: need n >= 1, 1 < p < inf");
  const double delta = (p - 1.0) * n;
  return {std::exp(delta * kLn5) / norm_t, std::exp(-delta * kLn5 + n / delta * kLn2)};
}

ConstantLedger cor12a_bounds(double n, double C, double norm_u) {
  require(n >= 1.0 && C > 0.0 && norm_u > 0.0, "cor12a_bounds: need n >= 1, C > 0, ||U|| > 0");
  ConstantLedger l;
  l.name = "corollary12A";
  l.inputs = {{"n", n}, {"C", C}, {"norm_u", norm_u}};
  const double D = std::pow(256.0 * C * norm_u, 2.0);
  l.values["D"] = D;
  l.values["premise"] = 0.125 / C * std::sqrt(D);
  l.values["premise_target"] = 32.0 * norm_u;
  l.flags["obvious_branch"] = n < 2.0 * D;
  if (n < 2.0 * D) return l;
  const double ps = n / D;
  const double p = conjugate(ps);
  const double delta = (p - 1.0) * n;
  l.values["p_star"] = ps;
  l.values["p"] = p;
  l.values["delta"] = delta;
  l.values["log_gamma"] = 2.0 * D * kLn5;
  l.values["log_k"] = -2.0 * D * kLn5 + n / (2.0 * D) * kLn2;
  l.values["log_gamma_thm11"] = delta * kLn5;
  l.values["log_k_thm11"] = -delta * kLn5 + n / delta * kLn2;
  l.values["gamma"] = std::exp(l.values["log_gamma"]);
  l.values["k"] = std::exp(l.values["log_k"]);
  l.flags["k_vacuous"] = l.values["log_k"] < 0.0;
  return l;
}

ConstantLedger cor12b_bounds(double n, double C, double q, double cq, double norm_u, double eta) {
  require(n >= 1.0 && C > 0.0 && q >= 2.0 && cq > 0.0 && norm_u > 0.0 && eta > 0.0,
          "cor12b_bounds: need n >= 1, q >= 2 and positive C, C_q, ||U||, eta");
  ConstantLedger l;
  l.name = "corollary12B";
  l.inputs = {{"n", n}, {"C", C}, {"q", q}, {"C_q", cq}, {"norm_u", norm_u}, {"eta", eta}};
  const double D = eta * C * C * q * cq * cq * norm_u * norm_u;
  l.values["D"] = D;
  l.values["log_gamma"] = D * kLn5;
  l.values["log_k"] = -D * kLn5 + n / D * kLn2;
  l.values["gamma"] = std::exp(l.values["log_gamma"]);
  l.values["k"] = std::exp(l.values["log_k"]);
  l.flags["k_vacuous"] = l.values["log_k"] < 0.0;
  return l;
}

GammaK prop18_bounds(double n, double t, double eps, double c, double norm_u) {
  require(n >= 1.0 && t > 1.0 && !std::isinf(t), "prop18_bounds: need n >= 1, 1 < t < inf");
  require(eps > 0.0 && eps < 1.0 && c > 0.0 && norm_u > 0.0, "prop18_bounds: need eps in (0,1), c, ||U|| > 0");
  const double ts = conjugate(t);
  const double lnet = n / (t - 1.0) * std::log(2.0 / eps + 1.0);
  GammaK g;
  g.gamma = 4.0 * std::exp(ts * std::log(2.0 / ((1.0 - eps) * c)) + lnet) / norm_u;
  g.k = std::exp((ts - 2.0) * std::log(4.0) + t * ts * std::log((1.0 - eps) * c / 8.0) - lnet);
  return g;
}

GammaK thm16_bounds(double n, double t, double norm_u) {
  require(n >= 1.0 && t > 1.0 && !std::isinf(t) && norm_u > 0.0, "thm16_bounds: need n >= 1, 1 < t < inf");
  const double alpha = n / (t - 1.0);
  return {std::exp(alpha * kLn5) / norm_u, std::exp(-alpha * kLn5 + n / alpha * kLn2)};
}

double c1_constant() { return kLn2 * std::log(4.0 / 3.0) / kLn5; }

Cor19Growth cor19_growth(double n, double t, double c) {
  require(c >= 32.0, "cor19_growth: need c >= 2^5");
  require(t > 1.0 && !std::isinf(t) && n >= 1.0, "cor19_growth: need t > 1, n >= 1");
  Cor19Growth g;
  g.alpha = n / (t - 1.0);
  g.c1 = c1_constant();
  const double ratio = n / (g.alpha * g.alpha);
  g.log_M = std::log(4.0 / 3.0) * (kLn2 / kLn5 * ratio - 1.0);
  g.M = std::exp(g.log_M);
  g.j_feasible = std::min(std::exp(-g.alpha * kLn5 + n / g.alpha * kLn2), 0.75 * std::exp(g.c1 * ratio));
  g.no_guarantee = g.j_feasible <= 1.0;
  return g;
}

ConstantLedger Cor19Growth::ledger() const {
  ConstantLedger l;
  l.name = "corollary19";
  l.values = {{"alpha", alpha}, {"c1", c1}, {"log_M", log_M}, {"M", M}, {"j_feasible", j_feasible}};
  l.flags["no_guarantee"] = no_guarantee;
  return l;
}

double james_giesy_iterate(const std::map<long, double>& g, long i, long j) {
  const auto gi = g.find(i);
  const auto gj = g.find(j);
  if (gi == g.end() || gj == g.end()) throw DomainError("james_giesy_iterate: missing g value");
  require(gi->second >= 1.0 && gj->second >= 1.0, "james_giesy_iterate: g values must be >= 1");
  return gi->second * 2.0 / (1.0 + 1.0 / gj->second);
}

double james_giesy_chain(double a, int m) {
  require(a >= 1.0 && m >= 1, "james_giesy_chain: need A >= 1, m >= 1");
  const double b = 2.0 / (1.0 + 1.0 / a);
  return a * std::pow(b, m - 1);
}

ConstantLedger cor20_constants(double a, double b, double n) {
  require(a >= 1.0 && b > 0.0 && b <= 1.0 && n >= 2.0, "cor20_constants: need a >= 1 >= b > 0, n >= 2");
  ConstantLedger l;
  l.name = "corollary20";
  l.inputs = {{"a", a}, {"b", b}, {"n", n}};
  const double r2 = (a / b) * (a / b);
  const double r4inv = 1.0 / (r2 * r2);
  const double threshold = std::pow(32.0 * a / b, 4.0);
  const bool large = n >= threshold;
  l.values["threshold"] = threshold;
  l.flags["large_branch"] = large;
  l.flags["two_dimensional_G"] = !large;

  // Small-n constraints: b >= A1^{-(a/b)^2}, 2 >= A2^{(2^5)^4}.
  // The constants must exceed 1; b = 1 leaves A1 free, so take A1 = 2.
  double log_a1 = b < 1.0 ? -std::log(b) / r2 : kLn2;
  double log_a2 = kLn2 / std::pow(32.0, 4.0);
  if (large) {
    const double t = (b / (32.0 * a)) * (b / (32.0 * a)) * n;
    const double alpha = n / (t - 1.0);
    const double j_proof = 0.75 * std::exp(c1_constant() * n / (alpha * alpha)) - 1.0;
    // Any 2-dimensional subspace of E is also admissible once the small-n
    // constraint on A1 holds.
    const double j = std::max(2.0, j_proof);
    l.values["t"] = t;
    l.values["alpha"] = alpha;
    l.values["j_proof"] = j_proof;
    l.values["j"] = j;
    l.flags["two_dimensional_fallback"] = j_proof < 2.0;
    log_a1 = std::max(log_a1, alpha * kLn5 / r2);
    log_a2 = std::min(log_a2, std::log(j) / (r4inv * n));
    l.values["slack_large_A1"] = log_a1 * r2 - alpha * kLn5;
    l.values["slack_large_A2"] = std::log(j) - r4inv * n * log_a2;
  }
  l.values["log_A1"] = log_a1;
  l.values["log_A2"] = log_a2;
  l.values["A1"] = std::exp(log_a1);
  l.values["A2"] = std::exp(log_a2);
  l.values["slack_small_A1"] = std::log(b) + r2 * log_a1;
  l.values["slack_small_A2"] = kLn2 - std::pow(32.0, 4.0) * log_a2;
  l.flags["feasible"] = log_a1 > 0.0 && log_a2 > 0.0;
  return l;
}

ConstantLedger thm21_delta(double B, double gl, double m) {
  require(B >= 1.0 && gl >= 1.0 && m >= 2.0, "thm21_delta: need B >= 1, gl >= 1, m >= 2");
  ConstantLedger l;
  l.name = "theorem21";
  l.inputs = {{"B", B}, {"gl", gl}, {"m", m}};
  const double threshold = 2.0 * std::pow(32.0 * B * gl, 4.0);
  l.values["threshold"] = threshold;
  const bool small = m <= threshold;
  l.flags["small_m_branch"] = small;
  if (small) {
    l.values["delta"] = 0.25 * std::pow(32.0 * B, -4.0);
    return l;
  }
  const double n = std::floor(m / 2.0);
  const double t = n / std::pow(32.0 * B * gl, 2.0);
  const double alpha = n / (t - 1.0);
  const double log_k = std::min(-alpha * kLn5 + n / alpha * kLn2,
                                std::log(0.75) + c1_constant() * n / (alpha * alpha));
  l.values["n"] = n;
  l.values["t"] = t;
  l.values["alpha"] = alpha;
  l.values["log_k"] = log_k;
  l.values["delta"] = log_k * std::pow(gl, 4.0) / m;
  l.flags["vacuous"] = log_k <= 0.0;
  return l;
}

}  // namespace densfact
