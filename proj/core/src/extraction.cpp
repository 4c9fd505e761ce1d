#include "densfact/extraction.hpp"

#include <algorithm>
#include <cmath>

#include "densfact/density.hpp"
#include "densfact/errors.hpp"

namespace densfact {

namespace {

double sigma_of(double p, double q) { return 1.0 - conjugate(q) / conjugate(p); }

void check_exponents(double p, double q) {
  if (!(p > 1.0) || std::isinf(p) || !(q > p)) throw DomainError("need 1 < p < q <= inf");
}

}  // namespace

double sigma_product(const Fun& g, const AtomSet& f, double sigma, double q) {
  const Fun r = g.restricted(f);
  const double l1 = lp_norm(r, 1.0);
  const double lq = lp_norm(r, q);
  if (l1 == 0.0) return 0.0;
  return std::pow(l1, sigma) * std::pow(lq, 1.0 - sigma);
}

AtomSet level_set_split(const Fun& g, const AtomSet& e, double p, double q, double kappa) {
  check_exponents(p, q);
  if (!(kappa > 0.0)) throw DomainError("level_set_split: kappa must be positive");
  const MeasureSpace& space = g.space();
  if (lp_norm(g, 1.0) > 1.0 + 1e-12) throw DomainError("level_set_split: rescale g to ||g||_1 <= 1 first");
  const AtomSet outside = e.complement(space.atom_count());
  if (!(lp_norm(g.restricted(outside), p) > kappa))
    throw HypothesisError("level_set_split: ||1_{~E} g||_p must exceed kappa");

  const double gamma = std::pow(0.5 * std::pow(kappa, p), 1.0 / (p - 1.0));
  std::vector<std::size_t> members;
  for (std::size_t a : outside.members())
    if (std::abs(g(a)) > gamma) members.push_back(a);
  AtomSet f(std::move(members));

  const double cap = std::pow(std::pow(2.0, 1.0 / p) / kappa, conjugate(p));
  const double product = sigma_product(g, f, sigma_of(p, q), q);
  if (f.intersects(e) || !(f.measure(space) < cap) ||
      product < std::pow(2.0, -1.0 / p) * kappa - 1e-9)
    throw InternalAlarm("level_set_split: level set misses the guaranteed bounds");
  return f;
}

Witness find_witness(const LinOp& t, const AtomSet& e, double p, double kappa) {
  const MeasureSpace& space = t.measure();
  if (t.matrix().cwiseAbs().maxCoeff() == 0.0)
    throw HypothesisError("find_witness: T = 0 admits no positive kappa");
  const Vector outside = e.complement(space.atom_count()).indicator(space.atom_count());
  const Matrix v = t.domain().vertex_pairs();
  const Matrix img = t.matrix() * v;
  Witness best{v.col(0), -1.0};
  for (Index j = 0; j < v.cols(); ++j) {
    const double val = lp_norm(space.weights(), img.col(j).cwiseProduct(outside), p);
    if (val > best.value) best = {v.col(j), val};
  }
  if (!(best.value > kappa))
    throw InternalAlarm("find_witness: no vertex exceeds kappa although the hypothesis holds");
  return best;
}

ExtractionResult rosenthal_extract(const LinOp& t, double p, double q, double tol,
                                   std::optional<double> kappa_override) {
  check_exponents(p, q);
  const MeasureSpace& space = t.measure();
  if (!space.is_probability()) throw DomainError("rosenthal_extract: measure must be a probability");
  const double norm = op_norm(t, 1.0).value;
  if (!(norm > 0.0)) throw DomainError("rosenthal_extract: T = 0");
  const LinOp tn = t.scaled(1.0 / norm).with_exponent(1.0);

  const DensityCertificate cert = solve_c1q(tn, p, tol);
  ExtractionResult out;
  ExtractionConstants& c = out.constants;
  c.norm = norm;
  c.p = p;
  c.q = q;
  c.sigma = sigma_of(p, q);
  c.K = cert.lower;
  c.K_upper = cert.upper;
  c.C = op_norm(tn, p).value / c.K;
  c.kappa = kappa_override.value_or(0.5 * c.K);
  if (!(c.kappa > 0.0) || !(c.kappa < c.K)) throw DomainError("rosenthal_extract: need 0 < kappa < K");
  const double ps = conjugate(p);
  c.eta = std::pow(2.0 * c.C, -ps);
  c.delta_cap = std::pow(std::pow(2.0, 1.0 / p) / c.kappa, ps);
  out.guaranteed_m = std::pow(c.K / (std::pow(2.0, 2.0 + 1.0 / p) * c.C), ps);
  out.rhs = std::pow(2.0, -(1.0 / p + 1.0)) * c.K;

  // The witness step needs C eta^{1/p*} <= 1 - kappa / K; an override may break it.
  const bool hypothesis = c.C * std::pow(c.eta, 1.0 / ps) <= 1.0 - c.kappa / c.K + 1e-12;

  AtomSet used;
  while (used.measure(space) <= c.eta) {
    Witness w;
    try {
      w = find_witness(tn, used, p, c.kappa);
    } catch (const InternalAlarm&) {
      if (hypothesis) throw;
      break;
    }
    const Fun g(space, tn.apply(w.z));
    const AtomSet f = level_set_split(g, used, p, q, c.kappa);
    ExtractionItem item{w.z, f, sigma_product(g, f, c.sigma, q), f.measure(space)};
    if (item.lhs < out.rhs - 1e-9) throw InternalAlarm("rosenthal_extract: sigma-product bound fails");
    used = used.unite(f);
    out.items.push_back(std::move(item));
  }
  if (out.items.empty()) throw InternalAlarm("rosenthal_extract: no item extracted");
  return out;
}

}  // namespace densfact
