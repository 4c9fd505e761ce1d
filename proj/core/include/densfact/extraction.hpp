#pragma once

#include <optional>
#include <vector>

#include "densfact/linop.hpp"
#include "densfact/measure.hpp"

namespace densfact {

struct ExtractionConstants {
  double norm = 0;       ///< ||T : Z -> L_1|| before normalization
  double K = 0;          ///< certified lower bound on C_{1,p}(T) (normalized T)
  double K_upper = 0;    ///< solver upper value of C_{1,p}(T) (normalized T)
  double C = 0;          ///< ||T : Z -> L_p|| / K
  double kappa = 0;
  double eta = 0;        ///< (2C)^{-p*}
  double delta_cap = 0;  ///< (2^{1/p} / kappa)^{p*}
  double sigma = 0;      ///< 1 - q*/p*
  double p = 0;
  double q = 0;
};

struct ExtractionItem {
  Vector z;       ///< vertex of Ball(Z)
  AtomSet F;
  double lhs = 0;  ///< ||1_F T z||_1^sigma ||1_F T z||_q^{1-sigma} (normalized T)
  double mass = 0;  ///< mu(F)
};

struct ExtractionResult {
  std::vector<ExtractionItem> items;
  ExtractionConstants constants;
  double guaranteed_m = 0;  ///< (K / (2^{2+1/p} C))^{p*}
  double rhs = 0;           ///< 2^{-(1/p+1)} K

  std::size_t m() const noexcept { return items.size(); }
};

/// ||1_F g||_1^sigma ||1_F g||_q^{1-sigma}.
double sigma_product(const Fun& g, const AtomSet& f, double sigma, double q);

/// F = {|g| > gamma} \ E with gamma^{p-1} = kappa^p / 2.
AtomSet level_set_split(const Fun& g, const AtomSet& e, double p, double q, double kappa);

struct Witness {
  Vector z;
  double value = 0;  ///< ||1_{~E} T z||_p
};

/// Ball vertex maximizing ||1_{~E} T z||_p; alarms if the maximum is <= kappa.
Witness find_witness(const LinOp& t, const AtomSet& e, double p, double kappa);

ExtractionResult rosenthal_extract(const LinOp& t, double p, double q, double tol = 1e-9,
                                   std::optional<double> kappa_override = std::nullopt);

}  // namespace densfact
