#pragma once

#include <cmath>
#include <string>

#include "runner.hpp"

namespace densfact::runner {

using Stage = std::string;

struct TrialData {
  std::string metric_name;
  double metric = std::nan("");
  json ledgers = json::array();
  json achieved = json::object();
  json guaranteed = json::object();
  json checks = json::object();
  json witness = json::object();
};

/// Non-finite values become the strings "inf", "-inf", "nan".
json jnum(double v);
double jget(const json& v);

/// {theorem, params, ledger}: enough to recompute the ledger.
json ledger_entry(const std::string& theorem, const std::map<std::string, double>& params);

/// max_a ||P e_a||_{L_1(mu)} / mu_a.
double l1_projection_norm(const Matrix& p, const MeasureSpace& mu);

/// Shared candidate directions inside Ball(span of Rademachers), normalized in L_1(mu).
Matrix rademacher_candidates(const Matrix& r, const MeasureSpace& mu);

}  // namespace densfact::runner
