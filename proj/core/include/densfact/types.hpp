#pragma once

#include <cstddef>
#include <limits>

#include <Eigen/Dense>

namespace densfact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Numerical tolerances shared by every module.
inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kGapTol = 1e-8;
inline constexpr double kDensityFloor = 1e-12;
inline constexpr double kProbabilityTol = 1e-12;

// Enumeration guards.
inline constexpr Index kMaxSignCubeDim = 24;
inline constexpr Index kMaxFacetEnumerationDim = 6;

}  // namespace densfact
