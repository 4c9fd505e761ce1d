#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "densfact/types.hpp"

namespace densfact {

/// Conjugate exponent t/(t-1); conjugate(inf) = 1. Throws DomainError for t <= 1.
double conjugate(double t);

/// Finite atomic measure space with strictly positive atom weights.
class MeasureSpace {
 public:
  explicit MeasureSpace(Vector weights);
  MeasureSpace(std::initializer_list<double> weights);

  static MeasureSpace uniform_probability(std::size_t atoms);
  static MeasureSpace counting(std::size_t atoms);

  std::size_t atom_count() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double weight(std::size_t atom) const { return weights_(static_cast<Index>(atom)); }
  const Vector& weights() const noexcept { return weights_; }
  double total_mass() const noexcept { return total_mass_; }
  bool is_probability() const noexcept { return probability_; }

  bool operator==(const MeasureSpace& other) const;

 private:
  Vector weights_;
  double total_mass_ = 0.0;
  bool probability_ = false;
};

/// Sorted set of atom indices.
class AtomSet {
 public:
  AtomSet() = default;
  AtomSet(std::initializer_list<std::size_t> members);
  explicit AtomSet(std::vector<std::size_t> members);

  static AtomSet all(std::size_t atoms);

  const std::vector<std::size_t>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(std::size_t atom) const;
  bool intersects(const AtomSet& other) const;

  AtomSet unite(const AtomSet& other) const;
  AtomSet minus(const AtomSet& other) const;
  AtomSet complement(std::size_t atoms) const;

  /// Measure of the set; throws ShapeError if an index is out of range.
  double measure(const MeasureSpace& space) const;
  /// 0/1 indicator vector of length `atoms`.
  Vector indicator(std::size_t atoms) const;

  bool operator==(const AtomSet&) const = default;

 private:
  std::vector<std::size_t> members_;
};

bool pairwise_disjoint(const std::vector<AtomSet>& sets);

/// (sum_a w_a |f_a|^r)^{1/r}, or max_a |f_a| for r = inf.
double lp_norm(const Vector& weights, const Vector& values, double r);

/// Real function on a MeasureSpace.
class Fun {
 public:
  Fun(MeasureSpace space, Vector values);

  const MeasureSpace& space() const noexcept { return space_; }
  const Vector& values() const noexcept { return values_; }
  double operator()(std::size_t atom) const { return values_(static_cast<Index>(atom)); }

  Fun abs() const;
  /// Pointwise sign with sgn(0) = 0.
  Fun sgn() const;
  Fun times(const Fun& other) const;
  /// 1_S f.
  Fun restricted(const AtomSet& set) const;
  double integral() const;

 private:
  MeasureSpace space_;
  Vector values_;
};

double lp_norm(const Fun& f, double r);

inline double sgn(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace densfact
