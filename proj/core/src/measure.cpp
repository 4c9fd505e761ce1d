#include "densfact/measure.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "densfact/errors.hpp"

namespace densfact {

double conjugate(double t) {
  if (std::isinf(t) && t > 0) return 1.0;
  if (!(t > 1.0)) throw DomainError("conjugate: exponent must exceed 1, got " + std::to_string(t));
  return t / (t - 1.0);
}

MeasureSpace::MeasureSpace(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw DomainError("MeasureSpace: at least one atom required");
  for (Index a = 0; a < weights_.size(); ++a) {
    if (!(weights_(a) > 0.0) || !std::isfinite(weights_(a)))
      throw DomainError("MeasureSpace: atom " + std::to_string(a) + " has non-positive weight");
  }
  total_mass_ = weights_.sum();
  probability_ = std::abs(total_mass_ - 1.0) <= kProbabilityTol;
}

MeasureSpace::MeasureSpace(std::initializer_list<double> weights)
    : MeasureSpace(Vector::Map(weights.begin(), static_cast<Index>(weights.size()))) {}

MeasureSpace MeasureSpace::uniform_probability(std::size_t atoms) {
  return MeasureSpace(Vector::Constant(static_cast<Index>(atoms), 1.0 / static_cast<double>(atoms)));
}

MeasureSpace MeasureSpace::counting(std::size_t atoms) {
  return MeasureSpace(Vector::Ones(static_cast<Index>(atoms)));
}

bool MeasureSpace::operator==(const MeasureSpace& other) const {
  return weights_.size() == other.weights_.size() && weights_ == other.weights_;
}

AtomSet::AtomSet(std::initializer_list<std::size_t> members)
    : AtomSet(std::vector<std::size_t>(members)) {}

AtomSet::AtomSet(std::vector<std::size_t> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

AtomSet AtomSet::all(std::size_t atoms) {
  std::vector<std::size_t> m(atoms);
  for (std::size_t a = 0; a < atoms; ++a) m[a] = a;
  return AtomSet(std::move(m));
}

bool AtomSet::contains(std::size_t atom) const {
  return std::binary_search(members_.begin(), members_.end(), atom);
}

bool AtomSet::intersects(const AtomSet& other) const {
  auto i = members_.begin();
  auto j = other.members_.begin();
  while (i != members_.end() && j != other.members_.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

AtomSet AtomSet::unite(const AtomSet& other) const {
  std::vector<std::size_t> out;
  std::set_union(members_.begin(), members_.end(), other.members_.begin(),
                 other.members_.end(), std::back_inserter(out));
  AtomSet s;
  s.members_ = std::move(out);
  return s;
}

AtomSet AtomSet::minus(const AtomSet& other) const {
  std::vector<std::size_t> out;
  std::set_difference(members_.begin(), members_.end(), other.members_.begin(),
                      other.members_.end(), std::back_inserter(out));
  AtomSet s;
  s.members_ = std::move(out);
  return s;
}

AtomSet AtomSet::complement(std::size_t atoms) const { return all(atoms).minus(*this); }

double AtomSet::measure(const MeasureSpace& space) const {
  double total = 0.0;
  for (auto a : members_) {
    if (a >= space.atom_count()) throw ShapeError("AtomSet: atom index out of range");
    total += space.weight(a);
  }
  return total;
}

Vector AtomSet::indicator(std::size_t atoms) const {
  Vector v = Vector::Zero(static_cast<Index>(atoms));
  for (auto a : members_) {
    if (a >= atoms) throw ShapeError("AtomSet: atom index out of range");
    v(static_cast<Index>(a)) = 1.0;
  }
  return v;
}

bool pairwise_disjoint(const std::vector<AtomSet>& sets) {
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j)
      if (sets[i].intersects(sets[j])) return false;
  return true;
}

double lp_norm(const Vector& weights, const Vector& values, double r) {
  if (weights.size() != values.size()) throw ShapeError("lp_norm: length mismatch");
  if (!(r >= 1.0)) throw DomainError("lp_norm: exponent must be >= 1");
  if (std::isinf(r)) return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
  if (r == 1.0) return weights.dot(values.cwiseAbs());
  // Scale by the max to avoid overflow at large exponents.
  const double peak = values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  double s = 0.0;
  for (Index a = 0; a < values.size(); ++a) s += weights(a) * std::pow(std::abs(values(a)) / peak, r);
  return peak * std::pow(s, 1.0 / r);
}

Fun::Fun(MeasureSpace space, Vector values) : space_(std::move(space)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != space_.atom_count())
    throw ShapeError("Fun: value count does not match atom count");
}

Fun Fun::abs() const { return Fun(space_, values_.cwiseAbs()); }

Fun Fun::sgn() const {
  return Fun(space_, values_.unaryExpr([](double x) { return densfact::sgn(x); }));
}

Fun Fun::times(const Fun& other) const {
  if (!(space_ == other.space_)) throw ShapeError("Fun::times: different measure spaces");
  return Fun(space_, values_.cwiseProduct(other.values_));
}

Fun Fun::restricted(const AtomSet& set) const {
  return Fun(space_, values_.cwiseProduct(set.indicator(space_.atom_count())));
}

double Fun::integral() const { return space_.weights().dot(values_); }

double lp_norm(const Fun& f, double r) { return lp_norm(f.space().weights(), f.values(), r); }

}  // namespace densfact
