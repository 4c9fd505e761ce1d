#pragma once

#include <optional>
#include <string_view>

#include "densfact/measure.hpp"
#include "densfact/types.hpp"

namespace densfact {

enum class BallKind {
  kVertexList,     ///< conv of a symmetric vertex list
  kSignCube,       ///< l_inf^d
  kCrossPolytope,  ///< l_1^d
  kEuclidean,      ///< l_2^d
  kQuotient,       ///< L_1(mu) / K, coordinates c = Q^T x for an orthonormal Q spanning K^perp
  kInducedL1,      ///< span of columns of R inside L_1(mu), norm ||R c||_{L_1(mu)}
};

std::string_view to_string(BallKind kind) noexcept;

/// Finite-dimensional real normed space given by an explicit unit ball.
class NormedSpace {
 public:
  /// Columns are the vertices; the list must be symmetric and spanning.
  static NormedSpace vertex_list(const Matrix& vertices);
  /// Columns are one representative of each +/- pair.
  static NormedSpace vertex_pairs(const Matrix& representatives);
  static NormedSpace sign_cube(Index d);
  static NormedSpace cross_polytope(Index d);
  static NormedSpace euclidean(Index d);
  /// L_1(ambient) / K where K = (range of `complement`)^perp; `complement`
  /// needs orthonormal columns. An element c is the class of complement * c.
  static NormedSpace quotient(const MeasureSpace& ambient, const Matrix& complement);
  /// Subspace of L_1(ambient) spanned by the columns of `basis`.
  static NormedSpace induced_l1(const MeasureSpace& ambient, const Matrix& basis);

  Index dim() const noexcept { return dim_; }
  BallKind kind() const noexcept { return kind_; }

  double norm(const Vector& x) const;
  /// sup { f.x : norm(x) <= 1 }.
  double dual_norm(const Vector& f) const;

  /// True when the unit ball is the convex hull of an explicit finite list.
  bool vertex_enumerable() const noexcept;
  /// One representative per +/- vertex pair, as columns. Throws CapacityError
  /// when the ball is not enumerable (or the sign cube exceeds the guard).
  Matrix vertex_pairs() const;
  /// All vertices (both signs) as columns.
  Matrix vertices() const;

  /// The dual space. Vertex lists go through facet enumeration (dim <= 6).
  NormedSpace dual() const;

  /// A norming functional: f with dual_norm(f) = 1 and f.x = norm(x).
  Vector norming_functional(const Vector& x) const;

  const Matrix& generators() const noexcept { return generators_; }
  const std::optional<MeasureSpace>& ambient() const noexcept { return ambient_; }

  bool operator==(const NormedSpace& other) const;

 private:
  NormedSpace(BallKind kind, Index dim) : kind_(kind), dim_(dim) {}

  BallKind kind_;
  Index dim_;
  // VertexList: pair representatives (dim x P). Quotient: orthonormal Q (d x dim).
  // InducedL1: basis R (atoms x dim).
  Matrix generators_;
  std::optional<MeasureSpace> ambient_;
};

/// Facet normals of conv{+/- columns of pairs}: the vertices of the polar body,
/// one per +/- pair. Throws CapacityError beyond the dimension guard.
Matrix polar_vertex_pairs(const Matrix& pairs);

}  // namespace densfact
