#include "densfact/normed_space.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "densfact/convex_ops.hpp"
#include "densfact/errors.hpp"
#include "densfact/lp.hpp"

namespace densfact {

namespace {

constexpr double kVertexTol = 1e-12;
constexpr Index kMaxMaterializedVertices = Index{1} << 20;
constexpr double kMaxPolarSolves = 4e6;

Index matrix_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-10);
  return lu.rank();
}

// Removes zero columns and duplicate +/- pairs; keeps first occurrence.
Matrix dedupe_pairs(const Matrix& cols) {
  std::vector<Index> keep;
  for (Index j = 0; j < cols.cols(); ++j) {
    const double scale = cols.col(j).cwiseAbs().maxCoeff();
    if (scale <= kVertexTol) continue;
    bool dup = false;
    for (Index k : keep) {
      const double tol = 1e-12 * std::max(1.0, scale);
      if ((cols.col(j) - cols.col(k)).cwiseAbs().maxCoeff() <= tol ||
          (cols.col(j) + cols.col(k)).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(j);
  }
  Matrix out(cols.rows(), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Index>(i)) = cols.col(keep[i]);
  return out;
}

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

std::string_view to_string(BallKind kind) noexcept {
  switch (kind) {
    case BallKind::kVertexList: return "vertex-list";
    case BallKind::kSignCube: return "sign-cube";
    case BallKind::kCrossPolytope: return "cross-polytope";
    case BallKind::kEuclidean: return "euclidean";
    case BallKind::kQuotient: return "quotient";
    case BallKind::kInducedL1: return "induced-l1";
  }
  return "unknown";
}

NormedSpace NormedSpace::vertex_list(const Matrix& vertices) {
  for (Index j = 0; j < vertices.cols(); ++j) {
    const double tol = 1e-12 * std::max(1.0, vertices.col(j).cwiseAbs().maxCoeff());
    bool found = false;
    for (Index k = 0; k < vertices.cols() && !found; ++k)
      found = (vertices.col(j) + vertices.col(k)).cwiseAbs().maxCoeff() <= tol;
    if (!found) throw DomainError("vertex_list: vertex list is not symmetric");
  }
  return vertex_pairs(vertices);
}

NormedSpace NormedSpace::vertex_pairs(const Matrix& representatives) {
  if (representatives.rows() == 0) throw ShapeError("vertex_pairs: zero-dimensional space");
  NormedSpace s(BallKind::kVertexList, representatives.rows());
  s.generators_ = dedupe_pairs(representatives);
  if (matrix_rank(s.generators_) < s.dim_) throw DomainError("vertex_pairs: vertices do not span");
  return s;
}

NormedSpace NormedSpace::sign_cube(Index d) {
  if (d <= 0) throw ShapeError("sign_cube: dimension must be positive");
  return NormedSpace(BallKind::kSignCube, d);
}

NormedSpace NormedSpace::cross_polytope(Index d) {
  if (d <= 0) throw ShapeError("cross_polytope: dimension must be positive");
  return NormedSpace(BallKind::kCrossPolytope, d);
}

NormedSpace NormedSpace::euclidean(Index d) {
  if (d <= 0) throw ShapeError("euclidean: dimension must be positive");
  return NormedSpace(BallKind::kEuclidean, d);
}

NormedSpace NormedSpace::quotient(const MeasureSpace& ambient, const Matrix& complement) {
  if (complement.rows() != static_cast<Index>(ambient.atom_count()) || complement.cols() == 0)
    throw ShapeError("quotient: complement must be atoms x dim with dim >= 1");
  const Matrix gram = complement.transpose() * complement;
  if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-9)
    throw DomainError("quotient: complement columns must be orthonormal");
  NormedSpace s(BallKind::kQuotient, complement.cols());
  s.generators_ = complement;
  s.ambient_ = ambient;
  return s;
}

NormedSpace NormedSpace::induced_l1(const MeasureSpace& ambient, const Matrix& basis) {
  if (basis.rows() != static_cast<Index>(ambient.atom_count()) || basis.cols() == 0)
    throw ShapeError("induced_l1: basis must be atoms x dim with dim >= 1");
  if (matrix_rank(basis) < basis.cols()) throw DomainError("induced_l1: basis is not independent");
  NormedSpace s(BallKind::kInducedL1, basis.cols());
  s.generators_ = basis;
  s.ambient_ = ambient;
  return s;
}

double NormedSpace::norm(const Vector& x) const {
  if (x.size() != dim_) throw ShapeError("norm: vector length does not match dimension");
  switch (kind_) {
    case BallKind::kSignCube: return x.cwiseAbs().maxCoeff();
    case BallKind::kCrossPolytope: return x.cwiseAbs().sum();
    case BallKind::kEuclidean: return x.norm();
    case BallKind::kVertexList:
      return weighted_l1_min_norm(generators_, Vector::Ones(generators_.cols()), x).norm;
    case BallKind::kQuotient:
      return weighted_l1_min_norm(generators_.transpose(), ambient_->weights(), x).norm;
    case BallKind::kInducedL1:
      return ambient_->weights().dot((generators_ * x).cwiseAbs());
  }
  return 0.0;
}

double NormedSpace::dual_norm(const Vector& f) const {
  if (f.size() != dim_) throw ShapeError("dual_norm: vector length does not match dimension");
  switch (kind_) {
    case BallKind::kSignCube: return f.cwiseAbs().sum();
    case BallKind::kCrossPolytope: return f.cwiseAbs().maxCoeff();
    case BallKind::kEuclidean: return f.norm();
    case BallKind::kVertexList: return (generators_.transpose() * f).cwiseAbs().maxCoeff();
    case BallKind::kQuotient:
      return ((generators_ * f).cwiseAbs().array() / ambient_->weights().array()).maxCoeff();
    case BallKind::kInducedL1: {
      // min t  s.t.  R^T diag(mu) s = f,  |s_a| <= t.
      const Index atoms = generators_.rows();
      if (f.cwiseAbs().maxCoeff() == 0.0) return 0.0;
      LinearProgram lp(atoms + 1);
      for (Index a = 0; a < atoms; ++a) lp.set_free(a);
      lp.objective(atoms) = 1.0;
      lp.eq_matrix.resize(dim_, atoms + 1);
      lp.eq_matrix.leftCols(atoms) = generators_.transpose() * ambient_->weights().asDiagonal();
      lp.eq_matrix.col(atoms).setZero();
      lp.eq_rhs = f;
      lp.ub_matrix = Matrix::Zero(2 * atoms, atoms + 1);
      lp.ub_rhs = Vector::Zero(2 * atoms);
      for (Index a = 0; a < atoms; ++a) {
        lp.ub_matrix(a, a) = 1.0;
        lp.ub_matrix(a, atoms) = -1.0;
        lp.ub_matrix(atoms + a, a) = -1.0;
        lp.ub_matrix(atoms + a, atoms) = -1.0;
      }
      return solve_lp_checked(lp, "induced_l1 dual norm").value;
    }
  }
  return 0.0;
}

bool NormedSpace::vertex_enumerable() const noexcept {
  switch (kind_) {
    case BallKind::kVertexList:
    case BallKind::kCrossPolytope:
    case BallKind::kQuotient: return true;
    case BallKind::kSignCube: return dim_ <= kMaxSignCubeDim;
    default: return false;
  }
}

Matrix NormedSpace::vertex_pairs() const {
  switch (kind_) {
    case BallKind::kVertexList: return generators_;
    case BallKind::kCrossPolytope: return Matrix::Identity(dim_, dim_);
    case BallKind::kQuotient: {
      Matrix v = generators_.transpose();
      for (Index a = 0; a < v.cols(); ++a) v.col(a) /= ambient_->weight(static_cast<std::size_t>(a));
      return dedupe_pairs(v);
    }
    case BallKind::kSignCube: {
      if (dim_ > kMaxSignCubeDim) throw CapacityError("sign cube enumeration limited to dimension 24");
      const Index count = Index{1} << (dim_ - 1);
      if (count > kMaxMaterializedVertices)
        throw CapacityError("sign cube too large to materialize; enumerate on the fly");
      Matrix v(dim_, count);
      for (Index s = 0; s < count; ++s) {
        v(0, s) = 1.0;
        for (Index i = 1; i < dim_; ++i) v(i, s) = ((s >> (i - 1)) & 1) ? -1.0 : 1.0;
      }
      return v;
    }
    default:
      throw CapacityError(std::string("unit ball of kind ") + std::string(to_string(kind_)) +
                          " has no finite vertex list");
  }
}

Matrix NormedSpace::vertices() const {
  const Matrix p = vertex_pairs();
  Matrix v(p.rows(), 2 * p.cols());
  v << p, -p;
  return v;
}

NormedSpace NormedSpace::dual() const {
  switch (kind_) {
    case BallKind::kSignCube: return cross_polytope(dim_);
    case BallKind::kCrossPolytope: return sign_cube(dim_);
    case BallKind::kEuclidean: return euclidean(dim_);
    case BallKind::kVertexList:
    case BallKind::kQuotient: return vertex_pairs(polar_vertex_pairs(vertex_pairs()));
    case BallKind::kInducedL1: {
      const Index atoms = generators_.rows();
      if (atoms > kMaxSignCubeDim) throw CapacityError("induced_l1 dual: too many atoms");
      const Matrix signs = sign_cube(atoms).vertex_pairs();
      return vertex_pairs(generators_.transpose() * ambient_->weights().asDiagonal() * signs);
    }
  }
  throw InternalAlarm("dual: unknown ball kind");
}

Vector NormedSpace::norming_functional(const Vector& x) const {
  if (x.size() != dim_) throw ShapeError("norming_functional: length mismatch");
  Vector f = Vector::Zero(dim_);
  if (x.cwiseAbs().maxCoeff() == 0.0) return f;
  switch (kind_) {
    case BallKind::kSignCube: {
      Index i = 0;
      x.cwiseAbs().maxCoeff(&i);
      f(i) = sgn(x(i));
      return f;
    }
    case BallKind::kCrossPolytope:
      for (Index i = 0; i < dim_; ++i) f(i) = sgn(x(i));
      return f;
    case BallKind::kEuclidean: return x / x.norm();
    case BallKind::kVertexList:
      return weighted_l1_min_norm(generators_, Vector::Ones(generators_.cols()), x).dual;
    case BallKind::kQuotient:
      return weighted_l1_min_norm(generators_.transpose(), ambient_->weights(), x).dual;
    case BallKind::kInducedL1: {
      const Vector y = generators_ * x;
      Vector s(y.size());
      for (Index a = 0; a < y.size(); ++a) s(a) = sgn(y(a));
      return generators_.transpose() * ambient_->weights().asDiagonal() * s;
    }
  }
  return f;
}

bool NormedSpace::operator==(const NormedSpace& other) const {
  if (kind_ != other.kind_ || dim_ != other.dim_) return false;
  if (generators_.rows() != other.generators_.rows() || generators_.cols() != other.generators_.cols())
    return false;
  if (generators_ != other.generators_) return false;
  if (ambient_.has_value() != other.ambient_.has_value()) return false;
  return !ambient_ || *ambient_ == *other.ambient_;
}

Matrix polar_vertex_pairs(const Matrix& pairs) {
  const Index n = pairs.rows();
  const Matrix v = dedupe_pairs(pairs);
  const Index p = v.cols();
  if (n > kMaxFacetEnumerationDim) throw CapacityError("facet enumeration limited to dimension 6");
  if (p < n) throw DomainError("polar_vertex_pairs: vertices do not span");
  if (binomial(p, n) * std::ldexp(1.0, static_cast<int>(n - 1)) > kMaxPolarSolves)
    throw CapacityError("facet enumeration: too many vertex subsets");

  std::vector<Vector> facets;
  std::vector<Index> pick(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  Matrix a(n, n);
  const Vector ones = Vector::Ones(n);
  while (true) {
    for (Index signs = 0; signs < (Index{1} << (n - 1)); ++signs) {
      for (Index i = 0; i < n; ++i) {
        const double s = (i > 0 && ((signs >> (i - 1)) & 1)) ? -1.0 : 1.0;
        a.row(i) = s * v.col(pick[static_cast<std::size_t>(i)]).transpose();
      }
      Eigen::FullPivLU<Matrix> lu(a);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) continue;
      Vector f = lu.solve(ones);
      if ((v.transpose() * f).cwiseAbs().maxCoeff() > 1.0 + 1e-9) continue;
      Index lead = 0;
      f.cwiseAbs().maxCoeff(&lead);
      if (f(lead) < 0) f = -f;
      bool dup = false;
      for (const Vector& g : facets) {
        if ((g - f).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, f.cwiseAbs().maxCoeff())) {
          dup = true;
          break;
        }
      }
      if (!dup) facets.push_back(f);
    }
    // next n-combination of {0..p-1}
    Index i = n - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == p - n + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  Matrix out(n, static_cast<Index>(facets.size()));
  for (std::size_t i = 0; i < facets.size(); ++i) out.col(static_cast<Index>(i)) = facets[i];
  return out;
}

}  // namespace densfact
