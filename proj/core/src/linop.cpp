#include "densfact/linop.hpp"

#include <algorithm>
#include <cmath>

#include "densfact/errors.hpp"
#include "densfact/rng.hpp"

namespace densfact {

namespace {

Index codomain_dim(const Codomain& c) {
  if (const auto* s = std::get_if<NormedSpace>(&c)) return s->dim();
  return static_cast<Index>(std::get<LpTarget>(c).space.atom_count());
}

// Gradient direction of the codomain norm at y (a norming functional).
Vector codomain_gradient(const LinOp& t, const Vector& y, double r) {
  if (const auto* s = std::get_if<NormedSpace>(&t.codomain())) return s->norming_functional(y);
  const Vector& w = t.measure().weights();
  Vector g = Vector::Zero(y.size());
  if (std::isinf(r)) {
    Index a = 0;
    y.cwiseAbs().maxCoeff(&a);
    g(a) = sgn(y(a));
    return g;
  }
  for (Index a = 0; a < y.size(); ++a) g(a) = w(a) * std::pow(std::abs(y(a)), r - 1.0) * sgn(y(a));
  return g;
}

// Norming functionals of the codomain (one per +/- pair), if they are finite
// in number. Returns an empty matrix when not available.
Matrix codomain_dual_vertices(const LinOp& t, double r) {
  if (const auto* s = std::get_if<NormedSpace>(&t.codomain())) {
    try {
      const NormedSpace d = s->dual();
      if (d.vertex_enumerable()) return d.vertex_pairs();
    } catch (const CapacityError&) {
    }
    return Matrix();
  }
  if (std::isinf(r)) return Matrix::Identity(t.rows(), t.rows());
  return Matrix();
}

NormResult sign_cube_norm(const LinOp& t, double r) {
  const Index d = t.cols();
  if (d > kMaxSignCubeDim) throw CapacityError("op_norm: sign cube domain limited to dimension 24");
  const Matrix& m = t.matrix();
  Vector x = Vector::Ones(d);
  Vector y = m.rowwise().sum();
  NormResult best{t.codomain_norm(y, r), true, x};
  const Index count = Index{1} << (d - 1);
  for (Index g = 1; g < count; ++g) {
    // Gray code over coordinates 1..d-1; coordinate 0 stays +1.
    const Index bit = static_cast<Index>(__builtin_ctzll(static_cast<unsigned long long>(g))) + 1;
    x(bit) = -x(bit);
    y += 2.0 * x(bit) * m.col(bit);
    const double v = t.codomain_norm(y, r);
    if (v > best.value) {
      best.value = v;
      best.witness = x;
    }
  }
  return best;
}

}  // namespace

LinOp::LinOp(NormedSpace domain, Codomain codomain, Matrix matrix)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(matrix)) {
  if (matrix_.cols() != domain_.dim() || matrix_.rows() != codomain_dim(codomain_))
    throw ShapeError("LinOp: matrix shape does not match domain/codomain dimensions");
  if (const auto* lp = std::get_if<LpTarget>(&codomain_); lp && !(lp->exponent >= 1.0))
    throw DomainError("LinOp: L_r exponent must be >= 1");
}

LinOp LinOp::into_lp(NormedSpace domain, MeasureSpace space, Matrix matrix, double r) {
  return LinOp(std::move(domain), LpTarget{std::move(space), r}, std::move(matrix));
}

const LpTarget& LinOp::target() const {
  if (const auto* lp = std::get_if<LpTarget>(&codomain_)) return *lp;
  throw DomainError("LinOp: codomain is not an L_r space");
}

double LinOp::codomain_norm(const Vector& y) const {
  if (const auto* s = std::get_if<NormedSpace>(&codomain_)) return s->norm(y);
  return codomain_norm(y, std::get<LpTarget>(codomain_).exponent);
}

double LinOp::codomain_norm(const Vector& y, double r) const {
  if (const auto* s = std::get_if<NormedSpace>(&codomain_)) return s->norm(y);
  return lp_norm(std::get<LpTarget>(codomain_).space.weights(), y, r);
}

LinOp LinOp::compose(const LinOp& inner, bool check_spaces) const {
  if (inner.rows() != cols()) throw ShapeError("compose: inner codomain dimension mismatch");
  if (check_spaces) {
    const auto* mid = std::get_if<NormedSpace>(&inner.codomain());
    if (!mid || !(*mid == domain_)) throw ShapeError("compose: inner codomain is not this domain");
  }
  return LinOp(inner.domain(), codomain_, matrix_ * inner.matrix());
}

LinOp LinOp::scaled(double factor) const { return LinOp(domain_, codomain_, factor * matrix_); }

LinOp LinOp::with_exponent(double r) const {
  return LinOp(domain_, LpTarget{target().space, r}, matrix_);
}

LinOp LinOp::with_matrix(Matrix matrix) const { return LinOp(domain_, codomain_, std::move(matrix)); }

LinOp LinOp::adjoint() const {
  const auto* s = std::get_if<NormedSpace>(&codomain_);
  if (!s) throw DomainError("adjoint: codomain must be a normed space");
  return LinOp(s->dual(), domain_.dual(), matrix_.transpose());
}

NormResult op_norm(const LinOp& t) {
  const auto* lp = std::get_if<LpTarget>(&t.codomain());
  return op_norm(t, lp ? lp->exponent : 1.0);
}

NormResult op_norm(const LinOp& t, double r) {
  if (r < 1.0) throw DomainError("op_norm: exponent must be >= 1");
  const NormedSpace& dom = t.domain();
  const Index n = t.cols();
  if (t.matrix().size() == 0 || t.matrix().cwiseAbs().maxCoeff() == 0.0) {
    Vector w = Vector::Zero(n);
    if (n > 0) w(0) = 1.0 / std::max(dom.norm(Vector::Unit(n, 0)), 1e-300);
    return {0.0, true, w};
  }

  if (dom.kind() == BallKind::kSignCube) return sign_cube_norm(t, r);

  if (dom.vertex_enumerable()) {
    const Matrix v = dom.vertex_pairs();
    const Matrix img = t.matrix() * v;
    NormResult best{-1.0, true, Vector()};
    for (Index j = 0; j < v.cols(); ++j) {
      const double val = t.codomain_norm(img.col(j), r);
      if (val > best.value) {
        best.value = val;
        best.witness = v.col(j);
      }
    }
    return best;
  }

  // sup_x sup_f f.Tx = sup_f ||T^T f||_dom* over codomain dual vertices.
  Matrix fs;
  if (const auto* lpt = std::get_if<LpTarget>(&t.codomain());
      lpt && r == 1.0 && dom.kind() == BallKind::kEuclidean && t.rows() <= kMaxSignCubeDim) {
    fs = lpt->space.weights().asDiagonal() * NormedSpace::sign_cube(t.rows()).vertex_pairs();
  } else {
    fs = codomain_dual_vertices(t, r);
  }
  if (fs.cols() > 0) {
    NormResult best{-1.0, true, Vector()};
    Index arg = 0;
    for (Index j = 0; j < fs.cols(); ++j) {
      const double val = dom.dual_norm(t.matrix().transpose() * fs.col(j));
      if (val > best.value) {
        best.value = val;
        arg = j;
      }
    }
    const Vector g = t.matrix().transpose() * fs.col(arg);
    if (dom.kind() == BallKind::kEuclidean) best.witness = g / g.norm();
    return best;
  }

  if (dom.kind() != BallKind::kEuclidean)
    throw CapacityError("op_norm: no exact method for this domain/codomain pair");

  // Multistart projected power iteration on the Euclidean sphere.
  Rng rng(0x6f705f6e6f726dULL);
  NormResult best{0.0, false, Vector::Unit(n, 0)};
  for (int start = 0; start < 16; ++start) {
    Vector x = start < n ? Vector(Vector::Unit(n, start)) : rng.normal_vector(n);
    x.normalize();
    for (int it = 0; it < 300; ++it) {
      const Vector y = t.apply(x);
      const Vector g = t.matrix().transpose() * codomain_gradient(t, y, r);
      if (g.norm() == 0.0) break;
      const Vector next = g / g.norm();
      const bool done = (next - x).norm() < 1e-13;
      x = next;
      if (done) break;
    }
    const double val = t.codomain_norm(t.apply(x), r);
    if (val > best.value) best = {val, false, x};
  }
  return best;
}

Vector envelope(const LinOp& t) {
  const NormedSpace& dom = t.domain();
  const Matrix& m = t.matrix();
  switch (dom.kind()) {
    case BallKind::kSignCube: return m.cwiseAbs().rowwise().sum();
    case BallKind::kCrossPolytope: return m.cwiseAbs().rowwise().maxCoeff();
    case BallKind::kEuclidean: return m.rowwise().norm();
    default: break;
  }
  return vertex_images(t).cwiseAbs().rowwise().maxCoeff();
}

Matrix vertex_images(const LinOp& t) { return t.matrix() * t.domain().vertex_pairs(); }

}  // namespace densfact
