#pragma once

#include "papa/common.hpp"
#include "papa/random.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace papa {

enum class MapKind {
  dense,
  identity,
  scaled_identity,
  negated,
  row_subsampled,
  gradient2d,
  composition
};

// Immutable linear operator. Copies share the payload.
template <typename Scalar>
class LinearMap {
 public:
  using VecT = Vec<Scalar>;
  using MatT = Mat<Scalar>;

  LinearMap() : LinearMap(identity(0)) {}

  static LinearMap dense(MatT m) {
    auto n = std::make_shared<Node>(MapKind::dense, m.rows(), m.cols());
    n->matrix = std::move(m);
    return LinearMap(std::move(n));
  }

  static LinearMap identity(Index dim) {
    return LinearMap(std::make_shared<Node>(MapKind::identity, dim, dim));
  }

  static LinearMap scaled_identity(Index dim, Scalar s) {
    auto n = std::make_shared<Node>(MapKind::scaled_identity, dim, dim);
    n->scale = s;
    return LinearMap(std::move(n));
  }

  // -M; negating a negation returns the original map.
  static LinearMap negated(const LinearMap& m) {
    if (m.kind() == MapKind::negated) return LinearMap(m.node_->inner);
    auto n = std::make_shared<Node>(MapKind::negated, m.rows(), m.cols());
    n->inner = m.node_;
    return LinearMap(std::move(n));
  }

  // Selected rows of identity(cols): (Sx)_i = x[rows[i]].
  static LinearMap row_subsampled(std::vector<Index> rows, Index cols) {
    return row_subsampled(identity(cols), std::move(rows));
  }

  // Selected rows of `base`. A dense base is sliced once so applying the map
  // costs only the kept rows.
  static LinearMap row_subsampled(const LinearMap& base,
                                  std::vector<Index> rows) {
    for (Index r : rows)
      if (r < 0 || r >= base.rows())
        throw DimensionError("row_subsampled: row index " + std::to_string(r) +
                             " outside [0, " + std::to_string(base.rows()) +
                             ")");
    auto n = std::make_shared<Node>(MapKind::row_subsampled,
                                    static_cast<Index>(rows.size()),
                                    base.cols());
    n->inner = base.node_;
    if (base.kind() == MapKind::dense) {
      n->matrix = base.matrix()(rows, Eigen::all);
      n->sliced = true;
    }
    n->indices = std::move(rows);
    return LinearMap(std::move(n));
  }

  // Forward differences of an image stored column-major (pixel (i,j) at
  // i + j*height). Output stacks the vertical differences over the horizontal
  // ones; the difference leaving the image is zero.
  static LinearMap gradient2d(Index height, Index width) {
    auto n = std::make_shared<Node>(MapKind::gradient2d, 2 * height * width,
                                    height * width);
    n->height = height;
    n->width = width;
    return LinearMap(std::move(n));
  }

  // outer ∘ inner.
  static LinearMap compose(const LinearMap& outer, const LinearMap& inner) {
    if (outer.cols() != inner.rows())
      throw DimensionError("compose: outer map takes length " +
                           std::to_string(outer.cols()) +
                           ", inner map produces " +
                           std::to_string(inner.rows()));
    auto n = std::make_shared<Node>(MapKind::composition, outer.rows(),
                                    inner.cols());
    n->outer = outer.node_;
    n->inner = inner.node_;
    return LinearMap(std::move(n));
  }

  Index rows() const { return node_->rows; }
  Index cols() const { return node_->cols; }
  MapKind kind() const { return node_->kind; }

  const MatT& matrix() const { return node_->matrix; }
  Scalar scale() const { return node_->scale; }
  const std::vector<Index>& row_indices() const { return node_->indices; }
  Index image_height() const { return node_->height; }
  Index image_width() const { return node_->width; }
  LinearMap inner() const { return LinearMap(node_->inner); }
  LinearMap outer() const { return LinearMap(node_->outer); }

  VecT apply(const VecT& x) const {
    check_length(cols(), x.size(), "LinearMap::apply");
    return forward(*node_, x);
  }

  VecT adjoint_apply(const VecT& u) const {
    check_length(rows(), u.size(), "LinearMap::adjoint_apply");
    return backward(*node_, u);
  }

  MatT to_dense() const {
    MatT m(rows(), cols());
    VecT e = VecT::Zero(cols());
    for (Index j = 0; j < cols(); ++j) {
      e[j] = 1;
      m.col(j) = forward(*node_, e);
      e[j] = 0;
    }
    return m;
  }

  // ±1 if the map is ±identity, 0 otherwise.
  int identity_sign() const {
    switch (kind()) {
      case MapKind::identity:
        return 1;
      case MapKind::scaled_identity:
        return scale() == Scalar(1) ? 1 : scale() == Scalar(-1) ? -1 : 0;
      case MapKind::negated:
        return -inner().identity_sign();
      default:
        return 0;
    }
  }

 private:
  struct Node {
    Node(MapKind k, Index r, Index c) : kind(k), rows(r), cols(c) {}
    MapKind kind;
    Index rows, cols;
    MatT matrix;
    Scalar scale = 1;
    std::vector<Index> indices;
    Index height = 0, width = 0;
    bool sliced = false;
    std::shared_ptr<const Node> inner, outer;
  };

  explicit LinearMap(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static VecT forward(const Node& n, const VecT& x) {
    switch (n.kind) {
      case MapKind::dense:
        return n.matrix * x;
      case MapKind::identity:
        return x;
      case MapKind::scaled_identity:
        return n.scale * x;
      case MapKind::negated:
        return -forward(*n.inner, x);
      case MapKind::row_subsampled: {
        if (n.sliced) return n.matrix * x;
        const VecT full = forward(*n.inner, x);
        VecT out(n.rows);
        for (Index i = 0; i < n.rows; ++i)
          out[i] = full[n.indices[static_cast<std::size_t>(i)]];
        return out;
      }
      case MapKind::gradient2d:
        return grad(n.height, n.width, x);
      case MapKind::composition:
        return forward(*n.outer, forward(*n.inner, x));
    }
    return VecT();
  }

  static VecT backward(const Node& n, const VecT& u) {
    switch (n.kind) {
      case MapKind::dense:
        return n.matrix.transpose() * u;
      case MapKind::identity:
        return u;
      case MapKind::scaled_identity:
        return n.scale * u;
      case MapKind::negated:
        return -backward(*n.inner, u);
      case MapKind::row_subsampled: {
        if (n.sliced) return n.matrix.transpose() * u;
        VecT full = VecT::Zero(n.inner->rows);
        for (Index i = 0; i < n.rows; ++i)
          full[n.indices[static_cast<std::size_t>(i)]] += u[i];
        return backward(*n.inner, full);
      }
      case MapKind::gradient2d:
        return grad_adjoint(n.height, n.width, u);
      case MapKind::composition:
        return backward(*n.inner, backward(*n.outer, u));
    }
    return VecT();
  }

  static VecT grad(Index h, Index w, const VecT& x) {
    VecT out = VecT::Zero(2 * h * w);
    for (Index j = 0; j < w; ++j)
      for (Index i = 0; i < h; ++i) {
        const Index p = i + j * h;
        if (i + 1 < h) out[p] = x[p + 1] - x[p];
        if (j + 1 < w) out[h * w + p] = x[p + h] - x[p];
      }
    return out;
  }

  static VecT grad_adjoint(Index h, Index w, const VecT& u) {
    VecT out = VecT::Zero(h * w);
    for (Index j = 0; j < w; ++j)
      for (Index i = 0; i < h; ++i) {
        const Index p = i + j * h;
        if (i + 1 < h) {
          out[p + 1] += u[p];
          out[p] -= u[p];
        }
        if (j + 1 < w) {
          out[p + h] += u[h * w + p];
          out[p] -= u[h * w + p];
        }
      }
    return out;
  }

  std::shared_ptr<const Node> node_;
};

struct PowerIterationOptions {
  double tolerance = 1e-12;  // on successive Rayleigh quotients
  int max_iterations = 10000;
  double safety = 1e-6;
  std::uint64_t seed = 0x5eed;
};

// Largest squared singular value by power iteration on MᵀM, inflated by
// (1 + safety) so step sizes derived from it stay valid.
template <typename Scalar>
Scalar op_norm_sq(const LinearMap<Scalar>& m,
                  const PowerIterationOptions& opt = {}) {
  using VecT = Vec<Scalar>;
  if (m.rows() == 0 || m.cols() == 0) return Scalar(0);
  RandomStream rng(opt.seed, "power-iteration");
  VecT v = rng.normal_vector(m.cols()).template cast<Scalar>();
  v /= v.norm();
  Scalar theta = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const VecT u = m.apply(v);
    const Scalar next = u.squaredNorm();
    VecT w = m.adjoint_apply(u);
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) {
      if (it == 0 && next == Scalar(0)) return Scalar(0);
      theta = next;
      break;
    }
    v = w / wn;
    if (it > 0 && std::abs(next - theta) <= Scalar(opt.tolerance) * next) {
      theta = next;
      const Scalar est = theta * Scalar(1 + opt.safety);
      if (m.kind() == MapKind::gradient2d && est > Scalar(8))
        throw InvariantError("op_norm_sq: difference stencil estimate " +
                             std::to_string(double(est)) + " exceeds 8");
      return est;
    }
    theta = next;
  }
  throw ConvergenceError(
      "op_norm_sq: power iteration did not converge in " +
      std::to_string(opt.max_iterations) +
      " iterations; last Rayleigh quotient " + std::to_string(double(theta)));
}

}  // namespace papa
