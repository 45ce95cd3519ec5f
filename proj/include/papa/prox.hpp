#pragma once

#include "papa/common.hpp"
#include "papa/convex_set.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>

namespace papa {

enum class ProxKind {
  zero,
  linear,       // ⟨q, u⟩
  squared_l2,   // (κ₁/2)‖u‖²
  l1,           // κ₂‖u‖₁
  elastic,      // (κ₁/2)‖u‖² + κ₂‖u‖₁
  l2_norm,      // w‖u‖₂
  box,          // δ_[a,b]
  set_indicator,
  quadratic     // ½uᵀQu + qᵀu
};

namespace detail {

// Factorization of I + γQ for the last γ seen.
template <typename Scalar>
struct QuadraticCache {
  std::mutex mutex;
  Scalar gamma = Scalar(-1);
  Eigen::LLT<Mat<Scalar>> llt;
};

}  // namespace detail

// A proper closed convex function with an exact prox. When `center` is
// non-empty the function is u ↦ base(u − center).
template <typename Scalar>
struct ProxFunction {
  using VecT = Vec<Scalar>;
  using MatT = Mat<Scalar>;

  ProxKind kind = ProxKind::zero;
  Index dim = 0;  // 0 when the kind carries no sized data
  Scalar kappa1 = 0, kappa2 = 0, weight = 1;
  VecT q, lower, upper, center;
  MatT Q;
  ConvexSet<Scalar> set;
  Scalar mu = 0;               // strong convexity modulus
  std::optional<Scalar> lip;   // Lipschitz constant of the value, if finite
  std::shared_ptr<detail::QuadraticCache<Scalar>> cache;

  static ProxFunction zero() {
    ProxFunction f;
    f.lip = Scalar(0);
    return f;
  }
  static ProxFunction linear(VecT q) {
    ProxFunction f;
    f.kind = ProxKind::linear;
    f.dim = q.size();
    f.lip = q.norm();
    f.q = std::move(q);
    return f;
  }
  static ProxFunction squared_l2(Scalar kappa1) {
    ProxFunction f;
    f.kind = ProxKind::squared_l2;
    f.kappa1 = kappa1;
    f.mu = kappa1;
    return f;
  }
  static ProxFunction l1(Scalar kappa2, Index dim) {
    ProxFunction f;
    f.kind = ProxKind::l1;
    f.kappa2 = kappa2;
    f.dim = dim;
    f.lip = kappa2 * std::sqrt(Scalar(dim));
    return f;
  }
  static ProxFunction elastic(Scalar kappa1, Scalar kappa2) {
    ProxFunction f;
    f.kind = ProxKind::elastic;
    f.kappa1 = kappa1;
    f.kappa2 = kappa2;
    f.mu = kappa1;
    return f;
  }
  static ProxFunction l2_norm(Scalar weight = 1) {
    ProxFunction f;
    f.kind = ProxKind::l2_norm;
    f.weight = weight;
    f.lip = weight;
    return f;
  }
  static ProxFunction box(VecT lo, VecT hi) {
    ProxFunction f;
    f.kind = ProxKind::box;
    f.set = ConvexSet<Scalar>::box(lo, hi);
    f.dim = lo.size();
    f.lower = std::move(lo);
    f.upper = std::move(hi);
    return f;
  }
  static ProxFunction indicator(ConvexSet<Scalar> s) {
    ProxFunction f;
    f.kind = ProxKind::set_indicator;
    f.dim = s.dim;
    f.set = std::move(s);
    return f;
  }
  static ProxFunction quadratic(MatT Q, VecT q) {
    check_length(Q.rows(), Q.cols(), "ProxFunction::quadratic (square Q)");
    check_length(Q.rows(), q.size(), "ProxFunction::quadratic linear term");
    ProxFunction f;
    f.kind = ProxKind::quadratic;
    f.dim = q.size();
    if (f.dim > 0) {
      Eigen::SelfAdjointEigenSolver<MatT> es(Q, Eigen::EigenvaluesOnly);
      const Scalar lo = es.eigenvalues()(0);
      const Scalar hi = es.eigenvalues()(f.dim - 1);
      if (lo < -Scalar(1e-10) * std::max(Scalar(1), std::abs(hi)))
        throw ConfigError("ProxFunction::quadratic: Q is not positive semidefinite");
      f.mu = lo > Scalar(1e-12) * std::max(Scalar(1), hi) ? lo : Scalar(0);
    }
    f.Q = std::move(Q);
    f.q = std::move(q);
    f.cache = std::make_shared<detail::QuadraticCache<Scalar>>();
    return f;
  }

  ProxFunction shifted(VecT c) const {
    ProxFunction f = *this;
    if (f.center.size() > 0) c += f.center;
    f.center = std::move(c);
    return f;
  }

  bool is_indicator() const {
    return kind == ProxKind::box || kind == ProxKind::set_indicator;
  }
};

namespace detail {

template <typename Scalar>
Vec<Scalar> soft_threshold(const Vec<Scalar>& x, Scalar t) {
  Vec<Scalar> out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar a = std::abs(x[i]);
    out[i] = a <= t ? Scalar(0) : (x[i] > 0 ? a - t : t - a);
  }
  return out;
}

template <typename Scalar>
Vec<Scalar> base_prox(const ProxFunction<Scalar>& f, Scalar gamma,
                      const Vec<Scalar>& x) {
  using VecT = Vec<Scalar>;
  switch (f.kind) {
    case ProxKind::zero:
      return x;
    case ProxKind::linear:
      return x - gamma * f.q;
    case ProxKind::squared_l2:
      return x / (Scalar(1) + gamma * f.kappa1);
    case ProxKind::l1:
      return soft_threshold(x, gamma * f.kappa2);
    case ProxKind::elastic:
      return soft_threshold(x, gamma * f.kappa2) / (Scalar(1) + gamma * f.kappa1);
    case ProxKind::l2_norm: {
      const Scalar n = x.norm();
      const Scalar t = gamma * f.weight;
      if (n <= t) return VecT::Zero(x.size());
      return ((n - t) / n) * x;
    }
    case ProxKind::box:
    case ProxKind::set_indicator:
      return project(f.set, x);
    case ProxKind::quadratic: {
      auto& c = *f.cache;
      std::lock_guard<std::mutex> lock(c.mutex);
      if (c.gamma != gamma) {
        Mat<Scalar> m = gamma * f.Q;
        m.diagonal().array() += Scalar(1);
        c.llt.compute(m);
        c.gamma = gamma;
      }
      return c.llt.solve(x - gamma * f.q);
    }
  }
  return x;
}

template <typename Scalar>
Scalar base_value(const ProxFunction<Scalar>& f, const Vec<Scalar>& u) {
  switch (f.kind) {
    case ProxKind::zero:
      return 0;
    case ProxKind::linear:
      return f.q.dot(u);
    case ProxKind::squared_l2:
      return f.kappa1 / 2 * u.squaredNorm();
    case ProxKind::l1:
      return f.kappa2 * u.template lpNorm<1>();
    case ProxKind::elastic:
      return f.kappa1 / 2 * u.squaredNorm() + f.kappa2 * u.template lpNorm<1>();
    case ProxKind::l2_norm:
      return f.weight * u.norm();
    case ProxKind::box:
    case ProxKind::set_indicator: {
      const Scalar scale = u.size() ? std::max(Scalar(1), u.cwiseAbs().maxCoeff()) : Scalar(1);
      return contains(f.set, u, Scalar(1e-9) * scale) ? Scalar(0)
                                                       : infinity<Scalar>();
    }
    case ProxKind::quadratic:
      return u.dot(f.Q * u) / 2 + f.q.dot(u);
  }
  return 0;
}

}  // namespace detail

// f(u). Indicators accept points within 1e-9 (relative) of the set.
template <typename Scalar>
Scalar value(const ProxFunction<Scalar>& f, const Vec<Scalar>& u) {
  if (f.dim > 0) check_length(f.dim, u.size(), "value");
  if (f.center.size() == 0) return detail::base_value(f, u);
  check_length(f.center.size(), u.size(), "value");
  return detail::base_value(f, Vec<Scalar>(u - f.center));
}

// argmin_u f(u) + ‖u − x‖²/(2γ).
template <typename Scalar>
Vec<Scalar> prox(const ProxFunction<Scalar>& f, Scalar gamma,
                 const Vec<Scalar>& x) {
  if (!(gamma > Scalar(0)))
    throw ConfigError("prox: gamma must be positive, got " +
                      std::to_string(double(gamma)));
  if (f.dim > 0) check_length(f.dim, x.size(), "prox");
  if (f.center.size() == 0) return detail::base_prox(f, gamma, x);
  check_length(f.center.size(), x.size(), "prox");
  return f.center + detail::base_prox(f, gamma, Vec<Scalar>(x - f.center));
}

// prox of γf* at x, through x − γ prox_{f/γ}(x/γ).
template <typename Scalar>
Vec<Scalar> conj_prox(const ProxFunction<Scalar>& f, Scalar gamma,
                      const Vec<Scalar>& x) {
  if (!(gamma > Scalar(0)))
    throw ConfigError("conj_prox: gamma must be positive, got " +
                      std::to_string(double(gamma)));
  return x - gamma * prox(f, Scalar(1) / gamma, Vec<Scalar>(x / gamma));
}

// Smooth term h with gradient Lipschitz constant `lipschitz`.
template <typename Scalar>
struct SmoothTerm {
  std::function<Scalar(const Vec<Scalar>&)> value;
  std::function<Vec<Scalar>(const Vec<Scalar>&)> gradient;
  Scalar lipschitz = 0;
  Scalar mu = 0;
};

}  // namespace papa
