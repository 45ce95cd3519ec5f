#pragma once

#include "papa/common.hpp"
#include "papa/convex_set.hpp"
#include "papa/linear_map.hpp"

namespace papa {

// Constraint Ax + By − c ∈ K, with an optional shift λ⁰ (empty = zero).
template <typename Scalar>
struct PenaltySpec {
  LinearMap<Scalar> A, B;
  Vec<Scalar> c;
  ConvexSet<Scalar> K;
  Vec<Scalar> lambda0;

  Index rows() const { return c.size(); }

  void validate() const {
    check_length(c.size(), A.rows(), "PenaltySpec: rows of A");
    check_length(c.size(), B.rows(), "PenaltySpec: rows of B");
    check_length(c.size(), K.dim, "PenaltySpec: dimension of K");
    if (lambda0.size() != 0) check_length(c.size(), lambda0.size(), "PenaltySpec: shift");
  }
};

template <typename Scalar>
Vec<Scalar> residual(const PenaltySpec<Scalar>& spec, const Vec<Scalar>& x,
                     const Vec<Scalar>& y) {
  check_length(spec.c.size(), spec.A.rows(), "residual: rows of A");
  return spec.A.apply(x) + spec.B.apply(y) - spec.c;
}

// ∇φ(u) = u − proj_K(u), with φ = ½dist_K².
template <typename Scalar>
Vec<Scalar> grad_phi(const ConvexSet<Scalar>& K, const Vec<Scalar>& u) {
  return u - project(K, u);
}

template <typename Scalar>
Scalar phi(const ConvexSet<Scalar>& K, const Vec<Scalar>& u) {
  return grad_phi(K, u).squaredNorm() / 2;
}

template <typename Scalar>
struct PsiEval {
  Scalar value;
  Vec<Scalar> s;  // w − proj_K(w)
  Vec<Scalar> grad_x, grad_y;
};

// ψ_ρ(x, y; λ⁰) = ½dist_K(w)², w = Ax + By − c + λ⁰/ρ, with its partial
// gradients Aᵀs and Bᵀs.
template <typename Scalar>
PsiEval<Scalar> psi_val_grad(const PenaltySpec<Scalar>& spec, Scalar rho,
                             const Vec<Scalar>& x, const Vec<Scalar>& y,
                             const Vec<Scalar>& lambda0) {
  if (!(rho > Scalar(0)))
    throw ConfigError("psi_val_grad: rho must be positive, got " +
                      std::to_string(double(rho)));
  Vec<Scalar> w = residual(spec, x, y);
  if (lambda0.size() != 0) {
    check_length(w.size(), lambda0.size(), "psi_val_grad: shift");
    w += lambda0 / rho;
  }
  PsiEval<Scalar> out;
  out.s = grad_phi(spec.K, w);
  out.value = out.s.squaredNorm() / 2;
  out.grad_x = spec.A.adjoint_apply(out.s);
  out.grad_y = spec.B.adjoint_apply(out.s);
  return out;
}

template <typename Scalar>
PsiEval<Scalar> psi_val_grad(const PenaltySpec<Scalar>& spec, Scalar rho,
                             const Vec<Scalar>& x, const Vec<Scalar>& y) {
  return psi_val_grad(spec, rho, x, y, spec.lambda0);
}

// Unshifted ψ(x, y) = ½dist_K(Ax + By − c)².
template <typename Scalar>
Scalar psi(const PenaltySpec<Scalar>& spec, const Vec<Scalar>& x,
           const Vec<Scalar>& y) {
  return phi(spec.K, residual(spec, x, y));
}

template <typename Scalar>
struct Certificate {
  Scalar obj_lower, obj_upper, feas_upper;
  Scalar radicand;
  Scalar dist;
};

// Bounds on F(z) − F* and dist_K(Ax + By − c) from the penalty gap
// S_ρ(z) = F(z) + ρψ(z) − F*.
template <typename Scalar>
Certificate<Scalar> certificate_bounds(const PenaltySpec<Scalar>& spec,
                                       Scalar rho, Scalar F_of_z,
                                       Scalar F_star, Scalar lambda_star_norm,
                                       const Vec<Scalar>& x,
                                       const Vec<Scalar>& y) {
  if (!(rho > Scalar(0)))
    throw ConfigError("certificate_bounds: rho must be positive");
  if (spec.lambda0.size() != 0 && spec.lambda0.cwiseAbs().maxCoeff() != Scalar(0))
    throw ConfigError("certificate_bounds: requires an unshifted penalty");
  const Scalar d = dist(spec.K, residual(spec, x, y));
  const Scalar S = F_of_z + rho * d * d / 2 - F_star;
  Certificate<Scalar> c;
  c.dist = d;
  c.obj_lower = -lambda_star_norm * d;
  c.obj_upper = S - rho / 2 * d * d;
  c.radicand = lambda_star_norm * lambda_star_norm + 2 * rho * S;
  if (c.radicand < Scalar(-1e-10))
    throw InvariantError("certificate_bounds: negative radicand " +
                         std::to_string(double(c.radicand)) +
                         "; F* or the multiplier is inconsistent with z");
  c.feas_upper = (lambda_star_norm +
                  std::sqrt(std::max(c.radicand, Scalar(0)))) / rho;
  return c;
}

}  // namespace papa
