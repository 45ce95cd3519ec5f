#pragma once

#include "papa/common.hpp"
#include "papa/penalty.hpp"
#include "papa/prox.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace papa {

// A saddle point (x*, y*, λ*) with F* = F(x*, y*). λ* follows the convention
// Aᵀλ* ∈ ∂f(x*), Bᵀλ* ∈ ∂g(y*) + ∇h(y*), λ* ∈ N_K(Ax* + By* − c).
template <typename Scalar>
struct Reference {
  Scalar f_star = 0;
  Vec<Scalar> x_star, y_star, lambda_star;
  Scalar f_star_error = 0;  // error bar on f_star (0 for exact oracles)
  bool unique = true;
  std::string source;
};

// Regeneration data: generator name, seed and scalar parameters.
struct InstanceInfo {
  std::string kind;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
};

// min f(x) + g(y) + h(y)  s.t.  Ax + By − c ∈ K.
template <typename Scalar>
struct ProblemInstance {
  using VecT = Vec<Scalar>;
  // argmin_x f(x) + ρψ_ρ(x, ŷ; λ⁰) + (γ/2)‖x − x̂‖²
  using XSolver = std::function<VecT(const VecT& x_hat, const VecT& y_hat,
                                     Scalar rho, Scalar gamma,
                                     const VecT& lambda0)>;

  ProxFunction<Scalar> f, g;
  std::optional<SmoothTerm<Scalar>> h;
  PenaltySpec<Scalar> constraint;
  XSolver exact_x_solver;

  // Reporting hooks. `original_objective` maps y to the objective of the
  // unlifted problem; `feasibility` is a problem-specific violation metric.
  std::function<Scalar(const VecT& y)> original_objective;
  std::function<Scalar(const VecT& x, const VecT& y)> feasibility;

  std::optional<Reference<Scalar>> reference;
  InstanceInfo info;

  Index p1() const { return constraint.A.cols(); }
  Index p2() const { return constraint.B.cols(); }
  Index n() const { return constraint.c.size(); }

  void validate() const {
    constraint.validate();
    if (f.dim > 0) check_length(f.dim, p1(), "ProblemInstance: f");
    if (g.dim > 0) check_length(g.dim, p2(), "ProblemInstance: g");
  }
};

template <typename Scalar>
Scalar objective(const ProblemInstance<Scalar>& p, const Vec<Scalar>& x,
                 const Vec<Scalar>& y) {
  Scalar v = value(p.f, x) + value(p.g, y);
  if (p.h) v += p.h->value(y);
  return v;
}

template <typename Scalar>
Scalar original_objective(const ProblemInstance<Scalar>& p,
                          const Vec<Scalar>& x, const Vec<Scalar>& y) {
  return p.original_objective ? p.original_objective(y) : objective(p, x, y);
}

template <typename Scalar>
Scalar feasibility(const ProblemInstance<Scalar>& p, const Vec<Scalar>& x,
                   const Vec<Scalar>& y) {
  return p.feasibility ? p.feasibility(x, y)
                       : dist(p.constraint.K, residual(p.constraint, x, y));
}

// Exact x-solver for A = σI (σ = ±1) and K = {0}: the subproblem reduces to
// prox_{f/(ρ+γ)} at (ρσv + γx̂)/(ρ+γ), v = c − Bŷ − λ⁰/ρ.
template <typename Scalar>
typename ProblemInstance<Scalar>::XSolver shrinkage_x_solver(
    const ProxFunction<Scalar>& f, int sigma, const LinearMap<Scalar>& B,
    const Vec<Scalar>& c) {
  return [f, sigma, B, c](const Vec<Scalar>& x_hat, const Vec<Scalar>& y_hat,
                          Scalar rho, Scalar gamma,
                          const Vec<Scalar>& lambda0) -> Vec<Scalar> {
    Vec<Scalar> v = c - B.apply(y_hat);
    if (lambda0.size() != 0) v -= lambda0 / rho;
    if (sigma < 0) v = -v;
    if (gamma == Scalar(0)) return prox(f, Scalar(1) / rho, v);
    return prox(f, Scalar(1) / (rho + gamma),
                Vec<Scalar>((rho * v + gamma * x_hat) / (rho + gamma)));
  };
}

// min f(Ky) + g(y) + h(y).
template <typename Scalar>
struct CompositeProblem {
  ProxFunction<Scalar> f;
  LinearMap<Scalar> K;
  ProxFunction<Scalar> g;
  std::optional<SmoothTerm<Scalar>> h;
};

template <typename Scalar>
Scalar objective(const CompositeProblem<Scalar>& p, const Vec<Scalar>& y) {
  Scalar v = value(p.f, p.K.apply(y)) + value(p.g, y);
  if (p.h) v += p.h->value(y);
  return v;
}

// Lift min f(Ky) + g(y) + h(y) to the template with x = Ky:
// A = I, B = −K, c = 0, K = {0}.
template <typename Scalar>
ProblemInstance<Scalar> to_template(const CompositeProblem<Scalar>& cp) {
  ProblemInstance<Scalar> p;
  const Index n = cp.K.rows();
  p.f = cp.f;
  p.g = cp.g;
  p.h = cp.h;
  p.constraint.A = LinearMap<Scalar>::identity(n);
  p.constraint.B = LinearMap<Scalar>::negated(cp.K);
  p.constraint.c = Vec<Scalar>::Zero(n);
  p.constraint.K = ConvexSet<Scalar>::zero(n);
  p.exact_x_solver =
      shrinkage_x_solver(p.f, 1, p.constraint.B, p.constraint.c);
  p.original_objective = [cp](const Vec<Scalar>& y) { return objective(cp, y); };
  p.info.kind = "composite";
  return p;
}

// Eliminate x from a template with A = ±I and K = {0}:
// x = σ(c − By), so the problem is f(−σB y + σc) + g(y) + h(y).
template <typename Scalar>
CompositeProblem<Scalar> to_composite(const ProblemInstance<Scalar>& p) {
  const int sigma = p.constraint.A.identity_sign();
  if (sigma == 0 || p.constraint.K.kind != SetKind::singleton_zero)
    throw ConfigError(
        "to_composite: requires A = ±identity and K = {0}");
  CompositeProblem<Scalar> cp;
  cp.K = sigma > 0 ? LinearMap<Scalar>::negated(p.constraint.B) : p.constraint.B;
  const Vec<Scalar> offset = Scalar(sigma) * p.constraint.c;
  cp.f = offset.cwiseAbs().maxCoeff() == Scalar(0) ? p.f : p.f.shifted(-offset);
  cp.g = p.g;
  cp.h = p.h;
  return cp;
}

// x recovered from y for templates with A = ±I, K = {0}.
template <typename Scalar>
Vec<Scalar> eliminated_x(const ProblemInstance<Scalar>& p, const Vec<Scalar>& y) {
  const int sigma = p.constraint.A.identity_sign();
  Vec<Scalar> x = p.constraint.c - p.constraint.B.apply(y);
  return sigma < 0 ? Vec<Scalar>(-x) : x;
}

// Largest violation of the optimality system at a candidate saddle point,
// measured through prox fixed points:
//   x* = prox_f(x* + Aᵀλ*),  y* = prox_g(y* + Bᵀλ* − ∇h(y*)),
//   r* = proj_K(r* + λ*),    r* ∈ K.
template <typename Scalar>
Scalar kkt_residual(const ProblemInstance<Scalar>& p, const Reference<Scalar>& r) {
  const auto& c = p.constraint;
  const Vec<Scalar> ax = c.A.adjoint_apply(r.lambda_star);
  Vec<Scalar> by = c.B.adjoint_apply(r.lambda_star);
  if (p.h) by -= p.h->gradient(r.y_star);
  const Vec<Scalar> res = residual(c, r.x_star, r.y_star);
  const Scalar ex = (r.x_star - prox(p.f, Scalar(1), Vec<Scalar>(r.x_star + ax))).norm();
  const Scalar ey = (r.y_star - prox(p.g, Scalar(1), Vec<Scalar>(r.y_star + by))).norm();
  const Scalar en = (res - project(c.K, Vec<Scalar>(res + r.lambda_star))).norm();
  const Scalar ef = dist(c.K, res);
  return std::max(std::max(ex, ey), std::max(en, ef));
}

}  // namespace papa
