#pragma once

#include "papa/common.hpp"
#include "papa/problem.hpp"
#include "papa/schedule.hpp"
#include "papa/solver.hpp"
#include "papa/trace.hpp"

namespace papa {

// Specializations for min f(Ky) + g(y):
//   dr-*     K = I, x = prox_{f/ρ}(ŷ), y = prox_{g/ρ}(x)
//   linop-*  general K, x = prox_{f/ρ}(Kŷ)
//   pd-*     general K through the dual point x̄ = prox_{ρf*}(ρKŷ)
// The plain schemes use ρ_k = ρ₀(k+1) and k/(k+2) momentum; the scvx schemes
// use ρ_k = ρ₀/τ_k² and averaging.
enum class CompositeScheme { dr_plain, dr_scvx, linop_plain, linop_scvx, pd_plain, pd_scvx };

inline bool is_scvx(CompositeScheme s) {
  return s == CompositeScheme::dr_scvx || s == CompositeScheme::linop_scvx ||
         s == CompositeScheme::pd_scvx;
}

inline const char* scheme_name(CompositeScheme s) {
  switch (s) {
    case CompositeScheme::dr_plain: return "dr-plain";
    case CompositeScheme::dr_scvx: return "dr-scvx";
    case CompositeScheme::linop_plain: return "linop-plain";
    case CompositeScheme::linop_scvx: return "linop-scvx";
    case CompositeScheme::pd_plain: return "pd-plain";
    case CompositeScheme::pd_scvx: return "pd-scvx";
  }
  return "";
}

template <typename Scalar>
struct CompositeSettings {
  CompositeScheme scheme = CompositeScheme::dr_plain;
  Scalar rho0 = 1;
  Scalar normB_sq = 1;  // unused by the dr schemes
  Scalar mu_g = 0;
};

// Fills defaults: ρ₀ = 1/‖K‖ (plain) or μ_g/(2‖K‖²) (scvx).
template <typename Scalar>
CompositeSettings<Scalar> resolve_composite(const CompositeProblem<Scalar>& p,
                                            CompositeScheme scheme,
                                            std::optional<Scalar> rho0 = std::nullopt,
                                            std::optional<Scalar> normB_sq = std::nullopt) {
  CompositeSettings<Scalar> s;
  s.scheme = scheme;
  const bool dr = scheme == CompositeScheme::dr_plain || scheme == CompositeScheme::dr_scvx;
  if (dr && p.K.identity_sign() != 1)
    throw ConfigError(std::string(scheme_name(scheme)) + ": requires K = identity");
  if (p.h) throw ConfigError("composite schemes take no smooth term");
  s.normB_sq = normB_sq ? *normB_sq : (dr ? Scalar(1) : op_norm_sq(p.K));
  s.mu_g = p.g.mu;
  if (is_scvx(scheme)) {
    if (!(s.mu_g > 0))
      throw ConfigError(std::string(scheme_name(scheme)) + ": requires strongly convex g");
    const Scalar limit = s.mu_g / (2 * s.normB_sq);
    s.rho0 = rho0 ? *rho0 : limit;
    if (detail::exceeds(s.rho0, limit))
      throw ConfigError(std::string(scheme_name(scheme)) + ": rho0 exceeds mu_g/(2‖K‖²)");
  } else {
    s.rho0 = rho0 ? *rho0 : Scalar(1) / std::sqrt(s.normB_sq);
  }
  return s;
}

template <typename Scalar>
SolverState<Scalar> composite_init(const CompositeProblem<Scalar>& p,
                                   const CompositeSettings<Scalar>& s,
                                   const Vec<Scalar>& y0) {
  SolverState<Scalar> st;
  st.y = st.y_hat = st.y_tilde = y0;
  st.x = st.x_hat = st.x_tilde = p.K.apply(y0);
  st.tau = 1;
  st.rho = s.rho0;
  return st;
}

template <typename Scalar>
SolverState<Scalar> composite_steps(const CompositeProblem<Scalar>& p,
                                    const SolverState<Scalar>& st,
                                    const CompositeSettings<Scalar>& s) {
  using VecT = Vec<Scalar>;
  const Scalar rho = st.rho, tau = st.tau, L = s.normB_sq;
  const Index k = st.k;
  SolverState<Scalar> nx = st;
  VecT x, y;

  auto plain_momentum = [&]() {
    const Scalar beta = Scalar(k) / Scalar(k + 2);
    nx.y_hat = y + beta * (y - st.y);
    nx.rho = s.rho0 * Scalar(k + 2);
    nx.tau = Scalar(1) / Scalar(k + 2);
  };
  const Scalar tau1 = is_scvx(s.scheme) ? tau_next(tau) : Scalar(0);

  switch (s.scheme) {
    case CompositeScheme::dr_plain: {
      x = prox(p.f, Scalar(1) / rho, st.y_hat);
      y = prox(p.g, Scalar(1) / rho, x);
      plain_momentum();
      break;
    }
    case CompositeScheme::dr_scvx: {
      const VecT yh = (1 - tau) * st.y + tau * st.y_tilde;
      x = prox(p.f, Scalar(1) / rho, yh);
      nx.y_tilde = prox(p.g, Scalar(1) / (tau * rho),
                        VecT(x / tau - ((1 - tau) / tau) * st.y));
      y = (1 - tau) * st.y + tau * nx.y_tilde;
      nx.y_hat = (1 - tau1) * y + tau1 * nx.y_tilde;
      break;
    }
    case CompositeScheme::linop_plain: {
      const VecT By = p.K.apply(st.y_hat);
      x = prox(p.f, Scalar(1) / rho, By);
      const VecT arg = st.y_hat - p.K.adjoint_apply(By) / L + p.K.adjoint_apply(x) / L;
      y = prox(p.g, Scalar(1) / (L * rho), arg);
      plain_momentum();
      break;
    }
    case CompositeScheme::linop_scvx: {
      const VecT By = p.K.apply(st.y_hat);
      x = prox(p.f, Scalar(1) / rho, By);
      nx.y_tilde = prox(p.g, Scalar(1) / (tau * rho * L),
                        VecT(st.y_tilde - p.K.adjoint_apply(VecT(By - x)) / (tau * L)));
      y = (1 - tau) * st.y + tau * nx.y_tilde;
      nx.y_hat = y + (tau1 * (1 - tau) / tau) * (y - st.y);
      break;
    }
    case CompositeScheme::pd_plain: {
      const VecT By = p.K.apply(st.y_hat);
      const VecT xbar = conj_prox(p.f, rho, VecT(rho * By));
      y = prox(p.g, Scalar(1) / (rho * L),
               VecT(st.y_hat - p.K.adjoint_apply(xbar) / (rho * L)));
      x = By - xbar / rho;
      plain_momentum();
      break;
    }
    case CompositeScheme::pd_scvx: {
      const VecT By = p.K.apply(st.y_hat);
      const VecT xbar = conj_prox(p.f, rho, VecT(rho * By));
      nx.y_tilde = prox(p.g, Scalar(1) / (tau * rho * L),
                        VecT(st.y_tilde - p.K.adjoint_apply(xbar) / (tau * rho * L)));
      y = (1 - tau) * st.y + tau * nx.y_tilde;
      nx.y_hat = y + (tau1 * (1 - tau) / tau) * (y - st.y);
      x = By - xbar / rho;
      break;
    }
  }
  if (is_scvx(s.scheme)) {
    nx.tau = tau1;
    nx.rho = s.rho0 / (tau1 * tau1);
  }
  nx.x = std::move(x);
  nx.y = std::move(y);
  nx.rho_prev = rho;
  ++nx.k;
  ++nx.k_local;
  return nx;
}

// Trace of P(y^k) = f(Ky^k) + g(y^k); `dist` holds ‖x^k − Ky^k‖.
template <typename Scalar>
ConvergenceTrace<Scalar> run_composite(const CompositeProblem<Scalar>& p,
                                       const CompositeSettings<Scalar>& s,
                                       const Vec<Scalar>& y0, Index max_iters) {
  ConvergenceTrace<Scalar> tr;
  tr.method = scheme_name(s.scheme);
  tr.rho0 = s.rho0;
  tr.mu_g = s.mu_g;
  tr.normB_sq = s.normB_sq;
  tr.y0 = y0;
  SolverState<Scalar> st = composite_init(p, s, y0);
  tr.x0 = st.x;
  auto rec = [&](const SolverState<Scalar>& z) {
    TraceRecord<Scalar> r;
    r.k = z.k;
    r.objective = r.original = objective(p, z.y);
    r.dist = r.feasibility = (z.x - p.K.apply(z.y)).norm();
    r.psi = r.dist * r.dist / 2;
    r.rho = z.rho;
    r.tau = z.tau;
    return r;
  };
  tr.records.push_back(rec(st));
  for (Index it = 0; it < max_iters; ++it) {
    st = composite_steps(p, st, s);
    tr.records.push_back(rec(st));
  }
  tr.x_final = st.x;
  tr.y_final = st.y;
  return tr;
}

}  // namespace papa
