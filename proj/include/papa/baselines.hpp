#pragma once

#include "papa/common.hpp"
#include "papa/linear_map.hpp"
#include "papa/problem.hpp"
#include "papa/solver.hpp"
#include "papa/trace.hpp"

#include <chrono>
#include <optional>

namespace papa {

enum class Baseline { cp_plain, cp_scvx, vu_condat, acc_prox_grad };

inline const char* baseline_name(Baseline b) {
  switch (b) {
    case Baseline::cp_plain: return "cp";
    case Baseline::cp_scvx: return "cp-scvx";
    case Baseline::vu_condat: return "vu-condat";
    case Baseline::acc_prox_grad: return "acc-prox-grad";
  }
  return "";
}

template <typename Scalar>
struct BaselineConfig {
  Baseline method = Baseline::cp_plain;
  std::optional<Scalar> sigma, tau, theta;
  std::optional<Scalar> mu;        // cp-scvx modulus (default: g's)
  std::optional<Scalar> normK_sq;  // default: power iteration
  Index inner_iters = 25;          // acc-prox-grad inner primal-dual steps
  std::optional<Index> restart_period;
  Index max_iters = 1000;
  bool record_timing = false;
};

template <typename Scalar>
struct BaselineState {
  using VecT = Vec<Scalar>;
  Index k = 0;
  VecT y, y_bar, u;  // primal, extrapolated primal, dual
  VecT v;            // acc-prox-grad extrapolated point
  VecT inner_u;      // acc-prox-grad warm-started inner dual
  Scalar sigma = 0, tau = 0, theta = 1, t = 1;
};

template <typename Scalar>
struct BaselineSettings : BaselineConfig<Scalar> {
  Scalar sigma0 = 0, tau0 = 0, theta_v = 1, mu_v = 0, normK = 0, L_h = 0;
};

template <typename Scalar>
BaselineSettings<Scalar> resolve_baseline(const CompositeProblem<Scalar>& p,
                                          const BaselineConfig<Scalar>& cfg) {
  BaselineSettings<Scalar> s;
  static_cast<BaselineConfig<Scalar>&>(s) = cfg;
  s.normK = cfg.normK_sq ? *cfg.normK_sq : op_norm_sq(p.K);
  s.theta_v = cfg.theta ? *cfg.theta : Scalar(1);
  if (p.h) s.L_h = p.h->lipschitz;
  const std::string name = baseline_name(cfg.method);
  switch (cfg.method) {
    case Baseline::cp_plain:
    case Baseline::cp_scvx: {
      if (p.h) throw ConfigError(name + ": smooth term h not supported; use vu-condat");
      if (cfg.method == Baseline::cp_plain) {
        const Scalar d = s.normK > 0 ? Scalar(1) / (2 * s.normK) : Scalar(0);
        s.sigma0 = cfg.sigma ? *cfg.sigma : d;
        s.tau0 = cfg.tau ? *cfg.tau : d;
      } else {
        s.mu_v = cfg.mu ? *cfg.mu : p.g.mu;
        if (!(s.mu_v > 0)) throw ConfigError(name + ": requires a strongly convex g");
        const Scalar d = s.normK > 0 ? Scalar(1) / std::sqrt(s.normK) : Scalar(0);
        s.tau0 = cfg.tau ? *cfg.tau : d;
        s.sigma0 = cfg.sigma ? *cfg.sigma : (s.tau0 > 0 ? d : Scalar(0));
      }
      if (!(s.sigma0 > 0 && s.tau0 > 0))
        throw ConfigError(name + ": step sizes must be positive (give sigma and tau for a zero operator)");
      if (detail::exceeds(s.sigma0 * s.tau0 * s.normK, Scalar(1)))
        throw ConfigError(name + ": step condition sigma*tau*‖K‖² <= 1 violated");
      break;
    }
    case Baseline::vu_condat: {
      if (!cfg.tau && !(s.L_h > 0))
        throw ConfigError(name + ": needs tau when h is absent");
      s.tau0 = cfg.tau ? *cfg.tau : Scalar(0.089) / s.L_h;
      s.sigma0 = cfg.sigma ? *cfg.sigma : (1 / s.tau0 - s.L_h / 2) / s.normK;
      if (!(s.sigma0 > 0 && s.tau0 > 0))
        throw ConfigError(name + ": step sizes must be positive");
      if (detail::exceeds(s.L_h / 2, 1 / s.tau0 - s.sigma0 * s.normK))
        throw ConfigError(name + ": step condition 1/tau - sigma*‖K‖² >= L_h/2 violated");
      break;
    }
    case Baseline::acc_prox_grad: {
      if (!p.h || !(s.L_h > 0))
        throw ConfigError(name + ": requires a smooth term with known Lipschitz constant");
      if (cfg.inner_iters < 1 && p.f.kind != ProxKind::zero)
        throw ConfigError(name + ": inner iteration count must be positive");
      break;
    }
  }
  return s;
}

template <typename Scalar>
BaselineState<Scalar> baseline_init(const CompositeProblem<Scalar>& p,
                                    const BaselineSettings<Scalar>& s,
                                    const Vec<Scalar>& y0) {
  BaselineState<Scalar> st;
  st.y = st.y_bar = st.v = y0;
  st.u = Vec<Scalar>::Zero(p.K.rows());
  st.inner_u = Vec<Scalar>::Zero(p.K.rows());
  st.sigma = s.sigma0;
  st.tau = s.tau0;
  st.theta = s.theta_v;
  st.t = 1;
  return st;
}

// Primal-dual hybrid gradient for min f(Ky) + g(y), dual step first:
//   u⁺ = prox_{σf*}(u + σKȳ),  y⁺ = prox_{τg}(y − τKᵀu⁺),  ȳ⁺ = y⁺ + θ(y⁺ − y).
// The strongly convex mode updates θ = 1/√(1 + 2μτ), τ ← θτ, σ ← σ/θ after
// each step (Chambolle and Pock 2011, Algorithm 2).
template <typename Scalar>
BaselineState<Scalar> cp_step(const CompositeProblem<Scalar>& p,
                              const BaselineState<Scalar>& st,
                              const BaselineSettings<Scalar>& s) {
  using VecT = Vec<Scalar>;
  BaselineState<Scalar> nx = st;
  nx.u = conj_prox(p.f, st.sigma, VecT(st.u + st.sigma * p.K.apply(st.y_bar)));
  nx.y = prox(p.g, st.tau, VecT(st.y - st.tau * p.K.adjoint_apply(nx.u)));
  Scalar theta = s.theta_v;
  if (s.method == Baseline::cp_scvx) {
    theta = 1 / std::sqrt(1 + 2 * s.mu_v * st.tau);
    nx.tau = theta * st.tau;
    nx.sigma = st.sigma / theta;
  }
  nx.theta = theta;
  nx.y_bar = nx.y + theta * (nx.y - st.y);
  ++nx.k;
  return nx;
}

// Primal-dual splitting with a gradient step on h:
//   ỹ = prox_{τg}(y − τ(∇h(y) + Kᵀu)),  ũ = prox_{σf*}(u + σK(2ỹ − y)),
//   (y, u) ← (1 − θ)(y, u) + θ(ỹ, ũ).
template <typename Scalar>
BaselineState<Scalar> vu_condat_step(const CompositeProblem<Scalar>& p,
                                     const BaselineState<Scalar>& st,
                                     const BaselineSettings<Scalar>& s) {
  using VecT = Vec<Scalar>;
  VecT grad = p.K.adjoint_apply(st.u);
  if (p.h) grad += p.h->gradient(st.y);
  const VecT yt = prox(p.g, st.tau, VecT(st.y - st.tau * grad));
  const VecT ut =
      conj_prox(p.f, st.sigma, VecT(st.u + st.sigma * p.K.apply(VecT(2 * yt - st.y))));
  BaselineState<Scalar> nx = st;
  const Scalar th = s.theta_v;
  if (th == Scalar(1)) {
    nx.y = yt;
    nx.u = ut;
  } else {
    nx.y = (1 - th) * st.y + th * yt;
    nx.u = (1 - th) * st.u + th * ut;
  }
  nx.y_bar = nx.y;
  ++nx.k;
  return nx;
}

namespace detail {

// argmin_z f(Kz) + g(z) + (L/2)‖z − w‖² by a fixed number of primal-dual
// steps, warm-starting the dual variable `u`.
template <typename Scalar>
Vec<Scalar> inner_prox(const CompositeProblem<Scalar>& p, Scalar L,
                       const Vec<Scalar>& w, Vec<Scalar>& u, Index iters,
                       Scalar normK) {
  using VecT = Vec<Scalar>;
  const Scalar step = normK > 0 ? Scalar(1) / std::sqrt(normK) : Scalar(1);
  VecT z = w, z_bar = w;
  for (Index i = 0; i < iters; ++i) {
    u = conj_prox(p.f, step, VecT(u + step * p.K.apply(z_bar)));
    const VecT a = z - step * p.K.adjoint_apply(u);
    const VecT c = (a + step * L * w) / (1 + step * L);
    const VecT zn = p.g.kind == ProxKind::zero ? c : prox(p.g, step / (1 + step * L), c);
    z_bar = 2 * zn - z;
    z = zn;
  }
  return z;
}

}  // namespace detail

// FISTA on h + (g + f∘K). When f is the zero function the prox of g is exact;
// otherwise it is approximated by `inner_iters` primal-dual steps.
template <typename Scalar>
BaselineState<Scalar> acc_prox_grad_step(const CompositeProblem<Scalar>& p,
                                         const BaselineState<Scalar>& st,
                                         const BaselineSettings<Scalar>& s) {
  using VecT = Vec<Scalar>;
  const Scalar L = s.L_h;
  const VecT w = st.v - p.h->gradient(st.v) / L;
  BaselineState<Scalar> nx = st;
  if (p.f.kind == ProxKind::zero) {
    nx.y = prox(p.g, Scalar(1) / L, w);
  } else {
    nx.y = detail::inner_prox(p, L, w, nx.inner_u, s.inner_iters, s.normK);
  }
  const Scalar t1 = (1 + std::sqrt(1 + 4 * st.t * st.t)) / 2;
  nx.v = nx.y + ((st.t - 1) / t1) * (nx.y - st.y);
  nx.t = t1;
  ++nx.k;
  if (s.restart_period && nx.k % *s.restart_period == 0) {
    nx.t = 1;
    nx.v = nx.y;
  }
  nx.y_bar = nx.y;
  return nx;
}

template <typename Scalar>
BaselineState<Scalar> baseline_step(const CompositeProblem<Scalar>& p,
                                    const BaselineState<Scalar>& st,
                                    const BaselineSettings<Scalar>& s) {
  switch (s.method) {
    case Baseline::cp_plain:
    case Baseline::cp_scvx: return cp_step(p, st, s);
    case Baseline::vu_condat: return vu_condat_step(p, st, s);
    case Baseline::acc_prox_grad: return acc_prox_grad_step(p, st, s);
  }
  return st;
}

// Runs a baseline on a template instance with A = ±I and K = {0}; the trace
// reports the template quantities at x = x(y).
template <typename Scalar>
ConvergenceTrace<Scalar> run_baseline(const ProblemInstance<Scalar>& p,
                                      const BaselineConfig<Scalar>& cfg,
                                      std::optional<Vec<Scalar>> y0 = std::nullopt,
                                      BaselineState<Scalar>* final_state = nullptr) {
  const CompositeProblem<Scalar> cp = to_composite(p);
  const BaselineSettings<Scalar> s = resolve_baseline(cp, cfg);
  BaselineState<Scalar> st =
      baseline_init(cp, s, y0 ? *y0 : Vec<Scalar>(Vec<Scalar>::Zero(p.p2())));

  ConvergenceTrace<Scalar> tr;
  tr.method = baseline_name(cfg.method);
  tr.normB_sq = s.normK;
  tr.L_h = s.L_h;
  tr.y0 = st.y;
  tr.x0 = eliminated_x(p, st.y);
  const auto t0 = std::chrono::steady_clock::now();
  auto rec = [&](const BaselineState<Scalar>& z) {
    const double ms =
        s.record_timing
            ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()
            : 0.0;
    TraceRecord<Scalar> r;
    r.k = z.k;
    const Vec<Scalar> x = eliminated_x(p, z.y);
    r.objective = objective(p, x, z.y);
    r.original = original_objective(p, x, z.y);
    r.feasibility = feasibility(p, x, z.y);
    r.rho = z.sigma;
    r.tau = z.tau;
    r.wall_ms = ms;
    return r;
  };
  tr.records.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
  tr.records.push_back(rec(st));
  for (Index it = 0; it < cfg.max_iters; ++it) {
    st = baseline_step(cp, st, s);
    tr.records.push_back(rec(st));
  }
  tr.x_final = eliminated_x(p, st.y);
  tr.y_final = st.y;
  if (final_state) *final_state = st;
  return tr;
}

}  // namespace papa
