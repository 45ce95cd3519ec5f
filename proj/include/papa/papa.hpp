#pragma once

#include "papa/common.hpp"
#include "papa/penalty.hpp"
#include "papa/problem.hpp"
#include "papa/schedule.hpp"
#include "papa/solver.hpp"
#include "papa/trace.hpp"

#include <chrono>
#include <sstream>

namespace papa {

enum class ThreeTermVariant { alg1, alg2_case_i, alg2_case_ii, alg2_option2 };

// y-update for F = f + g + h. Returns y^{k+1} (alg1, option2) or ỹ^{k+1}
// (cases i and ii); `grad_psi_y` is ∇_yψ(x^{k+1}, ŷ^k).
template <typename Scalar>
Vec<Scalar> three_term_y_step(const ProblemInstance<Scalar>& p,
                              const SolverState<Scalar>& st,
                              const Settings<Scalar>& s, ThreeTermVariant v,
                              const Vec<Scalar>& grad_psi_y) {
  if (!p.h) throw ConfigError("three_term_y_step: problem has no smooth term h");
  const Scalar L = s.normB, rho = st.rho, tau = st.tau, Lh = s.L_h;
  switch (v) {
    case ThreeTermVariant::alg1:
    case ThreeTermVariant::alg2_option2: {
      const Scalar beta = L * rho + Lh;
      const Vec<Scalar> arg =
          st.y_hat - (p.h->gradient(st.y_hat) + rho * grad_psi_y) / beta;
      return prox(p.g, Scalar(1) / beta, arg);
    }
    case ThreeTermVariant::alg2_case_i: {
      const Scalar beta = rho * L + Lh;
      const Vec<Scalar> arg =
          st.y_tilde - (p.h->gradient(st.y_hat) + rho * grad_psi_y) / (tau * beta);
      return prox(p.g, Scalar(1) / (tau * beta), arg);
    }
    case ThreeTermVariant::alg2_case_ii: {
      const Scalar beta = rho * L + Lh / tau;
      const Vec<Scalar> arg =
          st.y_tilde - (p.h->gradient(st.y_tilde) + rho * grad_psi_y) / (tau * beta);
      return prox(p.g, Scalar(1) / (tau * beta), arg);
    }
  }
  return st.y;
}

namespace detail {

// x^{k+1} and ∇_yψ used by the y-step. The linearized mode takes a prox-linear
// step from x̂ and evaluates ∇_yψ at (x̂, ŷ).
template <typename Scalar>
std::pair<Vec<Scalar>, Vec<Scalar>> x_step(const ProblemInstance<Scalar>& p,
                                           const SolverState<Scalar>& st,
                                           const Settings<Scalar>& s,
                                           Scalar gamma) {
  if (s.x_mode == XMode::exact) {
    Vec<Scalar> x = p.exact_x_solver(st.x_hat, st.y_hat, st.rho, gamma, st.lambda0);
    auto ev = psi_val_grad(p.constraint, st.rho, x, st.y_hat, st.lambda0);
    return {std::move(x), std::move(ev.grad_y)};
  }
  auto ev = psi_val_grad(p.constraint, st.rho, st.x_hat, st.y_hat, st.lambda0);
  const Scalar gh = st.rho * s.normA + gamma;
  Vec<Scalar> x = prox(p.f, Scalar(1) / gh,
                       Vec<Scalar>(st.x_hat - (st.rho / gh) * ev.grad_x));
  return {std::move(x), std::move(ev.grad_y)};
}

}  // namespace detail

// One step of the non-strongly convex method (k/(k+2) momentum,
// ρ_k = ρ₀(k+1), γ_k = γ₀(k+1)).
template <typename Scalar>
SolverState<Scalar> papa_iterate(const ProblemInstance<Scalar>& p,
                                 const SolverState<Scalar>& st,
                                 const Settings<Scalar>& s) {
  const Index k = st.k_local;
  auto [x, gy] = detail::x_step(p, st, s, st.gamma);
  Vec<Scalar> y =
      p.h ? three_term_y_step(p, st, s, ThreeTermVariant::alg1, gy)
          : prox(p.g, Scalar(1) / (st.rho * s.normB),
                 Vec<Scalar>(st.y_hat - gy / s.normB));

  SolverState<Scalar> nx = st;
  if (s.accelerate) {
    const Scalar beta = Scalar(k) / Scalar(k + 2);
    nx.x_tilde = st.x_tilde + (x - st.x_hat) / st.tau;
    nx.y_tilde = st.y_tilde + (y - st.y_hat) / st.tau;
    nx.x_hat = x + beta * (x - st.x);
    nx.y_hat = y + beta * (y - st.y);
  } else {
    nx.x_tilde = nx.x_hat = x;
    nx.y_tilde = nx.y_hat = y;
  }
  nx.x = std::move(x);
  nx.y = std::move(y);
  nx.rho_prev = st.rho;
  nx.rho = s.rho0_v * Scalar(k + 2);
  nx.gamma = s.gamma0_v * Scalar(k + 2);
  nx.tau = Scalar(1) / Scalar(k + 2);
  ++nx.k;
  ++nx.k_local;
  return nx;
}

// One step of the semi-strongly convex method. The state keeps
// ŷ = (1 − τ)y + τỹ for the current τ.
template <typename Scalar>
SolverState<Scalar> scvx_iterate(const ProblemInstance<Scalar>& p,
                                 const SolverState<Scalar>& st,
                                 const Settings<Scalar>& s) {
  const Scalar tau = st.tau, rho = st.rho, L = s.normB;
  Scalar tau1, rho1;
  if (s.tau_rule == TauRule::standard) {
    tau1 = tau_next(tau);
    rho1 = rho / (1 - tau1);
  } else {
    std::tie(tau1, rho1) = tighter_tau_rho_next(tau, rho, s.mu_g_v, L);
  }

  auto [x, gy] = detail::x_step(p, st, s, s.gamma0_v);

  Vec<Scalar> yt;
  if (p.h) {
    yt = three_term_y_step(p, st, s,
                           s.case_v == ThreeTermCase::case_ii
                               ? ThreeTermVariant::alg2_case_ii
                               : ThreeTermVariant::alg2_case_i,
                           gy);
  } else {
    yt = prox(p.g, Scalar(1) / (tau * rho * L),
              Vec<Scalar>(st.y_tilde - gy / (tau * L)));
  }

  Vec<Scalar> y;
  if (s.option == StepOption::averaging) {
    y = (1 - tau) * st.y + tau * yt;
  } else if (p.h) {
    y = three_term_y_step(p, st, s, ThreeTermVariant::alg2_option2, gy);
  } else {
    y = prox(p.g, Scalar(1) / (rho * L), Vec<Scalar>(st.y_hat - gy / L));
  }

  SolverState<Scalar> nx = st;
  nx.x_tilde = st.x_tilde + (x - st.x_hat) / tau;
  nx.x_hat = x + (tau1 * (1 - tau) / tau) * (x - st.x);
  nx.y_tilde = std::move(yt);
  nx.y_hat = (1 - tau1) * y + tau1 * nx.y_tilde;
  nx.x = std::move(x);
  nx.y = std::move(y);
  nx.rho_prev = rho;
  nx.rho = rho1;
  nx.tau = tau1;
  ++nx.k;
  ++nx.k_local;
  return nx;
}

// Conic form: f = δ_C, g = ⟨q, ·⟩, A = I, K = {0}.
template <typename Scalar>
void check_conic_shape(const ProblemInstance<Scalar>& p) {
  if (!p.f.is_indicator() || p.g.kind != ProxKind::linear ||
      p.constraint.A.identity_sign() != 1 ||
      p.constraint.K.kind != SetKind::singleton_zero || p.h)
    throw ConfigError(
        "conic_iterate: requires f = indicator, g linear, A = identity, K = {0}");
}

template <typename Scalar>
SolverState<Scalar> conic_iterate(const ProblemInstance<Scalar>& p,
                                  const SolverState<Scalar>& st,
                                  const Settings<Scalar>& s) {
  check_conic_shape(p);
  const Index k = st.k_local;
  const auto& B = p.constraint.B;
  const auto& c = p.constraint.c;
  const Vec<Scalar> By = B.apply(st.y_hat);
  Vec<Scalar> x = prox(p.f, Scalar(1), Vec<Scalar>(c - By));
  Vec<Scalar> y = st.y_hat - (p.g.q + st.rho * B.adjoint_apply(Vec<Scalar>(x + By - c))) /
                                 (st.rho * s.normB);
  SolverState<Scalar> nx = st;
  const Scalar beta = Scalar(k) / Scalar(k + 2);
  nx.x_tilde = st.x_tilde + (x - st.x_hat) / st.tau;
  nx.y_tilde = st.y_tilde + (y - st.y_hat) / st.tau;
  nx.x_hat = x + beta * (x - st.x);
  nx.y_hat = y + beta * (y - st.y);
  nx.x = std::move(x);
  nx.y = std::move(y);
  nx.rho_prev = st.rho;
  nx.rho = s.rho0_v * Scalar(k + 2);
  nx.tau = Scalar(1) / Scalar(k + 2);
  ++nx.k;
  ++nx.k_local;
  return nx;
}

// Restart: update the shift λ⁰ from s = w − proj_K(w), w = Ax⁺ + Bŷ − c + λ⁰/ρ,
// where x⁺ is the next x-step from the current state, then reset the
// schedule and the prox centers.
template <typename Scalar>
SolverState<Scalar> restart(const SolverState<Scalar>& st,
                            const Settings<Scalar>& s,
                            const ProblemInstance<Scalar>& p) {
  const Scalar gamma = s.algorithm == Algorithm::scvx ? s.gamma0_v : st.gamma;
  const Vec<Scalar> xp = detail::x_step(p, st, s, gamma).first;
  const auto ev = psi_val_grad(p.constraint, st.rho, xp, st.y_hat, st.lambda0);
  SolverState<Scalar> nx = st;
  nx.lambda0 = s.shift_update == ShiftUpdate::additive ? Vec<Scalar>(st.lambda0 + st.rho * ev.s)
                                                        : Vec<Scalar>(st.rho * ev.s);
  nx.rho = s.rho0_v;
  nx.rho_prev = 0;
  nx.tau = 1;
  nx.gamma = s.gamma0_v;
  nx.x_hat = nx.x_tilde = st.x;
  nx.y_hat = nx.y_tilde = st.y;
  nx.k_local = 0;
  ++nx.restarts;
  return nx;
}

// Per-iteration inequalities between consecutive states, evaluated against
// the problem's reference saddle point with the unshifted penalty.
template <typename Scalar>
DiagnosticReport<Scalar> diagnostics_descent(const ProblemInstance<Scalar>& p,
                                             const Settings<Scalar>& s,
                                             const SolverState<Scalar>& pre,
                                             const SolverState<Scalar>& post) {
  if (!p.reference) throw ConfigError("diagnostics_descent: problem has no reference");
  const auto& ref = *p.reference;
  const auto& con = p.constraint;
  const Scalar tau = pre.tau, rho = pre.rho, L = s.normB;
  const Scalar Fs = ref.f_star;

  DiagnosticReport<Scalar> r;
  r.k = pre.k;
  r.tolerance = Scalar(1e-8) * (1 + std::abs(Fs));

  const Vec<Scalar> sk = grad_phi(con.K, residual(con, pre.x, pre.y));
  const Vec<Scalar> sh = grad_phi(con.K, residual(con, post.x, pre.y_hat));
  const Vec<Scalar> gx = con.A.adjoint_apply(sh), gy = con.B.adjoint_apply(sh);
  const Scalar psi_hat = sh.squaredNorm() / 2;
  auto ell = [&](const Vec<Scalar>& x, const Vec<Scalar>& y) {
    return psi_hat + gx.dot(x - post.x) + gy.dot(y - pre.y_hat);
  };
  const Scalar psi_k = sk.squaredNorm() / 2;
  const Scalar psi_next = psi(con, post.x, post.y);

  r.lemma4_star = -sh.squaredNorm() / 2 - ell(ref.x_star, ref.y_star);
  r.lemma4_prev = psi_k - (sk - sh).squaredNorm() / 2 - ell(pre.x, pre.y);
  const Vec<Scalar> dy = post.y - pre.y_hat;
  r.model_upper = psi_hat + gy.dot(dy) + L / 2 * dy.squaredNorm() - psi_next;

  const Scalar mu = s.algorithm == Algorithm::scvx ? s.mu_g_v : Scalar(0);
  const Scalar gamma = s.algorithm == Algorithm::scvx ? s.gamma0_v : pre.gamma;
  const Scalar phi_new = objective(p, post.x, post.y) + rho * psi_next;
  const Scalar phi_old =
      tau == Scalar(1) ? Scalar(0) : objective(p, pre.x, pre.y) + pre.rho_prev * psi_k;
  const Scalar rhs =
      (1 - tau) * phi_old + tau * Fs +
      gamma * tau * tau / 2 *
          ((pre.x_tilde - ref.x_star).squaredNorm() -
           (post.x_tilde - ref.x_star).squaredNorm()) +
      rho * tau * tau * L / 2 * (pre.y_tilde - ref.y_star).squaredNorm() -
      (rho * tau * tau * L + mu * tau) / 2 * (post.y_tilde - ref.y_star).squaredNorm() -
      (1 - tau) / 2 * (pre.rho_prev - rho * (1 - tau)) * sk.squaredNorm();
  r.key_estimate = rhs - phi_new;
  r.interpolation = (pre.x_hat - (1 - tau) * pre.x - tau * pre.x_tilde).norm();

  auto check = [&](const char* name, Scalar slack) {
    if (slack < -r.tolerance) {
      std::ostringstream os;
      os << name << " violated at k=" << pre.k << " by " << -slack;
      r.failures.push_back(os.str());
    }
  };
  check("lemma4 star bound", r.lemma4_star);
  check("lemma4 previous-iterate bound", r.lemma4_prev);
  check("quadratic model upper bound", r.model_upper);
  check("key estimate", r.key_estimate);
  check("interpolation identity", -r.interpolation);
  return r;
}

template <typename Scalar>
TraceRecord<Scalar> make_record(const ProblemInstance<Scalar>& p,
                                const Vec<Scalar>& x, const Vec<Scalar>& y,
                                Index k, Scalar rho, Scalar tau, double wall_ms) {
  TraceRecord<Scalar> r;
  r.k = k;
  r.objective = objective(p, x, y);
  r.original = original_objective(p, x, y);
  r.dist = dist(p.constraint.K, residual(p.constraint, x, y));
  r.psi = r.dist * r.dist / 2;
  r.feasibility = feasibility(p, x, y);
  r.rho = rho;
  r.tau = tau;
  r.wall_ms = wall_ms;
  return r;
}

inline const char* method_name(Algorithm a) {
  switch (a) {
    case Algorithm::papa: return "papa";
    case Algorithm::scvx: return "scvx-papa";
    case Algorithm::conic: return "papa-conic";
  }
  return "";
}

template <typename Scalar>
SolverState<Scalar> iterate(const ProblemInstance<Scalar>& p,
                            const SolverState<Scalar>& st,
                            const Settings<Scalar>& s) {
  switch (s.algorithm) {
    case Algorithm::papa: return papa_iterate(p, st, s);
    case Algorithm::scvx: return scvx_iterate(p, st, s);
    case Algorithm::conic: return conic_iterate(p, st, s);
  }
  return st;
}

// Iterate, restart when due, and record one trace row per iterate.
template <typename Scalar>
ConvergenceTrace<Scalar> run(const ProblemInstance<Scalar>& p,
                             const SolverConfig<Scalar>& cfg,
                             std::optional<Vec<Scalar>> x0 = std::nullopt,
                             std::optional<Vec<Scalar>> y0 = std::nullopt) {
  const Settings<Scalar> s = resolve(p, cfg);
  if (s.algorithm == Algorithm::conic) check_conic_shape(p);
  SolverState<Scalar> st = init_state(p, s, std::move(x0), std::move(y0));

  ConvergenceTrace<Scalar> tr;
  tr.method = method_name(s.algorithm);
  tr.notes = s.notes;
  tr.rho0 = s.rho0_v;
  tr.gamma0 = s.gamma0_v;
  tr.mu_g = s.mu_g_v;
  tr.normA_sq = s.normA;
  tr.normB_sq = s.normB;
  tr.L_h = s.L_h;
  tr.x0 = st.x;
  tr.y0 = st.y;

  const bool diag = s.record_diagnostics && p.reference && s.x_mode == XMode::exact &&
                    s.accelerate && !p.h && s.algorithm != Algorithm::conic;
  if (s.record_diagnostics && !diag)
    tr.notes.push_back(p.reference ? "diagnostics not applicable to this configuration"
                                   : "diagnostics skipped: no reference solution");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    if (!s.record_timing) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  tr.records.reserve(static_cast<std::size_t>(s.max_iters) + 1);
  tr.records.push_back(make_record(p, st.x, st.y, 0, st.rho, st.tau, elapsed()));
  for (Index it = 0; it < s.max_iters; ++it) {
    SolverState<Scalar> nx = iterate(p, st, s);
    if (diag && st.restarts == 0) {
      auto rep = diagnostics_descent(p, s, st, nx);
      for (const auto& f : rep.failures) tr.notes.push_back(f);
      tr.diagnostics.push_back(std::move(rep));
    }
    st = std::move(nx);
    tr.records.push_back(
        make_record(p, st.x, st.y, st.k, st.rho, st.tau, elapsed()));
    if (s.restart_period && st.k_local == *s.restart_period && it + 1 < s.max_iters)
      st = restart(st, s, p);
  }
  tr.x_final = st.x;
  tr.y_final = st.y;
  tr.restarts = st.restarts;
  return tr;
}

}  // namespace papa
