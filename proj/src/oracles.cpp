#include "papa/oracles.hpp"

#include "papa/baselines.hpp"
#include "papa/papa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace papa {

namespace {

using VecT = Vec<double>;
using MatT = Mat<double>;

enum class Side { lower, upper };

struct ActiveRow {
  Index row;
  Side side;
};

struct KktSolution {
  VecT y, lambda;  // λ over all n rows, zero off the working set
  double residual = 0;
};

// [Q  B_Wᵀ; B_W  0][y; λ_W] = [−q; bnd_W]
KktSolution solve_kkt(const QpData& d, const std::vector<ActiveRow>& W) {
  const Index p = d.Q.rows(), w = Index(W.size());
  MatT K = MatT::Zero(p + w, p + w);
  VecT rhs(p + w);
  K.topLeftCorner(p, p) = d.Q;
  rhs.head(p) = -d.q;
  for (Index i = 0; i < w; ++i) {
    const auto& a = W[std::size_t(i)];
    K.block(p + i, 0, 1, p) = d.B.row(a.row);
    K.block(0, p + i, p, 1) = d.B.row(a.row).transpose();
    rhs[p + i] = a.side == Side::upper ? d.upper[a.row] : d.lower[a.row];
  }
  Eigen::CompleteOrthogonalDecomposition<MatT> cod(K);
  const VecT sol = cod.solve(rhs);
  KktSolution out;
  out.residual = (K * sol - rhs).lpNorm<Eigen::Infinity>() / (1.0 + rhs.lpNorm<Eigen::Infinity>());
  out.y = sol.head(p);
  out.lambda = VecT::Zero(d.B.rows());
  for (Index i = 0; i < w; ++i) out.lambda[W[std::size_t(i)].row] = sol[p + i];
  return out;
}

double qp_value(const QpData& d, const VecT& y) {
  return 0.5 * y.dot(d.Q * y) + d.q.dot(y);
}

Reference<double> make_reference(const ProblemInstance<double>& qp, const QpData& d,
                                 const KktSolution& s, const char* source) {
  Reference<double> r;
  r.y_star = s.y;
  r.x_star = d.B * s.y;
  r.lambda_star = s.lambda;
  r.f_star = qp_value(d, s.y);
  Eigen::SelfAdjointEigenSolver<MatT> eig(d.Q, Eigen::EigenvaluesOnly);
  r.unique = eig.eigenvalues().minCoeff() > 1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff());
  r.source = source;
  const double kkt = kkt_residual(qp, r);
  const double scale = 1.0 + s.lambda.lpNorm<Eigen::Infinity>() + s.y.lpNorm<Eigen::Infinity>();
  if (!(kkt <= 1e-10 * scale))
    throw OracleError(std::string(source) + ": KKT residual " + std::to_string(kkt) +
                      " exceeds tolerance");
  return r;
}

// Primal violation of row i (positive when outside [a, b]) and the side hit.
std::pair<double, Side> violation(const QpData& d, const VecT& By, Index i) {
  const double over = By[i] - d.upper[i], under = d.lower[i] - By[i];
  return over >= under ? std::make_pair(over, Side::upper) : std::make_pair(under, Side::lower);
}

}  // namespace

Reference<double> qp_reference_oracle(const ProblemInstance<double>& qp) {
  const QpData d = qp_data(qp);
  const Index n = d.B.rows();
  if (n > 12) throw ConfigError("qp_reference_oracle: enumeration limited to n <= 12");
  Index patterns = 1;
  for (Index i = 0; i < n; ++i) patterns *= 3;

  const double tol = 1e-9;
  double best = std::numeric_limits<double>::infinity();
  KktSolution best_sol;
  std::vector<ActiveRow> W;
  for (Index code = 0; code < patterns; ++code) {
    W.clear();
    Index c = code;
    for (Index i = 0; i < n; ++i, c /= 3) {
      if (c % 3 == 1) W.push_back({i, Side::lower});
      if (c % 3 == 2) W.push_back({i, Side::upper});
    }
    KktSolution s = solve_kkt(d, W);
    if (s.residual > tol) continue;
    const VecT By = d.B * s.y;
    const double scale = 1.0 + By.lpNorm<Eigen::Infinity>();
    bool ok = true;
    for (Index i = 0; i < n && ok; ++i)
      ok = By[i] >= d.lower[i] - tol * scale && By[i] <= d.upper[i] + tol * scale;
    for (const auto& a : W) {
      if (!ok) break;
      const double l = s.lambda[a.row];
      ok = a.side == Side::upper ? l >= -tol : l <= tol;
    }
    if (!ok) continue;
    const double v = qp_value(d, s.y);
    if (v < best) {
      best = v;
      best_sol = std::move(s);
    }
  }
  if (!std::isfinite(best))
    throw OracleError("qp_reference_oracle: no KKT-consistent activity pattern");
  return make_reference(qp, d, best_sol, "enumeration");
}

Reference<double> qp_active_set_oracle(const ProblemInstance<double>& qp,
                                       const VecT& y_start, double active_tol) {
  const QpData d = qp_data(qp);
  const Index n = d.B.rows();
  check_length(d.Q.rows(), y_start.size(), "qp_active_set_oracle: y_start");
  std::vector<ActiveRow> W;
  const VecT By0 = d.B * y_start;
  for (Index i = 0; i < n; ++i) {
    const double s = active_tol * (1.0 + std::abs(By0[i]));
    if (By0[i] >= d.upper[i] - s) W.push_back({i, Side::upper});
    else if (By0[i] <= d.lower[i] + s) W.push_back({i, Side::lower});
  }

  const double tol = 1e-11;
  for (Index it = 0; it < 20 * (n + 1); ++it) {
    KktSolution s = solve_kkt(d, W);
    const VecT By = d.B * s.y;
    double worst_p = 0, worst_d = 0;
    Index ip = -1, id = -1;
    Side side = Side::lower;
    std::vector<bool> in_w(std::size_t(n), false);
    for (const auto& a : W) in_w[std::size_t(a.row)] = true;
    for (Index i = 0; i < n; ++i) {
      if (in_w[std::size_t(i)]) continue;
      auto [v, sd] = violation(d, By, i);
      if (v > worst_p) {
        worst_p = v;
        ip = i;
        side = sd;
      }
    }
    for (std::size_t j = 0; j < W.size(); ++j) {
      const double l = s.lambda[W[j].row];
      const double wrong = W[j].side == Side::upper ? -l : l;
      if (wrong > worst_d) {
        worst_d = wrong;
        id = Index(j);
      }
    }
    if (s.residual <= 1e-9 && worst_p <= tol * (1.0 + By.lpNorm<Eigen::Infinity>()) &&
        worst_d <= tol)
      return make_reference(qp, d, s, "active-set");
    if (worst_d >= worst_p && id >= 0) {
      W.erase(W.begin() + id);
    } else if (ip >= 0) {
      W.push_back({ip, side});
    } else {
      break;
    }
  }
  throw OracleError("qp_active_set_oracle: working-set iteration did not terminate");
}

CrosscheckResult fstar_crosscheck_oracle(const ProblemInstance<double>& p, Index budget) {
  if (budget <= 0) throw ConfigError("fstar_crosscheck_oracle: budget must be positive");
  const int sigma = p.constraint.A.identity_sign();
  if (sigma == 0 || p.constraint.K.kind != SetKind::singleton_zero)
    throw ConfigError("fstar_crosscheck_oracle: requires A = ±identity and K = {0}");

  SolverConfig<double> a;
  BaselineConfig<double> b;
  a.max_iters = b.max_iters = budget;
  BaselineConfig<double> c;  // second method when h is present
  if (p.h) {
    // Vu-Condat with long steps against accelerated proximal gradient with
    // a tightly solved inner prox; both approach F* from above.
    const auto cp = to_composite(p);
    const double L = p.h->lipschitz, nK = op_norm_sq(cp.K);
    if (!(L > 0)) throw ConfigError("fstar_crosscheck_oracle: smooth term needs L_h > 0");
    b.method = Baseline::vu_condat;
    b.normK_sq = nK;
    b.tau = 0.8 / L;
    b.sigma = (1.0 / *b.tau - L / 2) / (2 * nK);
    c.method = Baseline::acc_prox_grad;
    c.inner_iters = 200;
    c.restart_period = 50;
    c.max_iters = std::max<Index>(1, budget / 20);
  } else if (p.g.mu > 0) {
    a.algorithm = Algorithm::scvx;
    a.restart_period = 100;
    b.method = Baseline::cp_scvx;
  } else {
    a.algorithm = Algorithm::papa;
    a.restart_period = 50;
    b.method = Baseline::cp_plain;
  }
  const auto ta = p.h ? run_baseline(p, c) : run(p, a);
  BaselineState<double> sb;
  const auto tb = run_baseline(p, b, std::optional<VecT>{}, &sb);

  CrosscheckResult out;
  out.method_a = ta.method + (!p.h && a.restart_period ? "-rs" : "");
  out.method_b = tb.method;
  const double pa = ta.final_record().original, pb = tb.final_record().original;
  auto& r = out.reference;
  const bool use_a = pa <= pb;
  r.f_star = std::min(pa, pb);
  r.y_star = use_a ? ta.y_final : tb.y_final;
  r.x_star = eliminated_x(p, r.y_star);
  r.lambda_star = double(sigma) * sb.u;
  out.gap = std::abs(pa - pb);
  r.f_star_error = out.gap;
  r.unique = p.g.mu > 0;
  r.source = "crosscheck:" + out.method_a + "/" + out.method_b;
  out.low_confidence = out.gap > 1e-6 * std::max(1.0, std::abs(r.f_star));
  return out;
}

}  // namespace papa
