#include "support.hpp"

#include "papa/baselines.hpp"
#include "papa/oracles.hpp"
#include "papa/problems.hpp"

#include <doctest.h>

using namespace papa;
using namespace papa::testing;

namespace {

using PF = ProxFunction<double>;

// min κ‖y − d‖₁ + (μ/2)‖y‖² with K = I.
CompositeProblem<double> l1_fit(const V& d, double kappa, double mu) {
  CompositeProblem<double> cp;
  cp.K = LinearMap<double>::identity(d.size());
  cp.f = PF::l1(kappa, d.size()).shifted(d);
  cp.g = PF::squared_l2(mu);
  return cp;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("primal-dual steps match a hand transcription") {
    RandomStream rs(40, "cp");
    const V d = rand_vec(rs, 4);
    const auto cp = l1_fit(d, 0.5, 1.0);
    BaselineConfig<double> cfg;
    cfg.normK_sq = 1.0;
    const auto s = resolve_baseline(cp, cfg);
    CHECK(s.sigma0 == 0.5);
    CHECK(s.tau0 == 0.5);
    auto st = baseline_init(cp, s, V(V::Zero(4)));

    V y = V::Zero(4), yb = y, u = V::Zero(4);
    for (int k = 0; k < 30; ++k) {
      st = cp_step(cp, st, s);
      // prox of σf* for f = κ‖· − d‖₁ is clip(· − σd, ±κ).
      const V a = u + 0.5 * yb;
      u = (a - 0.5 * d).cwiseMax(-0.5).cwiseMin(0.5);
      const V yn = (y - 0.5 * u) / (1 + 0.5 * 1.0);
      yb = 2 * yn - y;
      y = yn;
      CHECK((st.y - y).norm() <= 1e-13);
      CHECK((st.u - u).norm() <= 1e-13);
    }
  }

  TEST_CASE("strongly convex step recursion keeps sigma*tau fixed") {
    RandomStream rs(41, "cp-scvx");
    const auto cp = l1_fit(rand_vec(rs, 5), 0.3, 2.0);
    BaselineConfig<double> cfg;
    cfg.method = Baseline::cp_scvx;
    const auto s = resolve_baseline(cp, cfg);
    auto st = baseline_init(cp, s, V(V::Zero(5)));
    const double prod = st.sigma * st.tau;
    CHECK(prod * s.normK == doctest::Approx(1.0));
    for (int k = 0; k < 50; ++k) {
      const double tau = st.tau;
      st = cp_step(cp, st, s);
      CHECK(st.theta == doctest::Approx(1 / std::sqrt(1 + 4.0 * tau)));
      CHECK(st.tau == doctest::Approx(st.theta * tau));
      CHECK(st.sigma * st.tau == doctest::Approx(prod));
    }
  }

  TEST_CASE("accelerated proximal gradient matches a FISTA transcription") {
    RandomStream rs(42, "fista");
    const M A = rs.normal_matrix(8, 5);
    const V b = rand_vec(rs, 8);
    CompositeProblem<double> cp;
    cp.K = LinearMap<double>::identity(5);
    cp.f = PF::zero();
    cp.g = PF::l1(0.2, 5);
    SmoothTerm<double> h;
    h.value = [A, b](const V& y) { return 0.5 * (A * y - b).squaredNorm(); };
    h.gradient = [A, b](const V& y) { return V(A.transpose() * (A * y - b)); };
    h.lipschitz = jacobi_eigenvalues(A.transpose() * A).maxCoeff();
    cp.h = h;
    BaselineConfig<double> cfg;
    cfg.method = Baseline::acc_prox_grad;
    cfg.restart_period = 15;
    const auto s = resolve_baseline(cp, cfg);
    auto st = baseline_init(cp, s, V(V::Zero(5)));

    const double L = h.lipschitz;
    V y = V::Zero(5), v = y;
    double t = 1;
    for (int k = 1; k <= 40; ++k) {
      st = acc_prox_grad_step(cp, st, s);
      const V w = v - A.transpose() * (A * v - b) / L;
      V yn(5);
      for (Index i = 0; i < 5; ++i) {
        const double th = 0.2 / L;
        yn[i] = w[i] > th ? w[i] - th : w[i] < -th ? w[i] + th : 0.0;
      }
      const double t1 = (1 + std::sqrt(1 + 4 * t * t)) / 2;
      v = yn + ((t - 1) / t1) * (yn - y);
      t = t1;
      y = yn;
      if (k % 15 == 0) {
        t = 1;
        v = y;
      }
      CHECK((st.y - y).norm() <= 1e-13);
    }
  }

  TEST_CASE("Vu-Condat keeps a saddle point fixed") {
    const auto p = gen_qp(6, 5, true, 43);
    const auto ref = qp_reference_oracle(p);
    auto cp = to_composite(p);
    SmoothTerm<double> h;  // zero smooth term to exercise the h path
    h.value = [](const V&) { return 0.0; };
    h.gradient = [](const V& y) { return V(V::Zero(y.size())); };
    h.lipschitz = 1.0;
    cp.h = h;
    BaselineConfig<double> cfg;
    cfg.method = Baseline::vu_condat;
    const auto s = resolve_baseline(cp, cfg);
    auto st = baseline_init(cp, s, ref.y_star);
    // A = I: the composite dual equals λ*.
    st.u = ref.lambda_star;
    for (int k = 0; k < 20; ++k) st = vu_condat_step(cp, st, s);
    CHECK((st.y - ref.y_star).norm() <= 1e-9);
    CHECK((st.u - ref.lambda_star).norm() <= 1e-9);
  }

  TEST_CASE("plain primal-dual method reaches the QP optimum") {
    const auto p = gen_qp(8, 6, false, 44);
    const auto ref = qp_reference_oracle(p);
    BaselineConfig<double> cfg;
    cfg.max_iters = 20000;
    BaselineState<double> st;
    const auto tr = run_baseline(p, cfg, std::optional<V>{}, &st);
    CHECK(std::abs(tr.final_record().original - ref.f_star) <= 1e-6 * (1 + std::abs(ref.f_star)));
    CHECK((st.u - ref.lambda_star).norm() <= 1e-4 * (1 + ref.lambda_star.norm()));
  }

  TEST_CASE("vu-condat default steps satisfy the step condition") {
    const auto p = gen_tv_recon(6, 6, 0.5, 1e-2, 0.0, 45);
    const auto cp = to_composite(p);
    BaselineConfig<double> cfg;
    cfg.method = Baseline::vu_condat;
    const auto s = resolve_baseline(cp, cfg);
    CHECK(s.tau0 == doctest::Approx(0.089 / s.L_h));
    CHECK(1 / s.tau0 - s.sigma0 * s.normK >= s.L_h / 2 * (1 - 1e-12));
  }

  TEST_CASE("resolver errors") {
    const auto tv = to_composite(gen_tv_recon(4, 4, 0.5, 1e-2, 0.0, 46));
    BaselineConfig<double> cfg;
    CHECK_THROWS_AS(resolve_baseline(tv, cfg), ConfigError);
    const auto qp = to_composite(gen_qp(5, 4, false, 47));
    cfg.method = Baseline::cp_scvx;
    CHECK_THROWS_AS(resolve_baseline(qp, cfg), ConfigError);
    cfg.method = Baseline::cp_plain;
    cfg.sigma = 10.0;
    cfg.tau = 10.0;
    CHECK_THROWS_AS(resolve_baseline(qp, cfg), ConfigError);
    cfg = {};
    cfg.method = Baseline::acc_prox_grad;
    CHECK_THROWS_AS(resolve_baseline(qp, cfg), ConfigError);
    cfg.method = Baseline::vu_condat;
    CHECK_THROWS_AS(resolve_baseline(qp, cfg), ConfigError);
    CHECK_THROWS_AS(run_baseline(gen_elastic_sqrt(4, 3, 1, 0.1, 0.01, 0.0, 1), cfg),
                    ConfigError);
  }

  TEST_CASE("baseline traces are deterministic") {
    const auto p = gen_qp(10, 8, true, 48);
    BaselineConfig<double> cfg;
    cfg.method = Baseline::cp_scvx;
    cfg.max_iters = 100;
    const auto a = run_baseline(p, cfg), b = run_baseline(p, cfg);
    REQUIRE(a.records.size() == 101);
    for (std::size_t i = 0; i < a.records.size(); ++i)
      CHECK(a.records[i].original == b.records[i].original);
  }
}
