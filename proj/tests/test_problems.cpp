#include "support.hpp"

#include "papa/baselines.hpp"
#include "papa/oracles.hpp"
#include "papa/papa.hpp"
#include "papa/problems.hpp"

#include <doctest.h>

using namespace papa;
using namespace papa::testing;

namespace {

// Subgradient-residual test of x = S(x̂, ŷ, ρ, γ): x must be a fixed point of
// the forward-backward map for f + ρψ + (γ/2)‖· − x̂‖².
double x_solver_residual(const ProblemInstance<double>& p, RandomStream& rs) {
  const V xh = rand_vec(rs, p.p1()), yh = rand_vec(rs, p.p2()), l0 = rand_vec(rs, p.n());
  const double rho = std::exp(rs.uniform(-2, 2));
  const double gamma = rs.uniform() < 0.5 ? 0.0 : rs.uniform(0.1, 2.0);
  const V x = p.exact_x_solver(xh, yh, rho, gamma, l0);
  const auto ev = psi_val_grad(p.constraint, rho, x, yh, l0);
  const V grad = rho * ev.grad_x + gamma * (x - xh);
  const double t = 1 / (rho + gamma);
  return (x - prox(p.f, t, V(x - t * grad))).norm() / (1 + x.norm());
}

QpData scalar_qp(double Q, double q, double a, double b) {
  QpData d;
  d.Q = M::Constant(1, 1, Q);
  d.B = M::Constant(1, 1, 1.0);
  d.q = V::Constant(1, q);
  d.lower = V::Constant(1, a);
  d.upper = V::Constant(1, b);
  return d;
}

}  // namespace

TEST_SUITE("problems") {
  TEST_CASE("QP construction") {
    const Index p2 = 12, n = 9;
    for (bool sc : {false, true}) {
      const auto p = gen_qp(p2, n, sc, 50);
      const auto d = qp_data(p);
      CHECK((d.Q - d.Q.transpose()).norm() == 0.0);
      const V ev = jacobi_eigenvalues(d.Q);
      CHECK(ev.minCoeff() >= (sc ? 1.0 : 0.0) - 1e-10);
      // m = ⌊p2/2⌋ + 1 columns in R: RRᵀ has rank at most 7.
      Index positive = 0;
      for (Index i = 0; i < p2; ++i) positive += ev[i] - (sc ? 1.0 : 0.0) > 1e-9;
      CHECK(positive == p2 / 2 + 1);
      // y♮ from its own stream is feasible.
      RandomStream rs_y(50, "ynat");
      const V By = d.B * rs_y.normal_vector(p2);
      CHECK(((By - d.lower).array() > 0).all());
      CHECK(((d.upper - By).array() > 0).all());
      CHECK(((d.upper - d.lower).array() < 2).all());
      CHECK((d.upper + d.lower - 2 * By).norm() <= 1e-12 * By.norm());
    }
  }

  TEST_CASE("exact x-solvers pass the subgradient-residual test") {
    const std::vector<ProblemInstance<double>> ps = {
        gen_qp(7, 5, false, 51), gen_elastic_sqrt(20, 8, 3, 0.1, 0.01, 1e-3, 52),
        gen_tv_recon(5, 4, 0.3, 1e-2, 0.0, 53), gen_sqrt_composite_instance(15, 0.1, 0.01, 54)};
    RandomStream rs(55, "xsolver");
    for (const auto& p : ps)
      for (int t = 0; t < 50; ++t) CHECK(x_solver_residual(p, rs) <= 1e-10);
  }

  TEST_CASE("QP oracle on one-dimensional instances") {
    {
      const auto p = make_qp(scalar_qp(1, 0, -1, 1));
      const auto r = qp_reference_oracle(p);
      CHECK(r.f_star == doctest::Approx(0.0));
      CHECK(std::abs(r.y_star[0]) <= 1e-14);
      CHECK(std::abs(r.lambda_star[0]) <= 1e-14);
    }
    {
      // ½(y − 3)² = ½y² − 3y + 4.5 on [0, 1].
      const auto p = make_qp(scalar_qp(1, -3, 0, 1));
      const auto r = qp_reference_oracle(p);
      CHECK(r.f_star + 4.5 == doctest::Approx(2.0));
      CHECK(r.y_star[0] == doctest::Approx(1.0));
      CHECK(r.lambda_star[0] == doctest::Approx(2.0));
      CHECK(kkt_residual(p, r) <= 1e-12);
    }
  }

  TEST_CASE("QP oracles agree with a long restarted run") {
    const auto p = gen_qp(3, 3, true, 56);
    const auto r = qp_reference_oracle(p);
    CHECK(kkt_residual(p, r) <= 1e-8);
    SolverConfig<double> cfg;
    cfg.algorithm = Algorithm::scvx;
    cfg.restart_period = 100;
    cfg.max_iters = 20000;
    const auto tr = run(p, cfg);
    CHECK(std::abs(tr.final_record().original - r.f_star) <= 1e-7 * std::max(1.0, std::abs(r.f_star)));

    const auto q = gen_qp(10, 10, false, 7);
    const auto e = qp_reference_oracle(q);
    const auto a = qp_active_set_oracle(q, V(V::Zero(10)));
    CHECK(a.f_star == doctest::Approx(e.f_star).epsilon(1e-10));
    CHECK(kkt_residual(q, a) <= 1e-8);
  }

  TEST_CASE("oracle errors") {
    CHECK_THROWS_AS(qp_reference_oracle(gen_qp(5, 13, false, 57)), ConfigError);
    CHECK_THROWS_AS(fstar_crosscheck_oracle(gen_qp(4, 3, false, 58), 0), ConfigError);
  }

  TEST_CASE("crosscheck agrees with the enumeration oracle within its error bar") {
    for (bool sc : {false, true}) {
      const auto p = gen_qp(8, 8, sc, 59);
      const auto e = qp_reference_oracle(p);
      const auto cc = fstar_crosscheck_oracle(p, 3000);
      CHECK(std::abs(cc.reference.f_star - e.f_star) <=
            cc.gap + 1e-9 * std::max(1.0, std::abs(e.f_star)));
      CHECK(!cc.low_confidence);
      CHECK((cc.reference.lambda_star - e.lambda_star).norm() <=
            1e-4 * (1 + e.lambda_star.norm()));
    }
  }

  TEST_CASE("elastic-net crosscheck error bar after 1e5 iterations") {
    const auto p = gen_elastic_sqrt(400, 140, 40, 0.1, 0.01, 1e-3, 60);
    const auto cc = fstar_crosscheck_oracle(p, 100000);
    CHECK(cc.gap <= 1e-8 * std::max(1.0, std::abs(cc.reference.f_star)));
  }

  TEST_CASE("elastic-net data") {
    const auto clean = gen_elastic_sqrt(30, 12, 4, 0.1, 0.01, 0.0, 61);
    const auto noisy = gen_elastic_sqrt(30, 12, 4, 0.1, 0.01, 1e-3, 61);
    RandomStream rs_B(61, "B"), rs_s(61, "support"), rs_y(61, "ynat");
    const M B = rs_B.normal_matrix(12, 30) / std::sqrt(12.0);
    const auto perm = rs_s.permutation(30);
    V ynat = V::Zero(30);
    for (Index i = 0; i < 4; ++i) ynat[perm[std::size_t(i)]] = rs_y.normal();
    CHECK((clean.constraint.c - B * ynat).norm() == 0.0);
    const V e = (noisy.constraint.c - clean.constraint.c) / 1e-3;
    CHECK(e.norm() > 0.5 * std::sqrt(12.0));
    CHECK(e.norm() < 2.0 * std::sqrt(12.0));
    CHECK(gen_elastic_sqrt(30, 12, 4, 0.0, 0.01, 0.0, 61).g.mu == 0.0);
    CHECK(clean.g.mu == 0.1);
  }

  TEST_CASE("TV instance with a constant image and full sampling") {
    const auto p = gen_tv_recon(6, 6, 1.0, 4.0912e-4, 0.0, 62, true);
    // y = 1 has zero data misfit and zero total variation.
    CHECK(p.original_objective(V::Ones(36)) <= 1e-24);
    SolverConfig<double> cfg;
    cfg.max_iters = 2000;
    cfg.restart_period = 50;
    const auto tr = run(p, cfg);
    CHECK(tr.final_record().original <= 1e-6);
    CHECK(tr.final_record().dist <= 1e-6);
  }

  TEST_CASE("TV instance structure") {
    const auto p = gen_tv_recon(8, 6, 0.2, 4.0912e-4, 0.0, 63);
    CHECK(p.p2() == 48);
    CHECK(p.n() == 96);
    REQUIRE(p.h);
    CHECK(p.h->lipschitz > 0);
    const V y = V::LinSpaced(48, -1, 1);
    const V g = fd_gradient(p.h->value, y);
    CHECK(rel_err(p.h->gradient(y), g) <= 1e-6);
    CHECK_THROWS_AS(gen_tv_recon(8, 8, 0.0, 1e-3, 0.0, 1), ConfigError);
  }

  TEST_CASE("regeneration is deterministic") {
    for (const auto& p : {gen_qp(9, 7, true, 64), gen_elastic_sqrt(20, 8, 3, 0.1, 0.01, 1e-3, 65),
                          gen_tv_recon(5, 5, 0.4, 1e-2, 1e-3, 66),
                          gen_sqrt_composite_instance(12, 0.1, 0.01, 67)}) {
      const std::string js = describe(p.info);
      const auto q = regenerate(js);
      CHECK(describe(q.info) == js);
      CHECK((p.constraint.B.to_dense() - q.constraint.B.to_dense()).norm() == 0.0);
      CHECK((p.constraint.c - q.constraint.c).norm() == 0.0);
      const V y = V::LinSpaced(p.p2(), -1, 2);
      CHECK(p.original_objective(y) == q.original_objective(y));
    }
    CHECK_THROWS_AS(regenerate(R"({"kind":"mystery","seed":1,"params":{}})"), ConfigError);
  }
}
