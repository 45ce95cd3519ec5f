#include "support.hpp"

#include "papa/oracles.hpp"
#include "papa/penalty.hpp"
#include "papa/problems.hpp"

#include <doctest.h>

using namespace papa;
using namespace papa::testing;

namespace {

PenaltySpec<double> random_spec(RandomStream& rs, const ConvexSet<double>& K) {
  PenaltySpec<double> s;
  const Index n = K.dim;
  s.A = LinearMap<double>::dense(rs.normal_matrix(n, 3));
  s.B = LinearMap<double>::dense(rs.normal_matrix(n, 4));
  s.c = rand_vec(rs, n);
  s.K = K;
  return s;
}

std::vector<ConvexSet<double>> sets() {
  return {ConvexSet<double>::zero(5), ConvexSet<double>::orthant(5),
          ConvexSet<double>::second_order_cone(5),
          ConvexSet<double>::box(-0.5 * V::Ones(5), V::Ones(5))};
}

}  // namespace

TEST_SUITE("penalty") {
  TEST_CASE("psi gradients match central differences") {
    RandomStream rs(20, "psi-fd");
    for (const auto& K : sets()) {
      const auto spec = random_spec(rs, K);
      for (int t = 0; t < 10; ++t) {
        const double rho = 0.5 + rs.uniform();
        const V x = rand_vec(rs, 3), y = rand_vec(rs, 4), l0 = rand_vec(rs, 5);
        const auto ev = psi_val_grad(spec, rho, x, y, l0);
        const V gx = fd_gradient(
            [&](const V& xx) { return psi_val_grad(spec, rho, xx, y, l0).value; }, x);
        const V gy = fd_gradient(
            [&](const V& yy) { return psi_val_grad(spec, rho, x, yy, l0).value; }, y);
        CHECK(rel_err(ev.grad_x, gx) <= 1e-6);
        CHECK(rel_err(ev.grad_y, gy) <= 1e-6);
      }
    }
  }

  TEST_CASE("phi gradient matches central differences and is 1-Lipschitz") {
    RandomStream rs(21, "phi");
    for (const auto& K : sets()) {
      for (int t = 0; t < 10; ++t) {
        const V u = rand_vec(rs, 5, 2.0);
        const V g = fd_gradient([&](const V& v) { return phi(K, v); }, u);
        CHECK(rel_err(grad_phi(K, u), g) <= 1e-6);
      }
      for (int t = 0; t < 100; ++t) {
        const V u = rand_vec(rs, 5, 2.0), v = rand_vec(rs, 5, 2.0);
        CHECK((grad_phi(K, u) - grad_phi(K, v)).norm() <= (u - v).norm() * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("shift enters as lambda0 over rho") {
    RandomStream rs(22, "shift");
    const auto spec = random_spec(rs, ConvexSet<double>::orthant(5));
    const V x = rand_vec(rs, 3), y = rand_vec(rs, 4), l0 = rand_vec(rs, 5);
    const double rho = 2.5;
    const V w = residual(spec, x, y) + l0 / rho;
    const V s = w - w.cwiseMax(0.0);
    const auto ev = psi_val_grad(spec, rho, x, y, l0);
    CHECK((ev.s - s).norm() < 1e-14);
    CHECK(ev.value == doctest::Approx(s.squaredNorm() / 2));
    CHECK(psi_val_grad(spec, rho, x, y).value == doctest::Approx(psi(spec, x, y)));
  }

  TEST_CASE("certificate inequalities at random points of a QP") {
    const auto p = gen_qp(6, 5, false, 41);
    const auto ref = qp_reference_oracle(p);
    const auto d = qp_data(p);
    const double lam = ref.lambda_star.norm();
    RandomStream rs(23, "lemma1");
    Index checked = 0;
    for (int t = 0; t < 1000; ++t) {
      const double rho = std::exp(rs.uniform(-3, 3));
      V x(5);
      for (Index i = 0; i < 5; ++i) x[i] = rs.uniform(d.lower[i], d.upper[i]);
      const V y = ref.y_star + rand_vec(rs, 6, std::exp(rs.uniform(-6, 1)));
      const double F = objective(p, x, y);
      const auto c = certificate_bounds(p.constraint, rho, F, ref.f_star, lam, x, y);
      const double tol = 1e-8 * (1 + std::abs(F));
      CHECK(F - ref.f_star >= c.obj_lower - tol);
      CHECK(F - ref.f_star == doctest::Approx(c.obj_upper).epsilon(1e-12).scale(1));
      CHECK(c.dist <= c.feas_upper + tol);
      ++checked;
    }
    CHECK(checked == 1000);
  }

  TEST_CASE("certificate rejects inconsistent inputs") {
    PenaltySpec<double> s;
    s.A = LinearMap<double>::identity(1);
    s.B = LinearMap<double>::identity(1);
    s.c = V::Zero(1);
    s.K = ConvexSet<double>::zero(1);
    const V x = V::Ones(1), y = V::Zero(1);
    // F(z) far below F* with a zero multiplier: negative radicand.
    CHECK_THROWS_AS(certificate_bounds(s, 1.0, -10.0, 0.0, 0.0, x, y), InvariantError);
    CHECK_THROWS_AS(certificate_bounds(s, 0.0, 0.0, 0.0, 0.0, x, y), ConfigError);
    s.lambda0 = V::Ones(1);
    CHECK_THROWS_AS(certificate_bounds(s, 1.0, 0.0, 0.0, 0.0, x, y), ConfigError);
  }

  TEST_CASE("psi rejects nonpositive rho and mismatched shapes") {
    RandomStream rs(24, "errors");
    auto spec = random_spec(rs, ConvexSet<double>::zero(5));
    CHECK_THROWS_AS(psi_val_grad(spec, 0.0, V(V::Zero(3)), V(V::Zero(4)), V()), ConfigError);
    CHECK_THROWS_AS(psi_val_grad(spec, 1.0, V(V::Zero(2)), V(V::Zero(4)), V()), DimensionError);
    CHECK_THROWS_AS(psi_val_grad(spec, 1.0, V(V::Zero(3)), V(V::Zero(4)), V(V::Zero(2))),
                    DimensionError);
    spec.c = V::Zero(4);
    CHECK_THROWS_AS(spec.validate(), DimensionError);
  }
}
