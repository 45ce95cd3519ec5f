#pragma once

#include "papa/common.hpp"

#include <utility>

namespace papa {

// τ_{k+1} = (τ/2)(√(τ² + 4) − τ), the positive root of t² = (1 − t)τ².
template <typename Scalar>
Scalar tau_next(Scalar tau) {
  if (!(tau > Scalar(0) && tau <= Scalar(1)))
    throw ConfigError("tau_next: tau must lie in (0, 1], got " +
                      std::to_string(double(tau)));
  return tau / 2 * (std::sqrt(tau * tau + 4) - tau);
}

// Step-size pair meeting ρτ²‖B‖²/(1 − τ) = ρ_prev τ_prev²‖B‖² + μ_g τ_prev and
// ρ = ρ_prev/(1 − τ) with equality.
template <typename Scalar>
std::pair<Scalar, Scalar> tighter_tau_rho_next(Scalar tau_prev, Scalar rho_prev,
                                               Scalar mu_g, Scalar normB_sq) {
  if (!(mu_g > Scalar(0)))
    throw ConfigError("tighter_tau_rho_next: requires mu_g > 0");
  if (!(tau_prev > 0 && rho_prev > 0 && normB_sq > 0))
    throw ConfigError("tighter_tau_rho_next: inputs must be positive");
  const Scalar kappa = mu_g / normB_sq;
  const Scalar s = std::sqrt(tau_prev * tau_prev + kappa * tau_prev / rho_prev);
  const Scalar tau = s / (1 + s);
  return {tau, rho_prev / (1 - tau)};
}

}  // namespace papa
