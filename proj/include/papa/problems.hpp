#pragma once

#include "papa/problem.hpp"

#include <cstdint>
#include <string>

namespace papa {

// Box-constrained QP: min ½yᵀQy + qᵀy  s.t.  a ≤ By ≤ b, lifted with x = By:
// f = δ_[a,b], g = ½yᵀQy + qᵀy, A = I, template B = −B, c = 0, K = {0}.
struct QpData {
  Mat<double> Q, B;
  Vec<double> q, lower, upper;
};

ProblemInstance<double> make_qp(const QpData& d);
QpData qp_data(const ProblemInstance<double>& p);

// Q = RRᵀ + μI, R = randn(p2, m)/√m with m = ⌊p2/2⌋ + 1, B = randn(n, p2)/√n,
// bounds By♮ ∓ u with u uniform on (0, 1); μ = 1 when strongly convex.
ProblemInstance<double> gen_qp(Index p2, Index n, bool strongly_convex,
                               std::uint64_t seed);

// min ‖By − c‖ + (κ₁/2)‖y‖² + κ₂‖y‖₁ with B = randn(n, p2)/√n, an s-sparse
// y♮ and c = By♮ + σ̄·noise. Template: f = ‖·‖, g = elastic, −x + By = c.
ProblemInstance<double> gen_elastic_sqrt(Index p2, Index n, Index s,
                                         double kappa1, double kappa2,
                                         double noise_sigma, std::uint64_t seed);

// min ½‖M(Y) − b‖² + κ‖DY‖₁ on an h×w image with a row-subsampled Gaussian
// measurement M. Template: f = κ‖·‖₁, g = 0, h = ½‖M(·) − b‖², x = DY.
ProblemInstance<double> gen_tv_recon(Index height, Index width, double sample_rate,
                                     double kappa, double noise_sigma,
                                     std::uint64_t seed, bool constant_image = false);

// min ‖y − d‖ + (κ₁/2)‖y‖² + κ₂‖y‖₁ in composite form (K = identity), with
// d = y♮ + 0.1·noise for a 10%-sparse y♮.
CompositeProblem<double> gen_sqrt_composite(Index p, double kappa1, double kappa2,
                                            std::uint64_t seed);
// The same instance lifted to the template, with its regeneration record.
ProblemInstance<double> gen_sqrt_composite_instance(Index p, double kappa1,
                                                    double kappa2, std::uint64_t seed);

// Regeneration record as a JSON object: {"kind", "seed", "params"}.
std::string describe(const InstanceInfo& info);
ProblemInstance<double> regenerate(const std::string& json);

}  // namespace papa
