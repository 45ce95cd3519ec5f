#pragma once

#include "papa/common.hpp"

#include <string>
#include <vector>

namespace papa {

template <typename Scalar>
struct TraceRecord {
  Index k = 0;
  Scalar objective = 0;   // F(z^k) on the template
  Scalar original = 0;    // objective of the unlifted problem
  Scalar dist = 0;        // dist_K(Ax^k + By^k − c)
  Scalar feasibility = 0; // problem-specific metric
  Scalar psi = 0;
  Scalar rho = 0;
  Scalar tau = 0;
  double wall_ms = 0;     // 0 unless timing is enabled
};

// Slacks of the per-iteration inequalities; all should be ≥ −tolerance.
template <typename Scalar>
struct DiagnosticReport {
  Index k = 0;
  Scalar lemma4_star = 0;    // −½‖ŝ‖² − ℓ_k(z*)
  Scalar lemma4_prev = 0;    // ψ(z^k) − ½‖s^k − ŝ‖² − ℓ_k(z^k)
  Scalar model_upper = 0;    // Q_k(y^{k+1}) − ψ(x^{k+1}, y^{k+1})
  Scalar key_estimate = 0;   // right side minus Φ_{ρ_k}(z^{k+1})
  Scalar interpolation = 0;  // ‖x̂^k − (1−τ)x^k − τx̃^k‖
  Scalar tolerance = 0;
  std::vector<std::string> failures;
};

template <typename Scalar>
struct ConvergenceTrace {
  std::string method;
  std::vector<TraceRecord<Scalar>> records;
  std::vector<DiagnosticReport<Scalar>> diagnostics;
  std::vector<std::string> notes;

  // Constants used by the rate certificates.
  Scalar rho0 = 0, gamma0 = 0, mu_g = 0, normB_sq = 0, normA_sq = 0, L_h = 0;
  Vec<Scalar> x0, y0, x_final, y_final;
  Index restarts = 0;

  Index iterations() const {
    return records.empty() ? 0 : records.back().k;
  }
  const TraceRecord<Scalar>& final_record() const { return records.back(); }
};

}  // namespace papa
