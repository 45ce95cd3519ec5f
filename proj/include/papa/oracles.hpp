#pragma once

#include "papa/problem.hpp"
#include "papa/problems.hpp"

namespace papa {

// Enumerates the 3ⁿ activity patterns of a QP with n ≤ 12 constraints and
// keeps the best KKT-consistent candidate.
Reference<double> qp_reference_oracle(const ProblemInstance<double>& qp);

// Working-set method for larger QPs, started from the working set suggested
// by `y_start` (constraints within `active_tol` of a bound).
Reference<double> qp_active_set_oracle(const ProblemInstance<double>& qp,
                                       const Vec<double>& y_start,
                                       double active_tol = 1e-6);

struct CrosscheckResult {
  Reference<double> reference;
  double gap = 0;           // |P₁ − P₂| between the two methods
  bool low_confidence = false;
  std::string method_a, method_b;
};

// Runs two structurally different solvers and returns the smaller final
// objective with the gap as error bar. Without h: PAPA-rs (or scvx-PAPA-rs)
// against cp (or cp-scvx), `budget` iterations each. With h: Vu-Condat for
// `budget` iterations against acc-prox-grad (200 inner steps) for budget/20.
// The best y is kept as y*, with x* = x(y*) and λ* from the dual iterate.
CrosscheckResult fstar_crosscheck_oracle(const ProblemInstance<double>& p,
                                         Index budget);

}  // namespace papa
