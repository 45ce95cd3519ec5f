#pragma once

#include "papa/common.hpp"

#include <algorithm>

namespace papa {

enum class SetKind { singleton_zero, box, nonnegative_orthant, second_order_cone };

// Closed convex set with a closed-form projection. The second-order cone in
// R^n is {(t, v) : ‖v‖ ≤ t} with t the first coordinate.
template <typename Scalar>
struct ConvexSet {
  using VecT = Vec<Scalar>;

  SetKind kind = SetKind::singleton_zero;
  Index dim = 0;
  VecT lower, upper;

  static ConvexSet zero(Index n) { return {SetKind::singleton_zero, n, {}, {}}; }
  static ConvexSet orthant(Index n) {
    return {SetKind::nonnegative_orthant, n, {}, {}};
  }
  static ConvexSet second_order_cone(Index n) {
    return {SetKind::second_order_cone, n, {}, {}};
  }
  static ConvexSet box(VecT lo, VecT hi) {
    check_length(lo.size(), hi.size(), "ConvexSet::box upper bound");
    if ((lo.array() > hi.array()).any())
      throw ConfigError("ConvexSet::box: lower bound exceeds upper bound");
    const Index n = lo.size();
    return {SetKind::box, n, std::move(lo), std::move(hi)};
  }
};

template <typename Scalar>
Vec<Scalar> project(const ConvexSet<Scalar>& set, const Vec<Scalar>& u) {
  check_length(set.dim, u.size(), "project");
  switch (set.kind) {
    case SetKind::singleton_zero:
      return Vec<Scalar>::Zero(u.size());
    case SetKind::box:
      return u.cwiseMax(set.lower).cwiseMin(set.upper);
    case SetKind::nonnegative_orthant:
      return u.cwiseMax(Scalar(0));
    case SetKind::second_order_cone: {
      if (u.size() == 0) return u;
      const Scalar t = u[0];
      const Scalar r = u.tail(u.size() - 1).norm();
      if (r <= t) return u;
      if (r <= -t) return Vec<Scalar>::Zero(u.size());
      const Scalar a = (t + r) / 2;
      Vec<Scalar> p(u.size());
      p[0] = a;
      p.tail(u.size() - 1) = (a / r) * u.tail(u.size() - 1);
      return p;
    }
  }
  return u;
}

template <typename Scalar>
Scalar dist(const ConvexSet<Scalar>& set, const Vec<Scalar>& u) {
  return (u - project(set, u)).norm();
}

template <typename Scalar>
bool contains(const ConvexSet<Scalar>& set, const Vec<Scalar>& u,
              Scalar tol = 0) {
  check_length(set.dim, u.size(), "contains");
  switch (set.kind) {
    case SetKind::singleton_zero:
      return u.size() == 0 || u.cwiseAbs().maxCoeff() <= tol;
    case SetKind::box:
      return ((u - set.lower).array() >= -tol).all() &&
             ((set.upper - u).array() >= -tol).all();
    case SetKind::nonnegative_orthant:
      return u.size() == 0 || u.minCoeff() >= -tol;
    case SetKind::second_order_cone:
      return u.size() == 0 || u.tail(u.size() - 1).norm() <= u[0] + tol;
  }
  return false;
}

}  // namespace papa
