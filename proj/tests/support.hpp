#pragma once

#include "papa/common.hpp"
#include "papa/random.hpp"

#include <cmath>
#include <functional>
#include <utility>

namespace papa::testing {

using V = Vec<double>;
using M = Mat<double>;

inline V rand_vec(RandomStream& rs, Index n, double scale = 1.0) {
  return scale * rs.normal_vector(n);
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline V jacobi_eigenvalues(M a, int sweeps = 100) {
  const Index n = a.rows();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double th = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (th >= 0 ? 1.0 : -1.0) / (std::abs(th) + std::sqrt(th * th + 1));
        const double c = 1 / std::sqrt(t * t + 1), sn = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
  }
  return a.diagonal();
}

// Minimizer of a convex scalar function on [lo, hi] by golden-section search.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 200) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

// Central difference gradient.
inline V fd_gradient(const std::function<double(const V&)>& f, const V& x, double h = 1e-6) {
  V g(x.size());
  V xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
    xp[i] = xm[i] = x[i];
  }
  return g;
}

inline double rel_err(const V& a, const V& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace papa::testing
