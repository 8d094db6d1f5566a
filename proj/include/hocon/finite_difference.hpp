#pragma once

// Central finite differences. Used only to cross-check the automatic
// derivatives, never on the simulation path.

#include <algorithm>
#include <cmath>

#include "hocon/dual.hpp"

namespace hocon::fd {

inline double step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

template <class F>
Vec gradient(F&& f, const Vec& x) {
  Vec g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    double h = step(x(k));
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    g(k) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

template <class F>
Mat jacobian(F&& f, const Vec& x) {
  Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    double h = step(x(k));
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    J.col(k) = (f(xp) - f(xm)) / (2 * h);
  }
  return J;
}

/// Hessian of a scalar function by differencing a finite-difference gradient
/// of the same function. Step 1e-4 keeps the nested truncation and roundoff
/// errors balanced for O(1) inputs.
template <class F>
Mat hessian(F&& f, const Vec& x) {
  const Eigen::Index n = x.size();
  Mat H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double hi = 1e-4 * std::max(1.0, std::abs(x(i)));
      double hj = 1e-4 * std::max(1.0, std::abs(x(j)));
      auto at = [&](double si, double sj) {
        Vec y = x;
        y(i) += si * hi;
        y(j) += sj * hj;
        return f(y);
      };
      H(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * hi * hj);
    }
  }
  return H;
}

/// Relative error |a-b| / max(1, |b|), elementwise max.
inline double rel_err(const Mat& a, const Mat& b) {
  double e = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      e = std::max(e, std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(b(i, j))));
  return e;
}

}  // namespace hocon::fd
