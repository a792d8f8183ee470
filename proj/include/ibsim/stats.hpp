#ifndef IBSIM_STATS_HPP
#define IBSIM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ibsim/errors.hpp"

namespace ibsim {

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw InsufficientEnsemble("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct KsResult {
  double statistic = 0;  // sup |F1 - F2|
  double p_value = 1;
};

// Asymptotic Kolmogorov survival function with the small-sample correction
// lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D.
inline double ks_survival(double lambda) {
  if (lambda <= 0) return 1.0;
  double s = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * s));
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientEnsemble("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  if (d == 0) {
    r.p_value = 1.0;  // identical samples
    return r;
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  r.p_value = ks_survival((sq + 0.12 + 0.11 / sq) * d);
  return r;
}

// Ordinary least squares for y = slope x + intercept.
struct LineFit {
  double slope = 0;
  double intercept = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DegenerateRegression("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw DegenerateRegression("fit_line: collinear abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// Observed convergence order from a dyadic refinement ladder: least-squares
// slope of log error against log step.
inline double observed_order(const std::vector<double>& steps, const std::vector<double>& errors) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (errors[i] <= 0) continue;  // exact rungs do not constrain the order
    lx.push_back(std::log(steps[i]));
    ly.push_back(std::log(errors[i]));
  }
  if (lx.size() < 2) return std::numeric_limits<double>::infinity();
  return fit_line(lx, ly).slope;
}

}  // namespace ibsim

#endif  // IBSIM_STATS_HPP
