#ifndef IBSIM_FIELDS_HPP
#define IBSIM_FIELDS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/integrator.hpp"
#include "ibsim/stats.hpp"

namespace ibsim {

struct Bins {
  double lo = 0;
  double hi = 1;
  int n = 10;

  double width() const { return (hi - lo) / n; }
  double center(int i) const { return lo + (i + 0.5) * width(); }
  int index(double x) const {
    if (x < lo || x >= hi) return -1;
    const int i = static_cast<int>((x - lo) / width());
    return i >= n ? n - 1 : i;
  }
};

// Binned estimate of the 1- or 2-point correlation function of a d = 1
// ensemble; rho^2 lives on the product grid, self-pairs excluded.
struct CorrelationEstimate {
  int order = 1;
  Bins bins;
  std::vector<double> values;   // order 1: n entries; order 2: n*n row-major
  std::vector<double> stderrs;
  int ensemble_size = 0;
};

inline CorrelationEstimate estimate_correlation(const std::vector<Configuration>& ensemble,
                                                int order, const Bins& bins) {
  if (ensemble.size() < 50)
    throw InsufficientEnsemble("estimate_correlation needs at least 50 members");
  if (order != 1 && order != 2) throw ConfigError("estimate_correlation: order must be 1 or 2");
  for (const auto& cfg : ensemble)
    if (cfg.dim != 1) throw ConfigError("estimate_correlation supports d = 1 only");
  const int m = static_cast<int>(ensemble.size());
  const double w = bins.width();
  CorrelationEstimate est;
  est.order = order;
  est.bins = bins;
  est.ensemble_size = m;
  const std::size_t cells =
      order == 1 ? static_cast<std::size_t>(bins.n)
                 : static_cast<std::size_t>(bins.n) * static_cast<std::size_t>(bins.n);
  std::vector<double> acc(cells, 0.0), acc2(cells, 0.0);
  for (const auto& cfg : ensemble) {
    std::vector<double> per(cells, 0.0);
    if (order == 1) {
      for (const auto& p : cfg.points) {
        const int b = bins.index(p[0]);
        if (b >= 0) per[static_cast<std::size_t>(b)] += 1.0 / w;
      }
    } else {
      for (std::size_t i = 0; i < cfg.size(); ++i)
        for (std::size_t j = 0; j < cfg.size(); ++j) {
          if (i == j) continue;
          const int bi = bins.index(cfg.points[i][0]);
          const int bj = bins.index(cfg.points[j][0]);
          if (bi >= 0 && bj >= 0)
            per[static_cast<std::size_t>(bi) * bins.n + static_cast<std::size_t>(bj)] +=
                1.0 / (w * w);
        }
    }
    for (std::size_t c = 0; c < cells; ++c) {
      acc[c] += per[c];
      acc2[c] += per[c] * per[c];
    }
  }
  est.values.resize(cells);
  est.stderrs.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const double mu = acc[c] / m;
    const double var = m > 1 ? (acc2[c] - m * mu * mu) / (m - 1) : 0.0;
    est.values[c] = mu;
    est.stderrs[c] = std::sqrt(std::max(0.0, var) / m);
  }
  return est;
}

// Sine-kernel reference correlations at unit density:
// rho^1 = 1, rho^2(x, y) = 1 - (sin pi s / pi s)^2 with s = x - y.
inline double sine_kernel_rho1() { return 1.0; }

inline double sine_kernel_rho2(double x, double y) {
  const double s = 3.14159265358979323846 * (x - y);
  if (s == 0.0) return 0.0;
  const double k = std::sin(s) / s;
  return 1.0 - k * k;
}

// --- Bessel kernel --------------------------------------------------------

// J_alpha by its ascending power series with term-ratio stopping; the
// arguments used here are O(1-10) where the series is stable.
inline double bessel_j(double alpha, double x) {
  const double half = 0.5 * x;
  double term = std::pow(half, alpha) / std::tgamma(alpha + 1.0);
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -half * half / (k * (k + alpha));
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
  }
  return sum;
}

inline double bessel_j_deriv(double alpha, double x) {
  return 0.5 * (bessel_j(alpha - 1.0, x) - bessel_j(alpha + 1.0, x));
}

inline double bessel_j_second(double alpha, double x) {
  // From the defining ODE: J'' = -J'/x - (1 - alpha^2/x^2) J.
  return -bessel_j_deriv(alpha, x) / x - (1.0 - alpha * alpha / (x * x)) * bessel_j(alpha, x);
}

// Hard-edge kernel
//   K(x, y) = (J_a(sx) sy J_a'(sy) - sx J_a'(sx) J_a(sy)) / (2 (x - y)),
// sx = sqrt(x), with the diagonal filled by the symmetric limit.
inline double bessel_kernel(double x, double y, double alpha) {
  if (!(x > 0) || !(y > 0)) throw DomainViolation("bessel_kernel requires x, y > 0");
  auto A = [alpha](double t) { return bessel_j(alpha, std::sqrt(t)); };
  auto B = [alpha](double t) { return std::sqrt(t) * bessel_j_deriv(alpha, std::sqrt(t)); };
  if (std::abs(x - y) > 1e-9 * (1.0 + std::abs(x) + std::abs(y)))
    return (A(x) * B(y) - B(x) * A(y)) / (2.0 * (x - y));
  // Limit via d/dy at y = x: numerator ~ (y - x)(A B' - B A') against the
  // denominator 2(x - y).
  const double sx = std::sqrt(x);
  const double Ap = bessel_j_deriv(alpha, sx) / (2.0 * sx);
  const double Bp = bessel_j_deriv(alpha, sx) / (2.0 * sx) + 0.5 * bessel_j_second(alpha, sx);
  return (B(x) * Ap - A(x) * Bp) / 2.0;
}

// --- translation-invariant pair-correlation estimate ----------------------

struct SeparationEstimate {
  std::vector<double> centers;
  std::vector<double> values;
  std::vector<double> stderrs;
  double mean_density = 1.0;  // pooled one-point density over the window
};

// rho^2 as a function of separation inside the central window [-W, W],
// from ordered-pair counts normalized by the window overlap measure.
// Separation bins whose support reaches the window edge are dropped.
// With normalize_by_density the values are divided by the pooled squared
// one-point density, which cancels any calibration error of an upstream
// unfolding and leaves the pure correlation shape.
inline SeparationEstimate pair_correlation_by_separation(
    const std::vector<Configuration>& ensemble, double window_halfwidth, double bin_width,
    double max_separation, bool normalize_by_density = false) {
  if (ensemble.size() < 50)
    throw InsufficientEnsemble("pair_correlation_by_separation needs at least 50 members");
  const double W = window_halfwidth;
  const int nb = static_cast<int>(std::floor(std::min(max_separation, 2.0 * W - bin_width) /
                                             bin_width));
  if (nb < 1) throw ConfigError("pair_correlation_by_separation: window too small");
  const int m = static_cast<int>(ensemble.size());
  SeparationEstimate est;
  est.centers.resize(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) est.centers[static_cast<std::size_t>(b)] = (b + 0.5) * bin_width;
  std::vector<double> acc(static_cast<std::size_t>(nb), 0.0), acc2(static_cast<std::size_t>(nb), 0.0);
  double point_total = 0;
  for (const auto& cfg : ensemble) {
    std::vector<double> per(static_cast<std::size_t>(nb), 0.0);
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      const double xi = cfg.points[i][0];
      if (std::abs(xi) > W) continue;
      point_total += 1.0;
      for (std::size_t j = 0; j < cfg.size(); ++j) {
        if (i == j) continue;
        const double xj = cfg.points[j][0];
        if (std::abs(xj) > W) continue;
        const double s = std::abs(xi - xj);
        const int b = static_cast<int>(s / bin_width);
        if (b < nb) per[static_cast<std::size_t>(b)] += 1.0;
      }
    }
    for (int b = 0; b < nb; ++b) {
      const double sbar = est.centers[static_cast<std::size_t>(b)];
      const double measure = 2.0 * bin_width * (2.0 * W - sbar);  // ordered pairs
      per[static_cast<std::size_t>(b)] /= measure;
      acc[static_cast<std::size_t>(b)] += per[static_cast<std::size_t>(b)];
      acc2[static_cast<std::size_t>(b)] += per[static_cast<std::size_t>(b)] * per[static_cast<std::size_t>(b)];
    }
  }
  est.mean_density = point_total / (2.0 * W * m);
  const double norm = normalize_by_density ? est.mean_density * est.mean_density : 1.0;
  est.values.resize(static_cast<std::size_t>(nb));
  est.stderrs.resize(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    const std::size_t c = static_cast<std::size_t>(b);
    const double mu = acc[c] / m;
    const double var = m > 1 ? (acc2[c] - m * mu * mu) / (m - 1) : 0.0;
    est.values[c] = mu / norm;
    est.stderrs[c] = std::sqrt(std::max(0.0, var) / m) / norm;
  }
  return est;
}

struct H1Report {
  std::vector<int> n_ladder;
  std::vector<double> sup_gaps;
  std::vector<double> sup_gap_stderrs;
  bool decreasing_within_2se = true;
  double final_gap = 0;
};

// Reference averaged over one separation bin with the same window-overlap
// weight the estimator carries, so a curved rho^2 is compared like for
// like. Composite midpoint: nodes stay strictly inside the bin, which
// keeps piecewise-constant references exact.
inline double bin_averaged_reference(const std::function<double(double)>& rho2, double center,
                                     double bin_width, double window_halfwidth) {
  const int panels = 64;
  const double lo = center - 0.5 * bin_width;
  const double h = bin_width / panels;
  double num = 0, den = 0;
  for (int i = 0; i < panels; ++i) {
    const double s = lo + (i + 0.5) * h;
    const double overlap = std::max(0.0, 2.0 * window_halfwidth - s);
    num += rho2(s) * overlap;
    den += overlap;
  }
  return num / den;
}

// Finite-N convergence of the unfolded two-point function toward a
// reference rho^2(s): sup central-bin gap per rung of the N-ladder.
inline H1Report h1_convergence_check(const std::vector<int>& n_ladder,
                                     const std::vector<std::vector<Configuration>>& ensembles,
                                     const std::function<double(double)>& reference_rho2,
                                     double window_halfwidth, double bin_width,
                                     double max_separation) {
  if (n_ladder.size() < 3) throw ConfigError("h1_convergence_check: need an N-ladder of >= 3");
  if (n_ladder.size() != ensembles.size())
    throw ConfigError("h1_convergence_check: ladder/ensemble size mismatch");
  H1Report rep;
  rep.n_ladder = n_ladder;
  for (const auto& ens : ensembles) {
    const SeparationEstimate est =
        pair_correlation_by_separation(ens, window_halfwidth, bin_width, max_separation,
                                       /*normalize_by_density=*/true);
    double sup = 0, se = 0;
    for (std::size_t b = 0; b < est.values.size(); ++b) {
      const double ref =
          bin_averaged_reference(reference_rho2, est.centers[b], bin_width, window_halfwidth);
      const double gap = std::abs(est.values[b] - ref);
      if (gap > sup) {
        sup = gap;
        se = est.stderrs[b];
      }
    }
    rep.sup_gaps.push_back(sup);
    rep.sup_gap_stderrs.push_back(se);
  }
  for (std::size_t i = 1; i < rep.sup_gaps.size(); ++i)
    if (rep.sup_gaps[i] >
        rep.sup_gaps[i - 1] + 2.0 * (rep.sup_gap_stderrs[i] + rep.sup_gap_stderrs[i - 1]))
      rep.decreasing_within_2se = false;
  rep.final_gap = rep.sup_gaps.back();
  return rep;
}

// Two-sample KS between a configuration statistic at t = 0 and t = T over
// an equilibrium-started ensemble.
inline double stationarity_test(const std::vector<Trajectory>& ensemble,
                                const std::function<double(const Configuration&)>& statistic) {
  if (ensemble.size() < 2) throw InsufficientEnsemble("stationarity_test: ensemble too small");
  std::vector<double> s0, sT;
  s0.reserve(ensemble.size());
  sT.reserve(ensemble.size());
  for (const auto& traj : ensemble) {
    s0.push_back(statistic(unlabel(traj.states.front())));
    sT.push_back(statistic(unlabel(traj.states.back())));
  }
  return ks_two_sample(s0, sT).p_value;
}

}  // namespace ibsim

#endif  // IBSIM_FIELDS_HPP
