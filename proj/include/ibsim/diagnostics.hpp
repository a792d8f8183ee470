#ifndef IBSIM_DIAGNOSTICS_HPP
#define IBSIM_DIAGNOSTICS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/integrator.hpp"
#include "ibsim/vec.hpp"

namespace ibsim {

// Osgood-type Lyapunov pair for the non-collision argument:
// Upsilon(t) = 1 - ln t for t <= 1, e^{1-t} for t > 1, which is positive,
// convex, decreasing, C^2 at the junction, and upsilon = -1/Upsilon' is
// t below 1 and e^{t-1} above, with the divergent integral of 1/upsilon
// at 0.
inline double upsilon(double t) {
  if (!(t > 0)) throw DomainViolation("upsilon requires t > 0");
  return t <= 1.0 ? 1.0 - std::log(t) : std::exp(1.0 - t);
}

inline double upsilon_small(double t) {
  if (t < 0) throw DomainViolation("upsilon_small requires t >= 0");
  return t <= 1.0 ? t : std::exp(t - 1.0);
}

namespace detail {

// Composite-Simpson moments of the normalized mollifier
// phi_w(s) = c/w exp(1/((s/w)^2 - 1)) on [-w, w]: mass and first moment
// over [-w, z]. Smooth integrand with flat endpoints, so a fixed panel
// count reaches near machine accuracy.
class BumpMoments {
 public:
  explicit BumpMoments(double width) : w_(width) {
    total_mass_ = raw_mass(w_);
  }

  double width() const { return w_; }

  // integral of phi over [-w, min(z, w)], normalized to total mass 1.
  double mass(double z) const {
    if (z <= -w_) return 0.0;
    if (z >= w_) return 1.0;
    return raw_mass(z) / total_mass_;
  }

  // integral of s phi(s) over [-w, min(z, w)], normalized.
  double first_moment(double z) const {
    if (z <= -w_) return 0.0;
    const double zc = std::min(z, w_);
    return raw_first(zc) / total_mass_;
  }

 private:
  static double shape(double u) {  // exp(1/(u^2-1)) on |u| < 1
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 / (u * u - 1.0));
  }

  double raw_mass(double z) const { return simpson(z, false); }
  double raw_first(double z) const { return simpson(z, true); }

  double simpson(double z, bool weighted) const {
    const int panels = 512;  // even
    const double a = -w_, b = z;
    const double h = (b - a) / panels;
    auto f = [&](double s) {
      const double v = shape(s / w_);
      return weighted ? s * v : v;
    };
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  }

  double w_;
  double total_mass_;
};

}  // namespace detail

// Mollified ramp: a clamped linear ramp on [ramp_lo, ramp_hi] convolved
// with a compactly supported smooth bump. The convolution keeps the max
// slope at 1/(ramp_hi - ramp_lo), below the required sqrt(2), and gives
// exact plateaus 0 below ramp_lo - width and 1 above ramp_hi + width.
class SmoothStep {
 public:
  SmoothStep(double epsilon, double width)
      : lo_(epsilon + width), hi_(1.0 - epsilon - width), bump_(width) {
    if (!(epsilon > 0) || !(width > 0) || !(lo_ < hi_))
      throw ConfigError("SmoothStep: need 0 < epsilon, width and epsilon + width < 1/2");
  }

  double value(double t) const {
    const double w = bump_.width();
    double acc = bump_.mass(t - hi_);  // plateau-1 region fully weighted
    const double a = std::max(-w, t - hi_);
    const double b = std::min(w, t - lo_);
    if (b > a) {
      const double m0 = bump_.mass(b) - bump_.mass(a);
      const double m1 = bump_.first_moment(b) - bump_.first_moment(a);
      acc += ((t - lo_) * m0 - m1) / (hi_ - lo_);
    }
    return acc;
  }

  double deriv(double t) const {
    const double w = bump_.width();
    const double a = std::max(-w, t - hi_);
    const double b = std::min(w, t - lo_);
    if (b <= a) return 0.0;
    return (bump_.mass(b) - bump_.mass(a)) / (hi_ - lo_);
  }

  double ramp_lo() const { return lo_; }
  double ramp_hi() const { return hi_; }
  double max_slope() const { return 1.0 / (hi_ - lo_); }

 private:
  double lo_, hi_;
  detail::BumpMoments bump_;
};

// Parameters of the cut-off family chi_{q,Q} = theta(d_{q,Q}).
struct CutoffParams {
  double epsilon = 0.05;
  double mollifier_width = 0.04;
  TameSchedule schedule;
  int Q = 4;  // ball-radius cap of the K_Q sets
  SmoothStep theta;

  CutoffParams(TameSchedule sched, int ball_cap, double eps = 0.05, double width = 0.04)
      : epsilon(eps), mollifier_width(width), schedule(std::move(sched)), Q(ball_cap),
        theta(eps, width) {
    if (Q < 1) throw ConfigError("CutoffParams: Q must be >= 1");
    // Verify the mollified ramp numerically at construction.
    const int grid = 2000;
    const double sqrt2 = std::sqrt(2.0);
    for (int i = 0; i <= grid; ++i) {
      const double t = -0.1 + 1.2 * i / grid;
      const double v = theta.value(t);
      if (v < -1e-12 || v > 1.0 + 1e-12) throw ConfigError("CutoffParams: theta out of [0,1]");
      if (t <= epsilon && std::abs(v) > 1e-12)
        throw ConfigError("CutoffParams: theta not 0 below epsilon");
      if (t >= 1.0 - epsilon && std::abs(v - 1.0) > 1e-12)
        throw ConfigError("CutoffParams: theta not 1 above 1 - epsilon");
      if (std::abs(theta.deriv(t)) > sqrt2)
        throw ConfigError("CutoffParams: |theta'| exceeds sqrt(2)");
    }
  }
};

namespace detail {

struct ChiWork {
  std::vector<Point> sorted;   // label order
  std::vector<double> moduli;  // |l^i|
  double d = 0;                // d_{q,Q}
  std::vector<double> coeff;   // per point: sum over r with i in J_r of (r - |l^i|)
};

// d_{q,Q}(s)^2 = sum over r <= Q, i in J_{r,s}(a_q) of (r - |l^i|)^2 with
// J = { i : i > a_q(r), l^i in the open ball S_r } and labels sorted by
// increasing modulus.
inline ChiWork chi_distance(const Configuration& cfg, int q, const CutoffParams& params) {
  ChiWork w;
  const LabeledState ls = label(cfg);  // throws NonSimpleConfiguration on duplicates
  w.sorted = ls.positions;
  w.moduli.resize(w.sorted.size());
  for (std::size_t i = 0; i < w.sorted.size(); ++i) w.moduli[i] = norm(w.sorted[i]);
  w.coeff.assign(w.sorted.size(), 0.0);
  const long long n = static_cast<long long>(w.sorted.size());
  double d2 = 0;
  for (int r = 1; r <= params.Q; ++r) {
    const long long bound = params.schedule.count_bound(q, r);
    if (bound >= n) break;  // a_q nondecreasing in r: J empty from here on
    for (long long i = bound; i < n; ++i) {
      const double mod = w.moduli[static_cast<std::size_t>(i)];
      if (mod < static_cast<double>(r)) {
        const double term = static_cast<double>(r) - mod;
        d2 += term * term;
        w.coeff[static_cast<std::size_t>(i)] += term;
      }
    }
  }
  w.d = std::sqrt(d2);
  return w;
}

}  // namespace detail

// chi_{q,Q}(cfg) = theta(d_{q,Q}(cfg)) in [0, 1]: 0 on the tame set
// K_Q[a_q], 1 once the counts violate a_q^+ deeply.
inline double cutoff_chi(const Configuration& cfg, int q, const CutoffParams& params) {
  return params.theta.value(detail::chi_distance(cfg, q, params).d);
}

// Analytic gradient of chi_{q,Q} per point, in label order, alongside the
// sorted points it refers to.
struct ChiGradient {
  std::vector<Point> sorted_points;
  std::vector<Vec> grads;
  double value = 0;
};

inline ChiGradient chi_gradient(const Configuration& cfg, int q, const CutoffParams& params) {
  const detail::ChiWork w = detail::chi_distance(cfg, q, params);
  ChiGradient out;
  out.sorted_points = w.sorted;
  out.value = params.theta.value(w.d);
  out.grads.assign(w.sorted.size(), Vec{0, 0, 0});
  if (w.d <= 0) return out;
  const double tp = params.theta.deriv(w.d);
  if (tp == 0) return out;
  for (std::size_t i = 0; i < w.sorted.size(); ++i) {
    if (w.coeff[i] == 0 || w.moduli[i] == 0) continue;
    const double scale = -tp * w.coeff[i] / (w.d * w.moduli[i]);
    out.grads[i] = scale * w.sorted[i];
  }
  return out;
}

// Carre du champ (1/2) sum_i |grad_i chi|^2 with identity diffusion.
inline double carre_du_champ_chi(const Configuration& cfg, int q, const CutoffParams& params) {
  const ChiGradient g = chi_gradient(cfg, q, params);
  double acc = 0;
  for (const auto& v : g.grads) acc += norm2(v);
  return 0.5 * acc;
}

// The coordinate function chi~ = sum_{q <= N_levels} chi_{q,Q}.
inline double chi_coordinate(const Configuration& cfg, int n_levels, const CutoffParams& params) {
  if (n_levels < 1 || n_levels > params.schedule.levels())
    throw IndexOutOfRange("chi_coordinate: level count out of schedule range");
  double acc = 0;
  for (int q = 1; q <= n_levels; ++q) acc += cutoff_chi(cfg, q, params);
  return acc;
}

inline double chi_coordinate_carre(const Configuration& cfg, int n_levels,
                                   const CutoffParams& params) {
  if (n_levels < 1 || n_levels > params.schedule.levels())
    throw IndexOutOfRange("chi_coordinate_carre: level count out of schedule range");
  std::vector<Vec> total;
  double acc = 0;
  for (int q = 1; q <= n_levels; ++q) {
    const ChiGradient g = chi_gradient(cfg, q, params);
    if (total.empty()) total.assign(g.grads.size(), Vec{0, 0, 0});
    for (std::size_t i = 0; i < g.grads.size(); ++i) total[i] += g.grads[i];
  }
  for (const auto& v : total) acc += norm2(v);
  return 0.5 * acc;
}

// True when the configuration sits close to a nonsmooth point of d_{q,Q}:
// a modulus within tol of an integer radius <= Q, or a near-tie in the
// label sort. Finite-difference cross-checks should skip such inputs.
inline bool chi_near_kink(const Configuration& cfg, const CutoffParams& params,
                          double tol = 1e-5) {
  std::vector<double> mods;
  mods.reserve(cfg.size());
  for (const auto& p : cfg.points) mods.push_back(norm(p));
  for (double m : mods) {
    const double nearest = std::round(m);
    if (nearest >= 1 && nearest <= params.Q && std::abs(m - nearest) < tol) return true;
  }
  std::sort(mods.begin(), mods.end());
  for (std::size_t i = 1; i < mods.size(); ++i)
    if (mods[i] - mods[i - 1] < tol) return true;
  return false;
}

// --- trajectory scans -----------------------------------------------------

struct CollisionMonitorReport {
  std::vector<double> times;
  std::vector<double> min_gaps;  // +inf marks fewer than two particles inside S_R
  double upsilon_at_start = 0;
  double upsilon_at_end = 0;
  bool abort_flag = false;
};

// Minimal pairwise gap among particles inside the open ball S_R per time,
// the Lyapunov statistic at both ends, and an abort flag if any committed
// gap dips below the configured threshold.
inline CollisionMonitorReport collision_monitor(const Trajectory& traj, double R,
                                                double abort_gap = 1e-8) {
  CollisionMonitorReport rep;
  rep.times = traj.times;
  rep.min_gaps.reserve(traj.times.size());
  for (const auto& st : traj.states) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < st.size(); ++i) {
      if (!(norm(st.positions[i]) < R)) continue;
      for (std::size_t j = i + 1; j < st.size(); ++j) {
        if (!(norm(st.positions[j]) < R)) continue;
        g = std::min(g, dist(st.positions[i], st.positions[j]));
      }
    }
    if (g < abort_gap) rep.abort_flag = true;
    rep.min_gaps.push_back(g);
  }
  auto ups = [](double g) { return std::isinf(g) ? 0.0 : upsilon(g); };
  rep.upsilon_at_start = rep.min_gaps.empty() ? 0.0 : ups(rep.min_gaps.front());
  rep.upsilon_at_end = rep.min_gaps.empty() ? 0.0 : ups(rep.min_gaps.back());
  return rep;
}

// Smallest m such that every particle with label > m keeps |X_t| > r over
// [0, T]; labels are in the trajectory's order (sorted by initial modulus
// when produced by label()).
inline int nbj_counter(const Trajectory& traj, double r, double T) {
  if (T > traj.horizon() + 1e-12) throw GridMismatch("nbj_counter: T beyond the horizon");
  const std::size_t n = traj.n_particles();
  int m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool enters = false;
    for (std::size_t k = 0; k < traj.times.size() && !enters; ++k) {
      if (traj.times[k] > T + 1e-12) break;
      if (norm(traj.states[k].positions[i]) <= r) enters = true;
    }
    if (enters) m = static_cast<int>(i) + 1;
  }
  return m;
}

// First grid time the unlabeled configuration leaves K[a_q]; censored if
// it never does within the horizon.
inline ExitTime kappa_exit(const Trajectory& traj, int q, const TameSchedule& schedule) {
  if (q < 1) throw IndexOutOfRange("kappa_exit: q must be >= 1");
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    if (!in_tame_set(unlabel(traj.states[k]), schedule, q))
      return ExitTime{false, traj.times[k]};
  return ExitTime{true, traj.horizon()};
}

}  // namespace ibsim

#endif  // IBSIM_DIAGNOSTICS_HPP
