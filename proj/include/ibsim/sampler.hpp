#ifndef IBSIM_SAMPLER_HPP
#define IBSIM_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/rng.hpp"
#include "ibsim/vec.hpp"

namespace ibsim {

enum class WindowKind { Box, Disk, HalfLine };

struct SamplerConfig {
  int n_particles = 16;
  int dim = 1;
  WindowKind window_kind = WindowKind::Box;
  double window = 5.0;  // box halfwidth, disk radius, or half-line length
  double intensity = 1.0;
  double beta = 2.0;
  double alpha = 1.0;           // bessel hard-edge exponent
  long long mcmc_steps = -1;    // proposals; negative -> burn-in floor
  double proposal_scale = -1;   // negative -> auto-tuned from spacing
  std::uint64_t seed = 0;

  long long proposals() const {
    const long long floor = 1000LL * n_particles;
    return std::max(floor, mcmc_steps);
  }
  double volume() const {
    switch (window_kind) {
      case WindowKind::Box: {
        double v = 1;
        for (int k = 0; k < dim; ++k) v *= 2.0 * window;
        return v;
      }
      case WindowKind::Disk:
        return 3.14159265358979323846 * window * window;
      case WindowKind::HalfLine:
        return window;
    }
    return 0;
  }
};

// Metropolis acceptance rule a(delta) = min(1, exp(delta log pi)), shared
// by every chain here and by the brute-force detailed-balance check.
inline double metropolis_acceptance(double delta_logpi) {
  return delta_logpi >= 0 ? 1.0 : std::exp(delta_logpi);
}

inline bool metropolis_accept(double delta_logpi, Rng& rng) {
  if (delta_logpi >= 0) return true;
  return rng.uniform01() < std::exp(delta_logpi);
}

// Tuning trace and mixing summary of one chain.
struct SamplerDiagnostics {
  double acceptance_rate = 0;
  double tuned_scale = 0;
  std::vector<std::pair<double, double>> trace;  // (scale, acceptance) per tune round
};

inline Point uniform_in_window(const SamplerConfig& cfg, Rng& rng) {
  Point p{0, 0, 0};
  switch (cfg.window_kind) {
    case WindowKind::Box:
      for (int k = 0; k < cfg.dim; ++k)
        p[static_cast<std::size_t>(k)] = rng.uniform(-cfg.window, cfg.window);
      break;
    case WindowKind::Disk: {
      const double r = cfg.window * std::sqrt(rng.uniform01());
      const double a = 6.283185307179586 * rng.uniform01();
      p[0] = r * std::cos(a);
      p[1] = r * std::sin(a);
      break;
    }
    case WindowKind::HalfLine:
      p[0] = rng.uniform(0.0, cfg.window);
      break;
  }
  return p;
}

inline bool in_window(const SamplerConfig& cfg, const Point& p) {
  switch (cfg.window_kind) {
    case WindowKind::Box:
      for (int k = 0; k < cfg.dim; ++k)
        if (std::abs(p[static_cast<std::size_t>(k)]) > cfg.window) return false;
      return true;
    case WindowKind::Disk:
      return norm(p) <= cfg.window;
    case WindowKind::HalfLine:
      return p[0] >= 0.0 && p[0] <= cfg.window;
  }
  return false;
}

// Poisson field on the window: Poisson(intensity * volume) points, i.i.d.
// uniform.
inline Configuration sample_poisson(const SamplerConfig& cfg) {
  Configuration out;
  out.dim = cfg.dim;
  const double vol = cfg.volume();
  if (vol <= 0) return out;
  Rng rng(cfg.seed);
  const int n = rng.poisson(cfg.intensity * vol);
  out.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.points.push_back(uniform_in_window(cfg, rng));
  return out;
}

enum class LoggasKind { Dyson, Ginibre, Bessel };

namespace detail {

inline double loggas_confining(LoggasKind kind, const Point& p) {
  switch (kind) {
    case LoggasKind::Dyson:
      return 0.5 * p[0] * p[0];
    case LoggasKind::Ginibre:
      return norm2(p);
    case LoggasKind::Bessel:
      return p[0];
  }
  return 0;
}

// log pi difference for moving particle j from old_p to new_p.
inline double loggas_move_delta(const std::vector<Point>& x, std::size_t j, const Point& new_p,
                                LoggasKind kind, const SamplerConfig& cfg) {
  const Point& old_p = x[j];
  double delta = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k == j) continue;
    const double d_new = dist(new_p, x[k]);
    const double d_old = dist(old_p, x[k]);
    if (d_new <= 0) return -1e300;
    delta += cfg.beta * (std::log(d_new) - std::log(d_old));
  }
  delta -= cfg.n_particles * (loggas_confining(kind, new_p) - loggas_confining(kind, old_p));
  if (kind == LoggasKind::Bessel) delta += cfg.alpha * (std::log(new_p[0]) - std::log(old_p[0]));
  return delta;
}

// Near-equilibrium deterministic starting layout, jittered.
inline std::vector<Point> loggas_init(LoggasKind kind, const SamplerConfig& cfg, Rng& rng) {
  const int n = cfg.n_particles;
  std::vector<Point> x(static_cast<std::size_t>(n), Point{0, 0, 0});
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    switch (kind) {
      case LoggasKind::Dyson:
        // Semicircle-ish spread on [-2, 2].
        x[static_cast<std::size_t>(i)][0] = -2.0 + 4.0 * u;
        break;
      case LoggasKind::Ginibre: {
        // Golden-angle spiral filling the unit disk.
        const double r = std::sqrt(u);
        const double a = 2.399963229728653 * i;
        x[static_cast<std::size_t>(i)][0] = r * std::cos(a);
        x[static_cast<std::size_t>(i)][1] = r * std::sin(a);
        break;
      }
      case LoggasKind::Bessel:
        x[static_cast<std::size_t>(i)][0] = 2.0 * u;
        break;
    }
  }
  const double jitter = 0.05 / std::max(1, n);
  for (auto& p : x)
    for (int k = 0; k < cfg.dim; ++k) p[static_cast<std::size_t>(k)] += rng.uniform(-jitter, jitter);
  if (kind == LoggasKind::Bessel)
    for (auto& p : x) p[0] = std::abs(p[0]) + 1e-6;
  return x;
}

}  // namespace detail

// Metropolis sample of the finite-N log-gas density
//   prod_{i<j} |x_i - x_j|^beta  prod_i exp(-N V(x_i))  (x^alpha factor at
// the Bessel hard edge). Proposal scale is auto-tuned toward acceptance
// 0.3 during burn-in, then frozen; deterministic for a fixed seed.
inline Configuration sample_loggas(const SamplerConfig& cfg, LoggasKind kind,
                                   SamplerDiagnostics* diag = nullptr) {
  if (cfg.n_particles < 1) throw ConfigError("sample_loggas: need at least one particle");
  const int expected_dim = kind == LoggasKind::Ginibre ? 2 : 1;
  if (cfg.dim != expected_dim) throw ConfigError("sample_loggas: kind/dimension mismatch");
  Rng rng(cfg.seed);
  std::vector<Point> x = detail::loggas_init(kind, cfg, rng);
  const long long total = cfg.proposals();
  const long long burn = std::max<long long>(1, (6 * total) / 10);
  double scale = cfg.proposal_scale > 0 ? cfg.proposal_scale
                                        : 2.0 / std::max(1, cfg.n_particles);
  SamplerDiagnostics local;
  const long long tune_window = std::max<long long>(50, burn / 20);
  long long tune_acc = 0, tune_cnt = 0;
  long long samp_acc = 0, samp_cnt = 0;
  for (long long step = 0; step < total; ++step) {
    const std::size_t j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(cfg.n_particles)));
    Point prop = x[j];
    for (int k = 0; k < cfg.dim; ++k) prop[static_cast<std::size_t>(k)] += rng.normal(0.0, scale);
    bool ok = !(kind == LoggasKind::Bessel && !(prop[0] > 0));
    if (ok) ok = metropolis_accept(detail::loggas_move_delta(x, j, prop, kind, cfg), rng);
    if (ok) x[j] = prop;
    if (step < burn) {
      tune_acc += ok ? 1 : 0;
      ++tune_cnt;
      if (tune_cnt == tune_window) {
        const double rate = static_cast<double>(tune_acc) / tune_cnt;
        local.trace.emplace_back(scale, rate);
        scale *= std::exp(0.8 * (rate - 0.3));
        tune_acc = 0;
        tune_cnt = 0;
      }
    } else {
      samp_acc += ok ? 1 : 0;
      ++samp_cnt;
    }
  }
  local.tuned_scale = scale;
  local.acceptance_rate = samp_cnt > 0 ? static_cast<double>(samp_acc) / samp_cnt : 0.0;
  if (diag != nullptr) *diag = local;
  if (local.acceptance_rate < 0.1 || local.acceptance_rate > 0.7)
    throw MCMCNotMixed("sample_loggas: post-tuning acceptance " +
                       format_double(local.acceptance_rate) + " outside [0.1, 0.7]");
  Configuration out;
  out.dim = cfg.dim;
  out.points = x;
  std::sort(out.points.begin(), out.points.end(), label_less);
  return out;
}

// Rescale (and for bulk kinds re-center) so the local mean density near
// the reference point is 1. The map is linear, so applying it twice only
// changes the output through density re-estimation.
inline Configuration unfold_bulk(const Configuration& cfg, LoggasKind kind) {
  Configuration out = cfg;
  if (cfg.size() < 4) return out;
  const std::size_t n = cfg.size();
  // k-nearest-neighbor density with the (k - 1) numerator; the plain k
  // over-counts by a half spacing on rigid point sets. A third of the
  // cloud balances scale noise against the bulk density droop.
  const std::size_t k = std::max<std::size_t>(4, n / 3);
  if (kind == LoggasKind::Dyson) {
    // Center on the cloud mean, not on a particle: a particle-locked
    // window would imprint the rigid gas's comb on downstream pair
    // statistics.
    double center = 0;
    for (const auto& p : cfg.points) center += p[0] / static_cast<double>(n);
    std::vector<double> near;
    near.reserve(n);
    for (const auto& p : cfg.points) near.push_back(std::abs(p[0] - center));
    std::sort(near.begin(), near.end());
    const double halfspan = near[k - 1];
    if (halfspan <= 0) return out;
    const double density = static_cast<double>(k - 1) / (2.0 * halfspan);
    for (auto& p : out.points) p[0] = (p[0] - center) * density;
  } else if (kind == LoggasKind::Ginibre) {
    Point center{0, 0, 0};
    for (const auto& p : cfg.points) center += (1.0 / static_cast<double>(n)) * p;
    std::vector<double> rad;
    rad.reserve(n);
    for (const auto& p : cfg.points) rad.push_back(dist(p, center));
    std::sort(rad.begin(), rad.end());
    const double rk = rad[k - 1];
    if (rk <= 0) return out;
    const double density = static_cast<double>(k - 1) / (3.14159265358979323846 * rk * rk);
    const double s = std::sqrt(density);
    for (auto& p : out.points) p = s * (p - center);
  } else {
    std::vector<double> xs;
    xs.reserve(n);
    for (const auto& p : cfg.points) xs.push_back(p[0]);
    std::sort(xs.begin(), xs.end());
    const double xk = xs[k - 1];
    if (xk <= 0) return out;
    const double density = static_cast<double>(k - 1) / xk;
    for (auto& p : out.points) p[0] *= density;
  }
  std::sort(out.points.begin(), out.points.end(), label_less);
  return out;
}

// Grand-canonical Metropolis (births, deaths, moves) for the Gibbs density
// exp(-beta sum Psi0) relative to the Poisson field on the window.
inline Configuration sample_gibbs(const SamplerConfig& cfg,
                                  const std::function<double(const Vec&)>& pair_potential,
                                  SamplerDiagnostics* diag = nullptr) {
  Rng rng(cfg.seed);
  std::vector<Point> x;
  const double lam_v = cfg.intensity * cfg.volume();
  if (lam_v <= 0) return Configuration{{}, cfg.dim};
  const long long total = cfg.proposals();
  const long long burn = std::max<long long>(1, (6 * total) / 10);
  double scale = cfg.proposal_scale > 0 ? cfg.proposal_scale : 0.5;
  SamplerDiagnostics local;
  const long long tune_window = std::max<long long>(50, burn / 20);
  long long tune_acc = 0, tune_cnt = 0, samp_acc = 0, samp_cnt = 0;

  auto energy_with = [&](const Point& p, std::size_t skip) {
    double e = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i == skip) continue;
      e += pair_potential(p - x[i]);
    }
    return e;
  };

  for (long long step = 0; step < total; ++step) {
    const double which = rng.uniform01();
    bool move_attempted = false, accepted = false;
    if (which < 1.0 / 3.0) {  // birth
      const Point p = uniform_in_window(cfg, rng);
      const double de = energy_with(p, x.size());
      const double delta = std::log(lam_v / (x.size() + 1.0)) - cfg.beta * de;
      if (metropolis_accept(delta, rng)) x.push_back(p);
    } else if (which < 2.0 / 3.0) {  // death
      if (!x.empty()) {
        const std::size_t j = static_cast<std::size_t>(rng.below(x.size()));
        const double de = energy_with(x[j], j);
        const double delta = std::log(static_cast<double>(x.size()) / lam_v) + cfg.beta * de;
        if (metropolis_accept(delta, rng)) {
          x[j] = x.back();
          x.pop_back();
        }
      }
    } else {  // displacement
      move_attempted = true;
      if (!x.empty()) {
        const std::size_t j = static_cast<std::size_t>(rng.below(x.size()));
        Point prop = x[j];
        for (int k = 0; k < cfg.dim; ++k) prop[static_cast<std::size_t>(k)] += rng.normal(0.0, scale);
        if (in_window(cfg, prop)) {
          const double delta = -cfg.beta * (energy_with(prop, j) - energy_with(x[j], j));
          if (metropolis_accept(delta, rng)) {
            x[j] = prop;
            accepted = true;
          }
        }
      }
    }
    if (move_attempted) {
      if (step < burn) {
        tune_acc += accepted ? 1 : 0;
        ++tune_cnt;
        if (tune_cnt >= tune_window) {
          const double rate = static_cast<double>(tune_acc) / tune_cnt;
          local.trace.emplace_back(scale, rate);
          scale *= std::exp(0.8 * (rate - 0.3));
          tune_acc = 0;
          tune_cnt = 0;
        }
      } else {
        samp_acc += accepted ? 1 : 0;
        ++samp_cnt;
      }
    }
  }
  local.tuned_scale = scale;
  local.acceptance_rate = samp_cnt > 0 ? static_cast<double>(samp_acc) / samp_cnt : 0.0;
  if (diag != nullptr) *diag = local;
  if (samp_cnt > 50 && (local.acceptance_rate < 0.1 || local.acceptance_rate > 0.7))
    throw MCMCNotMixed("sample_gibbs: post-tuning move acceptance " +
                       format_double(local.acceptance_rate) + " outside [0.1, 0.7]");
  Configuration out;
  out.dim = cfg.dim;
  out.points = std::move(x);
  std::sort(out.points.begin(), out.points.end(), label_less);
  return out;
}

}  // namespace ibsim

#endif  // IBSIM_SAMPLER_HPP
