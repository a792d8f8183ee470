#ifndef IBSIM_IFC_HPP
#define IBSIM_IFC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ibsim/brownian.hpp"
#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/integrator.hpp"
#include "ibsim/models.hpp"
#include "ibsim/rng.hpp"

namespace ibsim {

// The tail of a labeled run, frozen as a time-indexed environment.
struct FrozenEnvironment {
  std::vector<double> times;
  std::vector<Configuration> states;
  double dt = 0;

  std::size_t n_times() const { return times.size(); }

  // Held at the left grid value between grid times.
  const Configuration& at_time(double t) const {
    if (states.empty()) throw GridMismatch("frozen environment is empty");
    const double k = std::floor(t / dt + 1e-9);
    const std::size_t idx =
        std::min(states.size() - 1, static_cast<std::size_t>(std::max(0.0, k)));
    return states[idx];
  }
};

struct TaggedPath {
  std::vector<double> times;
  std::vector<std::vector<Point>> positions;  // per time, m points
  double dt = 0;
  int dim = 1;
};

// Split every committed state: first m labels become the tagged path, the
// rest the frozen environment.
inline std::pair<TaggedPath, FrozenEnvironment> freeze_env(const Trajectory& traj,
                                                           std::size_t m) {
  if (m > traj.n_particles()) throw IndexOutOfRange("freeze_env: m exceeds particle count");
  TaggedPath tp;
  FrozenEnvironment env;
  tp.times = traj.times;
  tp.dt = traj.dt;
  tp.dim = traj.states.empty() ? 1 : traj.states.front().dim;
  env.times = traj.times;
  env.dt = traj.dt;
  tp.positions.reserve(traj.states.size());
  env.states.reserve(traj.states.size());
  for (const auto& st : traj.states) {
    MLabeledState split = split_m(st, m);
    tp.positions.push_back(std::move(split.tagged));
    env.states.push_back(std::move(split.environment));
  }
  return {tp, env};
}

namespace detail {

struct FrozenEnvCtx {
  const FrozenEnvironment* env;
  double finest_dt;
};

inline const std::vector<Point>* frozen_env_lookup(const void* ctx, int fine_off) {
  const auto* c = static_cast<const FrozenEnvCtx*>(ctx);
  if (c->env->states.empty()) return nullptr;
  const double t = fine_off * c->finest_dt;
  return &c->env->at_time(t).points;
}

}  // namespace detail

// Solve the m-particle SDE against a frozen environment, driven by the
// supplied Brownian increments (aggregated to the solver's step size,
// never regenerated). With m equal to the source particle count and the
// source solver settings this reproduces the source run bit for bit.
inline Trajectory solve_frozen(const std::vector<Point>& tagged0, const FrozenEnvironment& env,
                               const BrownianPath& bp_m, const InteractionSpec& spec,
                               const SolverConfig& solver) {
  if (static_cast<int>(tagged0.size()) != bp_m.n_particles)
    throw ConfigError("solve_frozen: noise particle count mismatch");
  const int steps = solver.n_steps();
  const double fine_per_step_d = solver.dt / bp_m.finest_dt;
  const int fine_per_step = static_cast<int>(std::round(fine_per_step_d));
  if (std::abs(fine_per_step_d - fine_per_step) > 1e-9 ||
      (fine_per_step & (fine_per_step - 1)) != 0)
    throw IndivisibleFactor("solve_frozen: solver dt must be a power-of-2 multiple of finest_dt");
  if (steps * fine_per_step > bp_m.n_steps)
    throw GridMismatch("solve_frozen: Brownian path shorter than the horizon");
  if ((1 << solver.max_substep_depth) > fine_per_step)
    throw ConfigError("solve_frozen: substep depth exceeds noise resolution");
  if (!env.states.empty() && env.times.back() + env.dt < solver.horizon - 1e-9)
    throw GridMismatch("solve_frozen: environment does not cover the horizon");

  Trajectory traj;
  traj.dt = solver.dt;
  traj.spec = spec;
  traj.times.push_back(0.0);
  traj.states.push_back(LabeledState{tagged0, spec.dim});

  std::vector<Point> x = tagged0;
  detail::StepEngine engine(spec, solver, bp_m, traj.events);
  detail::FrozenEnvCtx ctx{&env, bp_m.finest_dt};
  engine.set_env(&ctx, &detail::frozen_env_lookup);
  for (int k = 0; k < steps; ++k) {
    const std::vector<Point> prev = x;
    const double t_next = (k + 1) * solver.dt;
    engine.advance(x, k * fine_per_step, fine_per_step, 0, k * solver.dt);
    const std::vector<Point>* env_now =
        env.states.empty() ? nullptr : &env.at_time(t_next).points;
    detail::commit_checks(prev, x, env_now, t_next, solver, spec.dim, traj.events);
    traj.times.push_back(t_next);
    traj.states.push_back(LabeledState{x, spec.dim});
  }
  return traj;
}

namespace detail {

// Index of each Y time on the X grid; Y's grid must be a subset of X's.
inline std::vector<std::size_t> align_grids(const std::vector<double>& ty,
                                            const std::vector<double>& tx) {
  std::vector<std::size_t> idx(ty.size());
  for (std::size_t k = 0; k < ty.size(); ++k) {
    const double ratio = tx.size() > 1 ? ty[k] / (tx[1] - tx[0]) : 0.0;
    const std::size_t j = static_cast<std::size_t>(std::llround(ratio));
    if (j >= tx.size() || std::abs(tx[j] - ty[k]) > 1e-9 * (1.0 + std::abs(ty[k])))
      throw GridMismatch("grids do not align");
    idx[k] = j;
  }
  return idx;
}

}  // namespace detail

// Sup over times and tagged particles of |Y - X| (Euclidean per particle).
// Y's grid may be a coarsening of X's.
inline double consistency_error(const Trajectory& y, const TaggedPath& x_tagged) {
  if (y.n_particles() != (x_tagged.positions.empty() ? 0 : x_tagged.positions.front().size()))
    throw GridMismatch("consistency_error: particle count mismatch");
  const auto idx = detail::align_grids(y.times, x_tagged.times);
  double sup = 0;
  for (std::size_t k = 0; k < y.times.size(); ++k)
    for (std::size_t i = 0; i < y.n_particles(); ++i)
      sup = std::max(sup, dist(y.states[k].positions[i], x_tagged.positions[idx[k]][i]));
  return sup;
}

// Sup distance between two frozen-environment solves sharing the same
// Brownian path; vanishes with dt when pathwise uniqueness holds.
inline double uniqueness_probe(const std::vector<Point>& tagged0, const FrozenEnvironment& env,
                               const BrownianPath& bp_m, const InteractionSpec& spec,
                               const SolverConfig& solverA, const SolverConfig& solverB) {
  const Trajectory a = solve_frozen(tagged0, env, bp_m, spec, solverA);
  const Trajectory b = solve_frozen(tagged0, env, bp_m, spec, solverB);
  const Trajectory& coarse = a.times.size() <= b.times.size() ? a : b;
  const Trajectory& fine = a.times.size() <= b.times.size() ? b : a;
  const auto idx = detail::align_grids(coarse.times, fine.times);
  double sup = 0;
  for (std::size_t k = 0; k < coarse.times.size(); ++k)
    for (std::size_t i = 0; i < coarse.n_particles(); ++i)
      sup = std::max(sup, dist(coarse.states[k].positions[i], fine.states[idx[k]].positions[i]));
  return sup;
}

// The localizing set H[a]_{p,q,r}: tagged points inside S_r with pairwise
// and tagged-environment gaps above 2^-p, environment tame at level q+1,
// and the combined configuration simple.
struct HRegion {
  int p = 1;
  int q = 1;
  int r = 1;
  TameSchedule schedule;

  bool contains(const std::vector<Point>& tagged, const Configuration& env) const {
    const double gap_floor = std::pow(2.0, -p);
    for (const auto& x : tagged)
      if (!(norm(x) < static_cast<double>(r))) return false;
    for (std::size_t i = 0; i < tagged.size(); ++i) {
      for (std::size_t j = i + 1; j < tagged.size(); ++j)
        if (!(dist(tagged[i], tagged[j]) > gap_floor)) return false;
      for (const auto& y : env.points)
        if (!(dist(tagged[i], y) > gap_floor)) return false;
    }
    for (std::size_t i = 0; i < env.points.size(); ++i)
      for (std::size_t j = i + 1; j < env.points.size(); ++j)
        if (!(dist(env.points[i], env.points[j]) > 0.0)) return false;
    if (q + 1 > schedule.levels()) throw IndexOutOfRange("HRegion: schedule lacks level q+1");
    return in_tame_set(env, schedule, q + 1);
  }
};

// First grid time at which HRegion membership fails; censored if the path
// stays inside over the whole horizon.
inline ExitTime exit_time_sigma(const TaggedPath& tagged, const FrozenEnvironment& env,
                                const HRegion& region) {
  if (tagged.times.size() != env.times.size())
    throw GridMismatch("exit_time_sigma: tagged/environment grids differ");
  for (std::size_t k = 0; k < tagged.times.size(); ++k)
    if (!region.contains(tagged.positions[k], env.states[k]))
      return ExitTime{false, tagged.times[k]};
  return ExitTime{true, tagged.times.empty() ? 0.0 : tagged.times.back()};
}

// Per-step minimal localization parameters and the horizon summary.
struct B1Report {
  std::vector<int> min_p, min_q, min_r;  // -1 where uncovered
  int max_p = 0, max_q = 0, max_r = 0;   // over covered steps
  std::size_t uncovered_steps = 0;
  double uncovered_fraction = 0;
};

// The three constraints are separable, so the minimal (p, q, r) per step
// is found coordinate-wise: smallest r holding the tagged points, smallest
// p below the observed gaps, smallest q taming the environment.
inline B1Report b1_report(const Trajectory& traj, std::size_t m, const TameSchedule& schedule,
                          int p_max, int q_max, int r_max) {
  if (p_max < 1 || q_max < 1 || r_max < 1) throw ConfigError("b1_report: caps must be positive");
  if (q_max + 1 > schedule.levels())
    throw ConfigError("b1_report: schedule needs q_max + 1 levels");
  B1Report rep;
  auto [tagged, env] = freeze_env(traj, m);
  const std::size_t n = traj.times.size();
  rep.min_p.assign(n, -1);
  rep.min_q.assign(n, -1);
  rep.min_r.assign(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& xs = tagged.positions[k];
    const auto& e = env.states[k];
    double max_norm = 0;
    for (const auto& x : xs) max_norm = std::max(max_norm, norm(x));
    double min_gap_te = kInf;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = i + 1; j < xs.size(); ++j)
        min_gap_te = std::min(min_gap_te, dist(xs[i], xs[j]));
      for (const auto& y : e.points) min_gap_te = std::min(min_gap_te, dist(xs[i], y));
    }
    bool env_simple = true;
    for (std::size_t i = 0; i < e.points.size() && env_simple; ++i)
      for (std::size_t j = i + 1; j < e.points.size(); ++j)
        if (dist(e.points[i], e.points[j]) <= 0.0) {
          env_simple = false;
          break;
        }

    int pr = -1;
    for (int p = 1; p <= p_max; ++p)
      if (min_gap_te > std::pow(2.0, -p)) {
        pr = p;
        break;
      }
    int rr = -1;
    for (int r = 1; r <= r_max; ++r)
      if (max_norm < static_cast<double>(r)) {
        rr = r;
        break;
      }
    int qr = -1;
    for (int q = 1; q <= q_max; ++q)
      if (in_tame_set(e, schedule, q + 1)) {
        qr = q;
        break;
      }
    if (pr > 0 && qr > 0 && rr > 0 && env_simple) {
      rep.min_p[k] = pr;
      rep.min_q[k] = qr;
      rep.min_r[k] = rr;
      rep.max_p = std::max(rep.max_p, pr);
      rep.max_q = std::max(rep.max_q, qr);
      rep.max_r = std::max(rep.max_r, rr);
    } else {
      ++rep.uncovered_steps;
    }
  }
  rep.uncovered_fraction = n == 0 ? 0.0 : static_cast<double>(rep.uncovered_steps) / n;
  return rep;
}

namespace detail {

// m-particle stacked drift b^m(x, env) as one (m*d)-vector.
inline std::vector<double> stacked_drift(const InteractionSpec& spec,
                                         const std::vector<Point>& tagged,
                                         const Configuration& env) {
  std::vector<double> out;
  out.reserve(tagged.size() * static_cast<std::size_t>(spec.dim));
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    const Vec b = system_drift(spec, tagged, i, &env.points);
    for (int c = 0; c < spec.dim; ++c) out.push_back(b[static_cast<std::size_t>(c)]);
  }
  return out;
}

inline bool segment_stays_in_region(const std::vector<Point>& x, const std::vector<Point>& y,
                                    const Configuration& env, const HRegion& region,
                                    int n_checks = 16) {
  for (int s = 0; s <= n_checks; ++s) {
    const double t = static_cast<double>(s) / n_checks;
    std::vector<Point> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (1.0 - t) * x[i] + t * y[i];
    if (!region.contains(z, env)) return false;
  }
  return true;
}

inline bool same_ordering_1d(const std::vector<Point>& x, const std::vector<Point>& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if ((x[i][0] < x[j][0]) != (y[i][0] < y[j][0])) return false;
  return true;
}

}  // namespace detail

// Sampled Lipschitz modulus of the m-particle drift over same-component
// pairs in the region: max |b^m(x) - b^m(y)| / |x - y|.
inline double lipschitz_modulus_probe(const InteractionSpec& spec, std::size_t m,
                                      const HRegion& region, const Configuration& env_sample,
                                      int n_pairs, std::uint64_t seed = 12345) {
  if (n_pairs < 1) throw DegeneratePair("lipschitz_modulus_probe: n_pairs must be >= 1");
  if (!in_tame_set(env_sample, region.schedule, region.q + 1))
    throw ConfigError("lipschitz_modulus_probe: environment not tame at level q+1");
  Rng rng(seed);
  const double gap_floor = std::pow(2.0, -region.p);
  double modulus = 0;
  int accepted = 0;
  int attempts = 0;
  const int max_attempts = 20000 * n_pairs;
  while (accepted < n_pairs && attempts < max_attempts) {
    ++attempts;
    std::vector<Point> x(m, Point{0, 0, 0});
    for (std::size_t i = 0; i < m; ++i)
      for (int c = 0; c < spec.dim; ++c)
        x[i][static_cast<std::size_t>(c)] =
            rng.uniform(-static_cast<double>(region.r), static_cast<double>(region.r));
    if (spec.kind == ModelKind::Bessel)
      for (auto& p : x) p[0] = std::abs(p[0]) + gap_floor;
    if (!region.contains(x, env_sample)) continue;
    // Nearby second point: stay in the same connected component.
    std::vector<Point> y(m);
    const double scale = 0.25 * gap_floor;
    for (std::size_t i = 0; i < m; ++i) {
      y[i] = x[i];
      for (int c = 0; c < spec.dim; ++c)
        y[i][static_cast<std::size_t>(c)] += rng.uniform(-scale, scale);
    }
    if (!region.contains(y, env_sample)) continue;
    if (spec.dim == 1) {
      if (!detail::same_ordering_1d(x, y)) continue;
    } else {
      if (!detail::segment_stays_in_region(x, y, env_sample, region)) continue;
    }
    double d2 = 0;
    for (std::size_t i = 0; i < m; ++i) d2 += norm2(x[i] - y[i]);
    const double dxy = std::sqrt(d2);
    if (dxy < 1e-12) continue;
    const auto bx = detail::stacked_drift(spec, x, env_sample);
    const auto by = detail::stacked_drift(spec, y, env_sample);
    double diff2 = 0;
    for (std::size_t k = 0; k < bx.size(); ++k) diff2 += (bx[k] - by[k]) * (bx[k] - by[k]);
    modulus = std::max(modulus, std::sqrt(diff2) / dxy);
    ++accepted;
  }
  if (accepted == 0)
    throw DegeneratePair("lipschitz_modulus_probe: no admissible pairs found in the region");
  return modulus;
}

}  // namespace ibsim

#endif  // IBSIM_IFC_HPP
