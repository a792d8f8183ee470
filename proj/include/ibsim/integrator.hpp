#ifndef IBSIM_INTEGRATOR_HPP
#define IBSIM_INTEGRATOR_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ibsim/brownian.hpp"
#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/models.hpp"
#include "ibsim/vec.hpp"

namespace ibsim {

enum class Scheme { Euler, TamedEuler };

inline std::string scheme_name(Scheme s) {
  return s == Scheme::Euler ? "euler" : "tamed_euler";
}

struct SolverConfig {
  Scheme scheme = Scheme::Euler;
  double dt = 1e-3;
  double horizon = 1.0;
  // Gap below which a step is halved; the value applies at step size dt
  // and is rescaled by sqrt(h/dt) at local step h. Negative means the
  // default 10 sqrt(dt).
  double min_gap_substep_threshold = -1.0;
  int max_substep_depth = 4;
  double collision_abort_gap = 1e-8;
  std::uint64_t seed = 0;

  double substep_threshold() const {
    return min_gap_substep_threshold >= 0 ? min_gap_substep_threshold : 10.0 * std::sqrt(dt);
  }
  int n_steps() const {
    const double k = horizon / dt;
    const double kr = std::round(k);
    if (std::abs(k - kr) > 1e-9 * std::max(1.0, std::abs(k)))
      throw ConfigError("solver: dt must divide the horizon");
    if (kr < 1) throw ConfigError("solver: horizon must cover at least one step");
    return static_cast<int>(kr);
  }
};

enum class EventKind { Substep, LabelSwap, CollisionAbortEvent, DomainRetry };

struct TrajectoryEvent {
  double t = 0;
  EventKind kind = EventKind::Substep;
  int index = 0;     // substep depth, or particle label
  double value = 0;  // gap or displacement that triggered the event
};

// Committed states on the solver grid plus the event log. The driving
// model spec travels with the trajectory so downstream probes can
// re-evaluate drifts along the path.
struct Trajectory {
  double dt = 0;
  std::vector<double> times;
  std::vector<LabeledState> states;
  std::vector<TrajectoryEvent> events;
  InteractionSpec spec;

  std::size_t n_times() const { return times.size(); }
  std::size_t n_particles() const { return states.empty() ? 0 : states.front().size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

struct SimResult {
  Trajectory traj;
  BrownianPath noise;
};

// Exit-time result for the various first-passage scans; censored marks a
// path that never left within the horizon.
struct ExitTime {
  bool censored = true;
  double t = 0;
};

namespace detail {

// Drift of dynamic particle i given the other dynamic particles (in index
// order) followed by static environment points; the summation order is
// fixed so that a frozen re-solve with the full particle set reproduces
// the source run bit for bit.
inline Vec system_drift(const InteractionSpec& spec, const std::vector<Point>& dynamic,
                        std::size_t i, const std::vector<Point>* env) {
  const Vec& x = dynamic[i];
  if (spec.kind == ModelKind::Bessel && !(x[0] > spec.collision_tolerance))
    throw DomainViolation("bessel drift requires x > 0");
  Vec b = field_term(spec, x);
  const double c = spec.cutoff;
  for (std::size_t j = 0; j < dynamic.size(); ++j) {
    if (j == i) continue;
    if (dist(x, dynamic[j]) < spec.collision_tolerance)
      throw CollisionTooClose("integrator: dynamic pair within collision tolerance");
    if (in_window(spec, x, dynamic[j], c)) b += pair_kernel(spec, x - dynamic[j]);
  }
  if (env != nullptr) {
    for (const auto& y : *env) {
      if (dist(x, y) < spec.collision_tolerance)
        throw CollisionTooClose("integrator: environment point within collision tolerance");
      if (in_window(spec, x, y, c)) b += pair_kernel(spec, x - y);
    }
  }
  b += (-spec.confinement) * x;
  return b;
}

inline double min_gap(const std::vector<Point>& dynamic, const std::vector<Point>* env) {
  double g = kInf;
  for (std::size_t i = 0; i < dynamic.size(); ++i) {
    for (std::size_t j = i + 1; j < dynamic.size(); ++j)
      g = std::min(g, dist(dynamic[i], dynamic[j]));
    if (env != nullptr)
      for (const auto& y : *env) g = std::min(g, dist(dynamic[i], y));
  }
  if (env != nullptr)
    for (std::size_t i = 0; i < env->size(); ++i)
      for (std::size_t j = i + 1; j < env->size(); ++j)
        g = std::min(g, dist((*env)[i], (*env)[j]));
  return g;
}

// One committed step with adaptive halving, operating on fine-step windows
// of the supplied Brownian path. env_at maps a fine-step index to the
// environment point set held over that window (nullptr for none).
class StepEngine {
 public:
  StepEngine(const InteractionSpec& spec, const SolverConfig& solver, const BrownianPath& bp,
             std::vector<TrajectoryEvent>& events)
      : spec_(spec), solver_(solver), bp_(bp), events_(events) {}

  using EnvLookup = const std::vector<Point>* (*)(const void*, int);

  void set_env(const void* ctx, EnvLookup lookup) {
    env_ctx_ = ctx;
    env_lookup_ = lookup;
  }

  void advance(std::vector<Point>& x, int fine_off, int fine_len, int depth, double t_left) {
    const double h = fine_len * bp_.finest_dt;
    const std::vector<Point>* env =
        env_lookup_ != nullptr ? env_lookup_(env_ctx_, fine_off) : nullptr;
    const bool can_split = depth < solver_.max_substep_depth && fine_len >= 2;
    if (can_split) {
      const double gap = min_gap(x, env);
      const double thr = solver_.substep_threshold() * std::sqrt(h / solver_.dt);
      if (gap < thr) {
        // One event per committed step is enough to reconstruct where the
        // step budget went; deeper descents are implied.
        if (depth == 0) events_.push_back({t_left, EventKind::Substep, depth + 1, gap});
        advance(x, fine_off, fine_len / 2, depth + 1, t_left);
        advance(x, fine_off + fine_len / 2, fine_len / 2, depth + 1, t_left + h / 2);
        return;
      }
    }
    std::vector<Point> next(x.size());
    bool domain_ok = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      Vec b = system_drift(spec_, x, i, env);
      if (solver_.scheme == Scheme::TamedEuler) b = (1.0 / (1.0 + h * norm(b))) * b;
      const Vec db = bp_.window_sum(fine_off, fine_len, static_cast<int>(i));
      next[i] = x[i] + h * b + spec_.diffusion_scale * db;
      if (spec_.kind == ModelKind::Bessel && !(next[i][0] > 0)) domain_ok = false;
    }
    if (!domain_ok) {
      if (can_split) {
        events_.push_back({t_left, EventKind::DomainRetry, depth + 1, 0.0});
        advance(x, fine_off, fine_len / 2, depth + 1, t_left);
        advance(x, fine_off + fine_len / 2, fine_len / 2, depth + 1, t_left + h / 2);
        return;
      }
      throw DomainViolation("bessel path crossed 0 after sub-step exhaustion");
    }
    x.swap(next);
  }

 private:
  const InteractionSpec& spec_;
  const SolverConfig& solver_;
  const BrownianPath& bp_;
  std::vector<TrajectoryEvent>& events_;
  const void* env_ctx_ = nullptr;
  EnvLookup env_lookup_ = nullptr;
};

inline void commit_checks(const std::vector<Point>& prev, const std::vector<Point>& cur,
                          const std::vector<Point>* env, double t, const SolverConfig& solver,
                          int dim, std::vector<TrajectoryEvent>& events) {
  const double g = min_gap(cur, env);
  if (g < solver.collision_abort_gap) {
    events.push_back({t, EventKind::CollisionAbortEvent, 0, g});
    throw CollisionAbort("committed gap " + format_double(g) + " below abort gap at t = " +
                         format_double(t));
  }
  // Discrete stand-in for label propagation along continuous paths:
  // nearest matching between consecutive committed states, warning when a
  // particle's nearest new position is someone else's or the match
  // distance exceeds 3 sqrt(d dt).
  const double warn_dist = 3.0 * std::sqrt(static_cast<double>(dim) * solver.dt);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    double best = kInf;
    std::size_t best_j = i;
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const double dd = dist(prev[i], cur[j]);
      if (dd < best) {
        best = dd;
        best_j = j;
      }
    }
    if (best_j != i || best > warn_dist)
      events.push_back({t, EventKind::LabelSwap, static_cast<int>(i) + 1, best});
  }
}

}  // namespace detail

// Euler-Maruyama (plain or tamed) for the labeled finite-N system, with
// exact Brownian increment bookkeeping: the returned path drives replays
// at any coarser step size by aggregation.
inline SimResult simulate(const LabeledState& initial, const InteractionSpec& spec,
                          const SolverConfig& solver) {
  if (!is_simple(unlabel(initial), 0.0))
    throw NonSimpleConfiguration("simulate: initial state has coincident particles");
  if (initial.dim != spec.dim) throw ConfigError("simulate: state/spec dimension mismatch");
  const int steps = solver.n_steps();
  const int fine_per_step = 1 << solver.max_substep_depth;
  const double finest_dt = solver.dt / fine_per_step;

  SimResult out;
  out.noise = BrownianPath::generate(static_cast<int>(initial.size()), spec.dim,
                                     steps * fine_per_step, finest_dt, solver.seed);
  Trajectory& traj = out.traj;
  traj.dt = solver.dt;
  traj.spec = spec;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(initial);

  std::vector<Point> x = initial.positions;
  detail::StepEngine engine(spec, solver, out.noise, traj.events);
  for (int k = 0; k < steps; ++k) {
    const std::vector<Point> prev = x;
    const double t_next = (k + 1) * solver.dt;
    engine.advance(x, k * fine_per_step, fine_per_step, 0, k * solver.dt);
    detail::commit_checks(prev, x, nullptr, t_next, solver, spec.dim, traj.events);
    traj.times.push_back(t_next);
    traj.states.push_back(LabeledState{x, spec.dim});
  }
  return out;
}

// Fitted |X_t - X_u|^4 moment growth: least-squares slope and intercept of
// log moment against log lag over a dyadic ladder of lags, restricted to
// members whose first m particles stay within radius a.
struct MomentFit {
  double slope = 0;
  double intercept = 0;  // log of the fitted constant
  std::vector<double> lags;
  std::vector<double> moments;
};

inline MomentFit moment_bound_probe(const std::vector<Trajectory>& ensemble, std::size_t m,
                                    double a) {
  if (ensemble.size() < 100)
    throw InsufficientEnsemble("moment_bound_probe needs at least 100 members");
  const std::size_t n_t = ensemble.front().n_times();
  std::vector<int> lag_steps;
  for (int L = 1; L + 1 <= static_cast<int>(n_t) - 1; L *= 2) lag_steps.push_back(L);
  if (lag_steps.size() < 2)
    throw DegenerateRegression("moment_bound_probe: need at least two distinct lags");

  MomentFit fit;
  for (int L : lag_steps) {
    double acc = 0;
    long long cnt = 0;
    for (const auto& traj : ensemble) {
      if (traj.n_times() != n_t) throw GridMismatch("moment_bound_probe: ragged ensemble");
      bool within = true;
      for (const auto& st : traj.states)
        for (std::size_t i = 0; i < m && within; ++i)
          if (norm(st.positions[i]) > a) within = false;
      if (!within) continue;
      for (std::size_t k = 0; k + static_cast<std::size_t>(L) < n_t; ++k)
        for (std::size_t i = 0; i < m; ++i) {
          const double d2 =
              norm2(traj.states[k + static_cast<std::size_t>(L)].positions[i] -
                    traj.states[k].positions[i]);
          acc += d2 * d2;
          ++cnt;
        }
    }
    if (cnt == 0) throw InsufficientEnsemble("moment_bound_probe: no members within radius a");
    fit.lags.push_back(L * ensemble.front().dt);
    fit.moments.push_back(acc / static_cast<double>(cnt));
  }
  // Least squares on (log lag, log moment).
  const std::size_t n = fit.lags.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(fit.lags[i]);
    const double ly = std::log(fit.moments[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0) throw DegenerateRegression("moment_bound_probe: degenerate lag ladder");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace ibsim

#endif  // IBSIM_INTEGRATOR_HPP
