#ifndef IBSIM_ANALYSIS_HPP
#define IBSIM_ANALYSIS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "ibsim/brownian.hpp"
#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/integrator.hpp"
#include "ibsim/models.hpp"
#include "ibsim/stats.hpp"

namespace ibsim {

// C^2 cylinder function of the first m tagged coordinates, with analytic
// gradient and per-coordinate Hessian block.
struct CylinderFunction {
  std::size_t m = 1;
  double support_radius = kInf;
  std::function<double(const MLabeledState&)> value;
  std::function<Vec(const MLabeledState&, std::size_t)> grad;    // d/dx_i
  std::function<Mat3(const MLabeledState&, std::size_t)> hess;   // d^2/dx_i^2 block
};

// F = x_i[k].
inline CylinderFunction coordinate_cylinder(std::size_t m, std::size_t i, int k) {
  CylinderFunction f;
  f.m = m;
  f.value = [i, k](const MLabeledState& s) { return s.tagged[i][static_cast<std::size_t>(k)]; };
  f.grad = [i, k](const MLabeledState&, std::size_t j) {
    Vec g{0, 0, 0};
    if (j == i) g[static_cast<std::size_t>(k)] = 1.0;
    return g;
  };
  f.hess = [](const MLabeledState&, std::size_t) { return zero_mat(); };
  return f;
}

// F = x_i[k]^2.
inline CylinderFunction coordinate_square_cylinder(std::size_t m, std::size_t i, int k) {
  CylinderFunction f;
  f.m = m;
  f.value = [i, k](const MLabeledState& s) {
    const double v = s.tagged[i][static_cast<std::size_t>(k)];
    return v * v;
  };
  f.grad = [i, k](const MLabeledState& s, std::size_t j) {
    Vec g{0, 0, 0};
    if (j == i) g[static_cast<std::size_t>(k)] = 2.0 * s.tagged[i][static_cast<std::size_t>(k)];
    return g;
  };
  f.hess = [i, k](const MLabeledState&, std::size_t j) {
    Mat3 h = zero_mat();
    if (j == i) h[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = 2.0;
    return h;
  };
  return f;
}

// Smooth cylinder of a coordinate gap: F = tanh(x_b[0] - x_a[0]).
inline CylinderFunction gap_cylinder(std::size_t m, std::size_t a, std::size_t b) {
  CylinderFunction f;
  f.m = m;
  auto u_of = [a, b](const MLabeledState& s) { return s.tagged[b][0] - s.tagged[a][0]; };
  f.value = [u_of](const MLabeledState& s) { return std::tanh(u_of(s)); };
  f.grad = [u_of, a, b](const MLabeledState& s, std::size_t j) {
    Vec g{0, 0, 0};
    if (j != a && j != b) return g;
    const double t = std::tanh(u_of(s));
    const double d = 1.0 - t * t;
    g[0] = (j == b ? d : -d);
    return g;
  };
  f.hess = [u_of, a, b](const MLabeledState& s, std::size_t j) {
    Mat3 h = zero_mat();
    if (j != a && j != b) return h;
    const double t = std::tanh(u_of(s));
    h[0][0] = -2.0 * t * (1.0 - t * t);  // same for both ends: (+-1)^2 factor
    return h;
  };
  return f;
}

// Time reversal on [0, T]; T must be a grid point. An involution that
// permutes the committed states.
inline Trajectory reverse_path(const Trajectory& traj, double T) {
  const double k_real = T / traj.dt;
  const long long k = std::llround(k_real);
  if (k < 0 || k >= static_cast<long long>(traj.n_times()) ||
      std::abs(k_real - static_cast<double>(k)) > 1e-9 * (1.0 + std::abs(k_real)))
    throw GridMismatch("reverse_path: T is not on the grid");
  Trajectory out;
  out.dt = traj.dt;
  out.spec = traj.spec;
  out.times.reserve(static_cast<std::size_t>(k) + 1);
  out.states.reserve(static_cast<std::size_t>(k) + 1);
  for (long long i = 0; i <= k; ++i) {
    out.times.push_back(traj.times[static_cast<std::size_t>(i)]);
    out.states.push_back(traj.states[static_cast<std::size_t>(k - i)]);
  }
  return out;
}

namespace detail {

// Generator term G = sum_i (b_i, grad_i F) + (1/2) sum_i a tr(hess_i F),
// with b_i the drift actually driving the run and a the scalar diffusion.
inline double generator_term(const CylinderFunction& F, const LabeledState& state,
                             const InteractionSpec& spec) {
  const MLabeledState split = split_m(state, F.m);
  const double a = spec.diffusion_scale * spec.diffusion_scale;
  double g = 0;
  for (std::size_t i = 0; i < F.m; ++i) {
    const Vec b = system_drift(spec, state.positions, i, nullptr);
    g += dot(b, F.grad(split, i));
    const Mat3 h = F.hess(split, i);
    double tr = 0;
    for (int kk = 0; kk < spec.dim; ++kk) tr += h[kk][kk];
    g += 0.5 * a * tr;
  }
  return g;
}

// Stochastic-integral route for M_t: running sums of (grad F, sigma dB).
inline std::vector<double> martingale_stochastic(const CylinderFunction& F,
                                                 const Trajectory& traj,
                                                 const BrownianPath& bp) {
  const std::size_t n_steps = traj.n_times() - 1;
  const double ratio = traj.dt / bp.finest_dt;
  const int fine_per_step = static_cast<int>(std::llround(ratio));
  if (std::abs(ratio - fine_per_step) > 1e-9)
    throw GridMismatch("martingale_stochastic: noise grid does not divide the trajectory grid");
  if (static_cast<long long>(fine_per_step) * static_cast<long long>(n_steps) > bp.n_steps)
    throw GridMismatch("martingale_stochastic: noise path too short");
  std::vector<double> m(traj.n_times(), 0.0);
  double acc = 0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const MLabeledState split = split_m(traj.states[k], F.m);
    for (std::size_t i = 0; i < F.m; ++i) {
      const Vec db = bp.window_sum(static_cast<int>(k) * fine_per_step, fine_per_step,
                                   static_cast<int>(i));
      acc += traj.spec.diffusion_scale * dot(F.grad(split, i), db);
    }
    m[k + 1] = acc;
  }
  return m;
}

// Pathwise route for M_t: F difference minus the generator integral (left
// Riemann on the grid).
inline std::vector<double> martingale_pathwise(const CylinderFunction& F, const Trajectory& traj) {
  std::vector<double> m(traj.n_times(), 0.0);
  const double f0 = F.value(split_m(traj.states.front(), F.m));
  double g_int = 0;
  for (std::size_t k = 1; k < traj.n_times(); ++k) {
    g_int += generator_term(F, traj.states[k - 1], traj.spec) * traj.dt;
    m[k] = F.value(split_m(traj.states[k], F.m)) - f0 - g_int;
  }
  return m;
}

}  // namespace detail

// Semimartingale identity residual: sup_t difference between the
// stochastic-sum route and the pathwise route for the martingale part of
// F along the run. Decays at strong order with dt.
inline double ito_residual(const CylinderFunction& F, const Trajectory& traj,
                           const BrownianPath& bp) {
  const auto ma = detail::martingale_stochastic(F, traj, bp);
  const auto mb = detail::martingale_pathwise(F, traj);
  double sup = 0;
  for (std::size_t k = 0; k < ma.size(); ++k) sup = std::max(sup, std::abs(ma[k] - mb[k]));
  return sup;
}

// Forward-backward decomposition residual. The forward martingale comes
// from the stochastic sums; the reversed-path one is computed from the
// path alone as F differences along reverse_path(traj) minus the
// generator integral of the matching tail segment, and the combination
// must reproduce F(w_t) - F(w_0).
inline double lyons_zheng_residual(const CylinderFunction& F, const Trajectory& traj,
                                   const BrownianPath& bp, double T) {
  const Trajectory rev = reverse_path(traj, T);
  const std::size_t K = rev.n_times() - 1;
  const auto m_fwd = detail::martingale_stochastic(F, traj, bp);
  // Running generator integral of the forward path, left Riemann.
  std::vector<double> g_int(K + 1, 0.0);
  for (std::size_t k = 1; k <= K; ++k)
    g_int[k] = g_int[k - 1] + detail::generator_term(F, traj.states[k - 1], traj.spec) * traj.dt;
  const double f_rev0 = F.value(split_m(rev.states.front(), F.m));
  std::vector<double> m_rev(K + 1, 0.0);
  for (std::size_t j = 0; j <= K; ++j) {
    const double fj = F.value(split_m(rev.states[j], F.m));
    m_rev[j] = fj - f_rev0 - (g_int[K] - g_int[K - j]);
  }
  const double f0 = F.value(split_m(traj.states.front(), F.m));
  double sup = 0;
  for (std::size_t k = 0; k <= K; ++k) {
    const double ft = F.value(split_m(traj.states[k], F.m));
    const double combo = 0.5 * (m_fwd[k] + m_rev[K - k] - m_rev[K]);
    sup = std::max(sup, std::abs(ft - f0 - combo));
  }
  return sup;
}

struct QvResult {
  double realized = 0;
  double predicted = 0;
};

// Realized quadratic variation of the stochastic-route martingale against
// the generator-predicted integral of |sigma^T grad F|^2.
inline QvResult qv_check(const CylinderFunction& F, const Trajectory& traj,
                         const BrownianPath& bp) {
  const auto ma = detail::martingale_stochastic(F, traj, bp);
  QvResult r;
  for (std::size_t k = 1; k < ma.size(); ++k) {
    const double dm = ma[k] - ma[k - 1];
    r.realized += dm * dm;
  }
  const double a = traj.spec.diffusion_scale * traj.spec.diffusion_scale;
  for (std::size_t k = 0; k + 1 < traj.n_times(); ++k) {
    const MLabeledState split = split_m(traj.states[k], F.m);
    double s = 0;
    for (std::size_t i = 0; i < F.m; ++i) s += norm2(F.grad(split, i));
    r.predicted += a * s * traj.dt;
  }
  return r;
}

// Two-sample KS between a path statistic on the ensemble and on the
// time-reversed ensemble.
inline double reversibility_test(const std::vector<Trajectory>& ensemble,
                                 const std::function<double(const Trajectory&)>& statistic,
                                 double T) {
  if (ensemble.size() < 2) throw InsufficientEnsemble("reversibility_test: ensemble too small");
  std::vector<double> fwd, bwd;
  fwd.reserve(ensemble.size());
  bwd.reserve(ensemble.size());
  for (const auto& traj : ensemble) {
    fwd.push_back(statistic(traj));
    bwd.push_back(statistic(reverse_path(traj, T)));
  }
  return ks_two_sample(fwd, bwd).p_value;
}

}  // namespace ibsim

#endif  // IBSIM_ANALYSIS_HPP
