#ifndef IBSIM_MODELS_HPP
#define IBSIM_MODELS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/vec.hpp"

namespace ibsim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Pair potential descriptor with analytic derivatives. support_radius is
// the radius beyond which value/gradient/hessian vanish (kInf if none).
struct PairPotential {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat3(const Vec&)> hessian;
  double support_radius = kInf;
};

// Skew drift descriptor: gamma0 = row divergence of a skew-symmetric
// matrix potential, so div gamma0 = 0 identically.
struct SkewPotential {
  std::function<Vec(const Vec&)> gamma0;
  std::function<Mat3(const Vec&)> gamma0_jacobian;
  double support_radius = kInf;
};

// Smooth bump amp * exp(1/((|x|/radius)^2 - 1)) on |x| < radius, with
// closed-form gradient and hessian.
inline PairPotential smooth_bump_potential(double amplitude = 1.0, double radius = 1.0) {
  PairPotential p;
  p.support_radius = radius;
  const double r2inv = 1.0 / (radius * radius);
  p.value = [amplitude, r2inv, radius](const Vec& x) -> double {
    const double u = norm2(x) * r2inv;
    if (u >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 / (u - 1.0));
  };
  p.gradient = [amplitude, r2inv, radius](const Vec& x) -> Vec {
    const double u = norm2(x) * r2inv;
    if (u >= 1.0) return {0, 0, 0};
    const double f = amplitude * std::exp(1.0 / (u - 1.0));
    const double um1 = u - 1.0;
    const double c = -2.0 * r2inv * f / (um1 * um1);
    return c * x;
  };
  p.hessian = [amplitude, r2inv, radius](const Vec& x) -> Mat3 {
    const double u = norm2(x) * r2inv;
    if (u >= 1.0) return zero_mat();
    const double f = amplitude * std::exp(1.0 / (u - 1.0));
    const double um1 = u - 1.0;
    const double a2 = 1.0 / (um1 * um1);
    const double a3 = a2 / um1;
    const double a4 = a2 * a2;
    Mat3 h = (4.0 * r2inv * r2inv * (a4 + 2.0 * a3)) * outer(x, x);
    for (int k = 0; k < 3; ++k) h[k][k] += -2.0 * r2inv * a2;
    return f * h;
  };
  return p;
}

// Default skew potential: Gamma_12 = -Gamma_21 = bump exp(1/(|x|^2-1)) on
// |x| < 1, all other entries 0, giving gamma0 = (d2 psi, -d1 psi, 0).
inline SkewPotential default_skew_bump(double amplitude = 1.0, double radius = 1.0) {
  const PairPotential psi = smooth_bump_potential(amplitude, radius);
  SkewPotential s;
  s.support_radius = radius;
  s.gamma0 = [psi](const Vec& x) -> Vec {
    const Vec g = psi.gradient(x);
    return {g[1], -g[0], 0.0};
  };
  s.gamma0_jacobian = [psi](const Vec& x) -> Mat3 {
    const Mat3 h = psi.hessian(x);
    Mat3 j = zero_mat();
    for (int l = 0; l < 3; ++l) {
      j[0][l] = h[1][l];
      j[1][l] = -h[0][l];
    }
    return j;
  };
  return s;
}

enum class ModelKind {
  SineBeta,
  Bessel,
  GinibreRep1,
  GinibreRep2,
  LennardJones,
  Riesz,
  RuelleCompact,
  SkewPoisson,
  Free,
};

inline std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::SineBeta: return "sine_beta";
    case ModelKind::Bessel: return "bessel";
    case ModelKind::GinibreRep1: return "ginibre_rep1";
    case ModelKind::GinibreRep2: return "ginibre_rep2";
    case ModelKind::LennardJones: return "lennard_jones";
    case ModelKind::Riesz: return "riesz";
    case ModelKind::RuelleCompact: return "ruelle_compact";
    case ModelKind::SkewPoisson: return "skew_poisson";
    case ModelKind::Free: return "free";
  }
  return "?";
}

// Drift/diffusion descriptor. sigma is diffusion_scale times the identity
// for every shipped model; the slot exists so a non-constant branch stays
// expressible for user models.
struct InteractionSpec {
  ModelKind kind = ModelKind::Free;
  int dim = 1;
  double beta = 2.0;
  double alpha = 1.0;    // Bessel only
  double riesz_a = 3.0;  // Riesz only, requires a > dim
  double cutoff = kInf;
  double confinement = 0.0;  // harmonic -c x drift for finite-N systems
  double diffusion_scale = 1.0;
  double collision_tolerance = 1e-10;
  double nonconvergent_tolerance = 0.05;  // kInf disables the check
  PairPotential pair;                     // RuelleCompact, SkewPoisson (optional there)
  SkewPotential skew;                     // SkewPoisson

  static InteractionSpec sine_beta(double beta) {
    InteractionSpec s;
    s.kind = ModelKind::SineBeta;
    s.dim = 1;
    s.beta = beta;
    s.check();
    return s;
  }
  static InteractionSpec bessel(double alpha) {
    InteractionSpec s;
    s.kind = ModelKind::Bessel;
    s.dim = 1;
    s.beta = 2.0;
    s.alpha = alpha;
    s.check();
    return s;
  }
  static InteractionSpec ginibre_rep1() {
    InteractionSpec s;
    s.kind = ModelKind::GinibreRep1;
    s.dim = 2;
    s.check();
    return s;
  }
  static InteractionSpec ginibre_rep2() {
    InteractionSpec s;
    s.kind = ModelKind::GinibreRep2;
    s.dim = 2;
    s.check();
    return s;
  }
  static InteractionSpec lennard_jones(double beta) {
    InteractionSpec s;
    s.kind = ModelKind::LennardJones;
    s.dim = 3;
    s.beta = beta;
    s.check();
    return s;
  }
  static InteractionSpec riesz(double beta, double a, int dim) {
    InteractionSpec s;
    s.kind = ModelKind::Riesz;
    s.dim = dim;
    s.beta = beta;
    s.riesz_a = a;
    s.check();
    return s;
  }
  static InteractionSpec ruelle(PairPotential pot, double beta, int dim) {
    InteractionSpec s;
    s.kind = ModelKind::RuelleCompact;
    s.dim = dim;
    s.beta = beta;
    s.pair = std::move(pot);
    s.check();
    return s;
  }
  static InteractionSpec skew_poisson(double beta, SkewPotential sk = default_skew_bump()) {
    InteractionSpec s;
    s.kind = ModelKind::SkewPoisson;
    s.dim = 3;
    s.beta = beta;
    s.skew = std::move(sk);
    s.check();
    return s;
  }
  static InteractionSpec free_diffusion(int dim) {
    InteractionSpec s;
    s.kind = ModelKind::Free;
    s.dim = dim;
    s.check();
    return s;
  }

  void check() const {
    if (dim < 1 || dim > 3) throw ConfigError("model dimension must be 1..3");
    if (beta <= 0) throw ConfigError("beta must be > 0");
    switch (kind) {
      case ModelKind::SineBeta:
        if (dim != 1) throw ConfigError("sine_beta requires d = 1");
        break;
      case ModelKind::Bessel:
        if (dim != 1) throw ConfigError("bessel requires d = 1");
        if (alpha < 1) throw ConfigError("bessel requires alpha >= 1");
        break;
      case ModelKind::GinibreRep1:
      case ModelKind::GinibreRep2:
        if (dim != 2) throw ConfigError("ginibre requires d = 2");
        break;
      case ModelKind::LennardJones:
        if (dim != 3) throw ConfigError("lennard_jones requires d = 3");
        break;
      case ModelKind::Riesz:
        if (!(riesz_a > dim)) throw ConfigError("riesz requires a > d");
        break;
      case ModelKind::RuelleCompact:
        if (!pair.value) throw ConfigError("ruelle_compact requires a pair potential");
        break;
      case ModelKind::SkewPoisson:
        if (dim != 3) throw ConfigError("skew_poisson requires d = 3");
        if (!skew.gamma0) throw ConfigError("skew_poisson requires a skew potential");
        break;
      case ModelKind::Free:
        break;
    }
  }
};

// Drift evaluation result; convergence_gap is |value(cutoff) -
// value(cutoff/2)|, the last rung of the dyadic cutoff ladder.
struct DriftValue {
  Vec v{0, 0, 0};
  double cutoff_radius_used = kInf;
  double convergence_gap = 0.0;
};

namespace detail {

// Pair-interaction summand b-kernel at separation r = x - y.
inline Vec pair_kernel(const InteractionSpec& spec, const Vec& r) {
  switch (spec.kind) {
    case ModelKind::SineBeta:
      return {(spec.beta / 2.0) / r[0], 0, 0};
    case ModelKind::Bessel:
      return {1.0 / r[0], 0, 0};
    case ModelKind::GinibreRep1:
    case ModelKind::GinibreRep2:
      return (1.0 / norm2(r)) * r;
    case ModelKind::LennardJones: {
      const double s2 = norm2(r);
      const double inv2 = 1.0 / s2;
      const double inv8 = inv2 * inv2 * inv2 * inv2;
      const double inv14 = inv8 * inv2 * inv2 * inv2;
      return (spec.beta / 2.0) * ((12.0 * inv14 - 6.0 * inv8) * r);
    }
    case ModelKind::Riesz: {
      const double s = norm(r);
      return (spec.beta / 2.0 / std::pow(s, spec.riesz_a + 2.0)) * r;
    }
    case ModelKind::RuelleCompact:
      return (-spec.beta / 2.0) * spec.pair.gradient(r);
    case ModelKind::SkewPoisson: {
      Vec g = (spec.beta / 2.0) * spec.skew.gamma0(r);
      if (spec.pair.gradient) g += (-spec.beta / 2.0) * spec.pair.gradient(r);
      return g;
    }
    case ModelKind::Free:
      return {0, 0, 0};
  }
  return {0, 0, 0};
}

// d(pair_kernel)/dx at separation r.
inline Mat3 pair_kernel_jacobian(const InteractionSpec& spec, const Vec& r) {
  switch (spec.kind) {
    case ModelKind::SineBeta: {
      Mat3 m = zero_mat();
      m[0][0] = -(spec.beta / 2.0) / (r[0] * r[0]);
      return m;
    }
    case ModelKind::Bessel: {
      Mat3 m = zero_mat();
      m[0][0] = -1.0 / (r[0] * r[0]);
      return m;
    }
    case ModelKind::GinibreRep1:
    case ModelKind::GinibreRep2: {
      const double s2 = norm2(r);
      Mat3 m = (-2.0 / (s2 * s2)) * outer(r, r);
      for (int k = 0; k < spec.dim; ++k) m[k][k] += 1.0 / s2;
      return m;
    }
    case ModelKind::LennardJones: {
      const double s2 = norm2(r);
      const double inv2 = 1.0 / s2;
      const double inv8 = inv2 * inv2 * inv2 * inv2;
      const double inv10 = inv8 * inv2;
      const double inv14 = inv10 * inv2 * inv2;
      const double inv16 = inv14 * inv2;
      Mat3 m = (spec.beta / 2.0) * ((-12.0 * 14.0 * inv16 + 6.0 * 8.0 * inv10) * outer(r, r));
      for (int k = 0; k < spec.dim; ++k) m[k][k] += (spec.beta / 2.0) * (12.0 * inv14 - 6.0 * inv8);
      return m;
    }
    case ModelKind::Riesz: {
      const double s = norm(r);
      const double invp2 = std::pow(s, -(spec.riesz_a + 2.0));
      const double invp4 = std::pow(s, -(spec.riesz_a + 4.0));
      Mat3 m = (spec.beta / 2.0) * ((-(spec.riesz_a + 2.0) * invp4) * outer(r, r));
      for (int k = 0; k < spec.dim; ++k) m[k][k] += (spec.beta / 2.0) * invp2;
      return m;
    }
    case ModelKind::RuelleCompact:
      return (-spec.beta / 2.0) * spec.pair.hessian(r);
    case ModelKind::SkewPoisson: {
      Mat3 m = (spec.beta / 2.0) * spec.skew.gamma0_jacobian(r);
      if (spec.pair.hessian) m += (-spec.beta / 2.0) * spec.pair.hessian(r);
      return m;
    }
    case ModelKind::Free:
      return zero_mat();
  }
  return zero_mat();
}

// True if the pair at separation r is inside the summation window of
// radius c. Rep-2 windows by |y| around the origin, everything else by
// |x - y| symmetric about x.
inline bool in_window(const InteractionSpec& spec, const Vec& x, const Vec& y, double c) {
  if (c == kInf) return true;
  if (spec.kind == ModelKind::GinibreRep2) return norm(y) < c;
  return dist(x, y) < c;
}

inline void check_not_colliding(const InteractionSpec& spec, const Vec& x,
                                const Configuration& env) {
  for (const auto& y : env.points)
    if (dist(x, y) < spec.collision_tolerance)
      throw CollisionTooClose("drift: point within collision tolerance of an environment point");
  if (spec.kind == ModelKind::Bessel && !(x[0] > spec.collision_tolerance))
    throw DomainViolation("bessel drift requires x > 0");
}

// Model field terms that do not depend on the environment.
inline Vec field_term(const InteractionSpec& spec, const Vec& x) {
  switch (spec.kind) {
    case ModelKind::Bessel:
      return {spec.alpha / (2.0 * x[0]), 0, 0};
    case ModelKind::GinibreRep2:
      return -1.0 * x;
    default:
      return {0, 0, 0};
  }
}

inline Vec env_sum(const InteractionSpec& spec, const Vec& x, const Configuration& env, double c) {
  Vec s{0, 0, 0};
  for (const auto& y : env.points)
    if (in_window(spec, x, y, c)) s += pair_kernel(spec, x - y);
  return s;
}

}  // namespace detail

// b(x, env) with summation window `cutoff`. The conditionally convergent
// log-interaction sums are evaluated over windows symmetric about x
// (rep-2: about the origin); the reported gap compares cutoff against
// cutoff/2.
inline DriftValue drift(const Vec& x, const Configuration& env, const InteractionSpec& spec,
                        double cutoff) {
  if (!(cutoff > 0)) throw ConfigError("drift cutoff must be > 0");
  detail::check_not_colliding(spec, x, env);
  DriftValue out;
  out.cutoff_radius_used = cutoff;
  const Vec field = detail::field_term(spec, x);
  const Vec full = field + detail::env_sum(spec, x, env, cutoff);
  out.v = full;
  if (cutoff != kInf) {
    const Vec half = field + detail::env_sum(spec, x, env, cutoff / 2.0);
    out.convergence_gap = norm(full - half);
  }
  if (spec.nonconvergent_tolerance != kInf &&
      out.convergence_gap > spec.nonconvergent_tolerance * (1.0 + norm(out.v)))
    throw NonConvergentSum("drift: cutoff ladder gap " + format_double(out.convergence_gap) +
                           " exceeds tolerance");
  return out;
}

inline DriftValue drift(const Vec& x, const Configuration& env, const InteractionSpec& spec) {
  return drift(x, env, spec, spec.cutoff);
}

// Near/tail split of the drift: near gathers pair terms with |x - y| < s
// when x lies in the open ball S_r, and vanishes outside S_r; tail is the
// exact remainder drift - near, so re-summation is an identity.
inline std::pair<DriftValue, DriftValue> drift_tail_decomposition(const Vec& x,
                                                                  const Configuration& env,
                                                                  const InteractionSpec& spec,
                                                                  double r, double s) {
  if (!(0 < r && r < s)) throw ConfigError("drift_tail_decomposition requires 0 < r < s");
  const DriftValue full = drift(x, env, spec, kInf);
  DriftValue near;
  near.cutoff_radius_used = s;
  if (norm(x) < r) {
    for (const auto& y : env.points)
      if (dist(x, y) < s) near.v += detail::pair_kernel(spec, x - y);
  }
  DriftValue tail;
  tail.cutoff_radius_used = kInf;
  tail.v = full.v - near.v;
  return {near, tail};
}

// Analytic Jacobian of drift(x, env) in x, using spec.cutoff windows.
inline Mat3 drift_jacobian(const Vec& x, const Configuration& env, const InteractionSpec& spec) {
  detail::check_not_colliding(spec, x, env);
  Mat3 j = zero_mat();
  switch (spec.kind) {
    case ModelKind::Bessel:
      j[0][0] = -spec.alpha / (2.0 * x[0] * x[0]);
      break;
    case ModelKind::GinibreRep2:
      for (int k = 0; k < spec.dim; ++k) j[k][k] = -1.0;
      break;
    default:
      break;
  }
  for (const auto& y : env.points)
    if (detail::in_window(spec, x, y, spec.cutoff)) j += detail::pair_kernel_jacobian(spec, x - y);
  return j;
}

// gamma(x, env) = beta sum gamma0(x - s_i): the skew part of the drift
// alone, without the 1/2 and without d^mu.
inline DriftValue drift_skew(const Vec& x, const Configuration& env, const InteractionSpec& spec) {
  if (spec.kind != ModelKind::SkewPoisson)
    throw ConfigError("drift_skew requires a skew_poisson spec");
  DriftValue out;
  for (const auto& y : env.points) out.v += spec.beta * spec.skew.gamma0(x - y);
  return out;
}

// Full uncut pairwise drift of particle i in a labeled finite-N state,
// plus the confinement drift -c x_i.
inline DriftValue finite_N_drift(std::size_t i, const LabeledState& state,
                                 const InteractionSpec& spec, double confinement) {
  if (i < 1 || i > state.size()) throw IndexOutOfRange("finite_N_drift: index out of range");
  Configuration others;
  others.dim = state.dim;
  others.points.reserve(state.size() - 1);
  for (std::size_t j = 0; j < state.size(); ++j)
    if (j != i - 1) others.points.push_back(state.positions[j]);
  DriftValue d = drift(state.positions[i - 1], others, spec, kInf);
  d.v += (-confinement) * state.positions[i - 1];
  return d;
}

}  // namespace ibsim

#endif  // IBSIM_MODELS_HPP
