#ifndef IBSIM_BROWNIAN_HPP
#define IBSIM_BROWNIAN_HPP

#include <cstdint>
#include <vector>

#include "ibsim/errors.hpp"
#include "ibsim/rng.hpp"
#include "ibsim/vec.hpp"

namespace ibsim {

// Pre-generated finest-level Gaussian increments. Coarser increments are
// always exact partial sums of these, never resampled, so several solves
// can be driven by literally the same noise.
struct BrownianPath {
  int n_particles = 0;
  int dim = 1;
  double finest_dt = 0;
  int n_steps = 0;
  std::vector<double> incr;  // [step][particle][comp]

  double& at(int step, int particle, int comp) {
    return incr[(static_cast<std::size_t>(step) * static_cast<std::size_t>(n_particles) +
                 static_cast<std::size_t>(particle)) *
                    static_cast<std::size_t>(dim) +
                static_cast<std::size_t>(comp)];
  }
  double at(int step, int particle, int comp) const {
    return incr[(static_cast<std::size_t>(step) * static_cast<std::size_t>(n_particles) +
                 static_cast<std::size_t>(particle)) *
                    static_cast<std::size_t>(dim) +
                static_cast<std::size_t>(comp)];
  }

  // Sum of increments over fine steps [off, off + len) for one particle.
  Vec window_sum(int off, int len, int particle) const {
    Vec s{0, 0, 0};
    for (int k = off; k < off + len; ++k)
      for (int c = 0; c < dim; ++c) s[static_cast<std::size_t>(c)] += at(k, particle, c);
    return s;
  }

  static BrownianPath generate(int n_particles, int dim, int n_steps, double finest_dt,
                               std::uint64_t seed) {
    BrownianPath bp;
    bp.n_particles = n_particles;
    bp.dim = dim;
    bp.finest_dt = finest_dt;
    bp.n_steps = n_steps;
    bp.incr.resize(static_cast<std::size_t>(n_steps) * static_cast<std::size_t>(n_particles) *
                   static_cast<std::size_t>(dim));
    Rng rng(seed);
    const double sd = std::sqrt(finest_dt);
    for (int k = 0; k < n_steps; ++k)
      for (int i = 0; i < n_particles; ++i)
        for (int c = 0; c < dim; ++c) bp.at(k, i, c) = rng.normal(0.0, sd);
    return bp;
  }

  // Aggregate by a power-of-two factor; increments become exact partial
  // sums of the finest-level ones. Implemented as repeated pairwise
  // halving so that coarsen(2) twice and coarsen(4) agree bit for bit.
  BrownianPath coarsen(int factor) const {
    if (factor < 1 || (factor & (factor - 1)) != 0)
      throw IndivisibleFactor("coarsen: factor must be a power of 2");
    if (n_steps % factor != 0)
      throw IndivisibleFactor("coarsen: factor does not divide the step count");
    if (factor == 1) return *this;
    BrownianPath bp;
    bp.n_particles = n_particles;
    bp.dim = dim;
    bp.finest_dt = finest_dt * 2;
    bp.n_steps = n_steps / 2;
    bp.incr.resize(static_cast<std::size_t>(bp.n_steps) * static_cast<std::size_t>(n_particles) *
                   static_cast<std::size_t>(dim));
    for (int k = 0; k < bp.n_steps; ++k)
      for (int i = 0; i < n_particles; ++i)
        for (int c = 0; c < dim; ++c) bp.at(k, i, c) = at(2 * k, i, c) + at(2 * k + 1, i, c);
    return factor == 2 ? bp : bp.coarsen(factor / 2);
  }

  // Streams of the first m particles, unchanged.
  BrownianPath select_particles(int m) const {
    if (m < 0 || m > n_particles) throw IndexOutOfRange("select_particles: bad particle count");
    BrownianPath bp;
    bp.n_particles = m;
    bp.dim = dim;
    bp.finest_dt = finest_dt;
    bp.n_steps = n_steps;
    bp.incr.resize(static_cast<std::size_t>(n_steps) * static_cast<std::size_t>(m) *
                   static_cast<std::size_t>(dim));
    for (int k = 0; k < n_steps; ++k)
      for (int i = 0; i < m; ++i)
        for (int c = 0; c < dim; ++c) bp.at(k, i, c) = at(k, i, c);
    return bp;
  }
};

}  // namespace ibsim

#endif  // IBSIM_BROWNIAN_HPP
