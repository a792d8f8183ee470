#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ibsim/diagnostics.hpp"
#include "ibsim/rng.hpp"

using namespace ibsim;

namespace {

Configuration cfg1d(std::initializer_list<double> xs) {
  Configuration c;
  c.dim = 1;
  for (double x : xs) c.points.push_back(Point{x, 0, 0});
  return c;
}

// n distinct points at radii strictly inside (0, 1).
Configuration crowd_inside_unit(int n) {
  Configuration c;
  c.dim = 1;
  for (int i = 0; i < n; ++i)
    c.points.push_back(Point{0.02 + 0.96 * (i + 0.5) / n, 0, 0});
  return c;
}

TameSchedule unit_schedule(int levels = 6) { return TameSchedule::scaled(1.0, 1, levels); }

}  // namespace

TEST_CASE("Lyapunov pair: junction values and boundary behavior") {
  REQUIRE(upsilon(1.0) == 1.0);
  REQUIRE(upsilon_small(1.0) == 1.0);
  REQUIRE(upsilon(std::exp(-1.0)) == Catch::Approx(2.0).epsilon(1e-14));
  REQUIRE(upsilon_small(0.0) == 0.0);
  REQUIRE_THROWS_AS(upsilon(0.0), DomainViolation);
  REQUIRE_THROWS_AS(upsilon(-1.0), DomainViolation);
  REQUIRE_THROWS_AS(upsilon_small(-0.1), DomainViolation);
}

TEST_CASE("Lyapunov pair: C^2 junction, convexity, and the inverse relation") {
  // Value, first and second derivative match across t = 1.
  const double h = 1e-6;
  const double d_left = (upsilon(1.0) - upsilon(1.0 - h)) / h;
  const double d_right = (upsilon(1.0 + h) - upsilon(1.0)) / h;
  REQUIRE(std::abs(d_left - d_right) < 1e-5);
  const double dd_left = (upsilon(1.0 - 2 * h) - 2 * upsilon(1.0 - h) + upsilon(1.0)) / (h * h);
  const double dd_right = (upsilon(1.0) - 2 * upsilon(1.0 + h) + upsilon(1.0 + 2 * h)) / (h * h);
  REQUIRE(std::abs(dd_left - 1.0) < 1e-3);
  REQUIRE(std::abs(dd_right - 1.0) < 1e-3);

  // Convexity and monotonicity on a grid spanning both branches.
  double prev_u = upsilon(1e-4);
  double prev_v = upsilon_small(0.0);
  double prev_diff = 0;
  bool first = true;
  for (int i = 1; i <= 4000; ++i) {
    const double t = 1e-4 + i * (4.0 - 1e-4) / 4000.0;
    const double u = upsilon(t);
    const double v = upsilon_small(t);
    REQUIRE(u > 0.0);
    REQUIRE(u < prev_u);           // decreasing
    REQUIRE(v > prev_v);           // strictly increasing
    const double diff = u - prev_u;
    if (!first) REQUIRE(diff - prev_diff >= -1e-12);  // second differences
    prev_diff = diff;
    prev_u = u;
    prev_v = v;
    first = false;

    // upsilon_small = -1/upsilon' exactly, branch by branch.
    const double deriv = t <= 1.0 ? -1.0 / t : -std::exp(1.0 - t);
    REQUIRE(v == Catch::Approx(-1.0 / deriv).epsilon(1e-14));
  }
}

TEST_CASE("mollified ramp: bounds, plateaus, slope cap") {
  const SmoothStep theta(0.05, 0.04);
  const double sqrt2 = std::sqrt(2.0);
  double max_slope = 0;
  const int grid = 100000;
  for (int i = 0; i <= grid; ++i) {
    const double t = -0.1 + 1.2 * i / grid;
    const double v = theta.value(t);
    const double d = theta.deriv(t);
    REQUIRE(v >= -1e-12);
    REQUIRE(v <= 1.0 + 1e-12);
    if (t <= 0.05) REQUIRE(v == 0.0);
    if (t >= 0.95) REQUIRE(v == 1.0);
    REQUIRE(std::abs(d) <= sqrt2);
    max_slope = std::max(max_slope, std::abs(d));
    if (i > 0) {
      const double t_prev = -0.1 + 1.2 * (i - 1) / grid;
      REQUIRE(v >= theta.value(t_prev) - 1e-12);  // monotone
    }
  }
  REQUIRE(max_slope <= 1.0 / 0.82 + 1e-9);
}

TEST_CASE("cutoff chi vanishes on the tame set") {
  const CutoffParams params(unit_schedule(), 3);
  // Two points, counts well under a_1(r) = ceil(r).
  const Configuration c = cfg1d({0.4, 1.7});
  REQUIRE(tame_level(c, params.schedule).value() >= 1);
  REQUIRE(in_tame_set(c, params.schedule, 2));
  REQUIRE(cutoff_chi(c, 2, params) == 0.0);
}

TEST_CASE("cutoff chi reproduces the hand-computed ramp value") {
  // a_1(r) = r with a single ball level Q = 1: label indices 2 and 3 at
  // radii 0.3 and 0.5 contribute d = sqrt(0.49 + 0.25).
  TameSchedule sched;
  sched.growth_exponent = 1.0;
  sched.level_scale = {1};
  const CutoffParams params(sched, 1);
  const Configuration c = cfg1d({0.1, 0.3, 0.5});
  const double d = std::sqrt(0.74);
  const double want = (d - 0.09) / 0.82;
  REQUIRE(cutoff_chi(c, 1, params) == Catch::Approx(want).epsilon(1e-10));
  REQUIRE(want == Catch::Approx(0.9393).epsilon(1e-4));
}

TEST_CASE("cutoff chi saturates at 1 on deep violations") {
  const TameSchedule sched = unit_schedule();
  const CutoffParams params(sched, 3);
  // count in the closed unit ball >= a_1(2) + 2 puts at least two label
  // indices beyond a_1(2) inside S_2, each contributing at least 1.
  const int n = static_cast<int>(sched.count_bound(1, 2)) + 2;
  const Configuration c = crowd_inside_unit(n);
  REQUIRE_FALSE(in_tame_set(c, sched, 1, params.Q));
  REQUIRE(cutoff_chi(c, 1, params) == 1.0);
}

TEST_CASE("chi coordinate: plateau values on the shells") {
  const TameSchedule sched = unit_schedule();
  const CutoffParams params(sched, 3);

  // In K_Q[a_1]: every term vanishes.
  REQUIRE(chi_coordinate(cfg1d({0.5}), 4, params) == 0.0);

  // Exactly 2 C(2) + 2 = a_3(1) points inside the unit ball: deep
  // violation of a_2^+ while still inside K_Q[a_3] -> sum equals 2.
  const int shell_n = static_cast<int>(2 * sched.count_bound(2, 1) + 2);
  const Configuration shell = crowd_inside_unit(shell_n);
  REQUIRE(in_tame_set(shell, sched, 3, params.Q));
  REQUIRE_FALSE(in_tame_set(shell, sched, 2, params.Q));
  REQUIRE(chi_coordinate(shell, 4, params) == 2.0);

  // Beyond K_Q[a_4]: the N-level sum saturates at N.
  const int deep_n = static_cast<int>(sched.count_bound(4, 1)) + 1;
  const Configuration deep = crowd_inside_unit(std::max(deep_n, static_cast<int>(sched.count_bound(3, 2)) + 2));
  REQUIRE_FALSE(in_tame_set(deep, sched, 4, params.Q));
  REQUIRE(chi_coordinate(deep, 3, params) == 3.0);
}

TEST_CASE("chi coordinate is monotone in level count and ball cap") {
  const TameSchedule sched = unit_schedule(8);
  Rng rng(67);
  for (int trial = 0; trial < 40; ++trial) {
    Configuration c;
    c.dim = 1;
    const int n = 1 + static_cast<int>(rng.below(25));
    for (int i = 0; i < n; ++i) c.points.push_back(Point{rng.uniform(-3, 3), 0, 0});
    const CutoffParams q2(sched, 2);
    const CutoffParams q4(sched, 4);
    double prev = 0;
    for (int levels = 1; levels <= 6; ++levels) {
      const double v = chi_coordinate(c, levels, q4);
      REQUIRE(v >= prev - 1e-15);
      prev = v;
    }
    REQUIRE(chi_coordinate(c, 4, q4) >= chi_coordinate(c, 4, q2) - 1e-12);
  }
}

TEST_CASE("carre du champ: zero inside, bounded by 1, matches finite differences") {
  const TameSchedule sched = unit_schedule();
  const CutoffParams params(sched, 3);

  REQUIRE(carre_du_champ_chi(cfg1d({0.5, 1.9}), 2, params) == 0.0);

  Rng rng(71);
  int checked_fd = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Configuration c;
    c.dim = 1;
    const int n = 1 + static_cast<int>(rng.below(14));
    for (int i = 0; i < n; ++i) c.points.push_back(Point{rng.uniform(-2.5, 2.5), 0, 0});
    if (!is_simple(c, 1e-9)) continue;
    for (int q = 1; q <= 2; ++q) {
      const double carre = carre_du_champ_chi(c, q, params);
      REQUIRE(carre >= 0.0);
      REQUIRE(carre <= 1.0);
      const double carre_coord = chi_coordinate_carre(c, 2, params);
      REQUIRE(carre_coord >= 0.0);
      REQUIRE(carre_coord <= 1.0);

      if (chi_near_kink(c, params, 1e-4) || checked_fd > 100) continue;
      const ChiGradient g = chi_gradient(c, q, params);
      if (params.theta.deriv(detail::chi_distance(c, q, params).d) == 0.0) continue;
      // Central finite differences on the sorted points.
      Configuration sorted_cfg;
      sorted_cfg.dim = 1;
      sorted_cfg.points = g.sorted_points;
      const double h = 1e-6;
      for (std::size_t i = 0; i < sorted_cfg.size(); ++i) {
        Configuration plus = sorted_cfg, minus = sorted_cfg;
        plus.points[i][0] += h;
        minus.points[i][0] -= h;
        const double fd = (cutoff_chi(plus, q, params) - cutoff_chi(minus, q, params)) / (2 * h);
        const double scale = std::max(1.0, std::abs(g.grads[i][0]));
        REQUIRE(std::abs(fd - g.grads[i][0]) < 1e-4 * scale);
        ++checked_fd;
      }
    }
  }
  REQUIRE(checked_fd > 50);
}

TEST_CASE("chi is local: points beyond the ball cap never matter") {
  const TameSchedule sched = unit_schedule();
  const CutoffParams params(sched, 2);
  Configuration c = cfg1d({0.3, 0.6, 0.9, 1.4, 5.0});
  const double before = cutoff_chi(c, 1, params);
  const double carre_before = carre_du_champ_chi(c, 1, params);
  c.points.back()[0] = 7.77;  // still beyond Q = 2
  REQUIRE(cutoff_chi(c, 1, params) == before);
  REQUIRE(carre_du_champ_chi(c, 1, params) == carre_before);
}

TEST_CASE("collision monitor on constructed paths") {
  Trajectory traj;
  traj.dt = 0.1;
  traj.spec = InteractionSpec::free_diffusion(1);
  for (int k = 0; k <= 10; ++k) {
    traj.times.push_back(k * 0.1);
    LabeledState st;
    st.dim = 1;
    st.positions = {Point{-0.35, 0, 0}, Point{0.35, 0, 0}};
    traj.states.push_back(st);
  }
  const CollisionMonitorReport rep = collision_monitor(traj, 4.0);
  REQUIRE_FALSE(rep.abort_flag);
  for (double g : rep.min_gaps) REQUIRE(g == 0.7);
  REQUIRE(rep.upsilon_at_start == Catch::Approx(upsilon(0.7)).epsilon(1e-15));
  REQUIRE(rep.upsilon_at_end == rep.upsilon_at_start);

  Trajectory solo;
  solo.dt = 0.1;
  solo.spec = traj.spec;
  solo.times = {0.0};
  LabeledState st;
  st.dim = 1;
  st.positions = {Point{0, 0, 0}};
  solo.states.push_back(st);
  const CollisionMonitorReport rep2 = collision_monitor(solo, 4.0);
  REQUIRE(std::isinf(rep2.min_gaps[0]));
  REQUIRE_FALSE(rep2.abort_flag);
}

TEST_CASE("no-big-jump counter on constructed paths") {
  Trajectory traj;
  traj.dt = 0.1;
  traj.spec = InteractionSpec::free_diffusion(1);
  // Labels in initial-modulus order: 0.5, 1.5, 2.5.
  for (int k = 0; k <= 10; ++k) {
    traj.times.push_back(k * 0.1);
    LabeledState st;
    st.dim = 1;
    st.positions = {Point{0.5, 0, 0}, Point{k == 3 ? 0.8 : 1.5, 0, 0}, Point{2.5, 0, 0}};
    traj.states.push_back(st);
  }
  REQUIRE(nbj_counter(traj, 1.0, 1.0) == 2);   // labels 1 and 2 touch
  REQUIRE(nbj_counter(traj, 0.2, 1.0) == 0);   // nobody enters
  REQUIRE(nbj_counter(traj, 10.0, 1.0) == 3);  // everybody inside
}

TEST_CASE("kappa exit scans the tame sets") {
  const TameSchedule sched = unit_schedule();
  Trajectory traj;
  traj.dt = 0.1;
  traj.spec = InteractionSpec::free_diffusion(1);
  const int k_in = 4;
  for (int k = 0; k <= 10; ++k) {
    traj.times.push_back(k * 0.1);
    LabeledState st;
    st.dim = 1;
    // A crowd enters the unit ball at step k_in, exceeding a_1(1) = 1.
    st.positions = {Point{0.4, 0, 0}, Point{k >= k_in ? 0.6 : 3.5, 0, 0}};
    traj.states.push_back(st);
  }
  const ExitTime e1 = kappa_exit(traj, 1, sched);
  REQUIRE_FALSE(e1.censored);
  REQUIRE(e1.t == Catch::Approx(0.4));
  REQUIRE(kappa_exit(traj, 2, sched).censored);

  // Monotone in q by set inclusion.
  double prev = e1.t;
  for (int q = 2; q <= sched.levels(); ++q) {
    const ExitTime e = kappa_exit(traj, q, sched);
    const double t = e.censored ? 1e9 : e.t;
    REQUIRE(t >= prev);
    prev = t;
  }
}
