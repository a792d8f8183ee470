#ifndef IBSIM_CONFIGURATION_HPP
#define IBSIM_CONFIGURATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ibsim/errors.hpp"
#include "ibsim/vec.hpp"

namespace ibsim {

using Point = Vec;

// Finite point cloud standing in for a locally finite configuration. All
// nominally infinite objects in this library live on a bounded window; the
// truncation is recorded in every report.
struct Configuration {
  std::vector<Point> points;
  int dim = 1;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Ordered particle positions. Canonical label order is increasing modulus
// |x| with lexicographic tie-break (see label()).
struct LabeledState {
  std::vector<Point> positions;
  int dim = 1;

  std::size_t size() const { return positions.size(); }
};

// First m particles tagged, the rest an unlabeled environment. m = 0 is
// just a configuration.
struct MLabeledState {
  std::vector<Point> tagged;
  Configuration environment;
  int dim = 1;

  std::size_t m() const { return tagged.size(); }
};

// Ball-count schedule a_q(r) = ceil(C(q) r^alpha) defining the tame sets
// K[a_q]. C(q) must grow fast enough that 1 + a_q(r+1) < a_{q+1}(r); the
// validating constructor enforces that over the tested (q, r) window.
struct TameSchedule {
  double growth_exponent = 1.0;               // alpha > 0
  std::vector<long long> level_scale;         // C(q), strictly increasing, q = 1..Q_levels
  int max_level = std::numeric_limits<int>::max();  // radius cap Q; INT_MAX = unbounded

  int levels() const { return static_cast<int>(level_scale.size()); }

  long long count_bound(int q, int r) const {
    if (q < 1 || q > levels()) throw IndexOutOfRange("TameSchedule level q out of range");
    if (r < 1) throw IndexOutOfRange("TameSchedule radius r must be >= 1");
    const double v = static_cast<double>(level_scale[static_cast<std::size_t>(q - 1)]) *
                     std::pow(static_cast<double>(r), growth_exponent);
    return static_cast<long long>(std::ceil(v - 1e-12));
  }

  // a_q^+(r) = 1 + a_q(r+1).
  long long count_bound_plus(int q, int r) const { return 1 + count_bound(q, r + 1); }

  void validate(int r_check = 8) const {
    if (!(growth_exponent > 0)) throw ConfigError("TameSchedule growth exponent must be > 0");
    if (level_scale.empty()) throw ConfigError("TameSchedule needs at least one level");
    for (std::size_t i = 0; i < level_scale.size(); ++i) {
      if (level_scale[i] < 1) throw ConfigError("TameSchedule level scale must be positive");
      if (i > 0 && level_scale[i] <= level_scale[i - 1])
        throw ConfigError("TameSchedule level scale must be strictly increasing");
    }
    for (int q = 1; q <= levels(); ++q) {
      for (int r = 1; r <= r_check; ++r) {
        if (!(count_bound(q, r) < count_bound(q, r + 1)))
          throw ConfigError("TameSchedule violates a_q(r) < a_q(r+1)");
        if (q < levels()) {
          if (!(count_bound(q, r) < count_bound(q + 1, r)))
            throw ConfigError("TameSchedule violates a_q(r) < a_{q+1}(r)");
          if (!(count_bound_plus(q, r) < count_bound(q + 1, r)))
            throw ConfigError("TameSchedule violates a_q^+(r) < a_{q+1}(r)");
        }
      }
    }
  }

  // Default schedule: geometric level scaling anchored at the nominal
  // window density. The geometric growth C(q+1) = 2 + ceil(C(q) 2^alpha)
  // guarantees the a_q^+ < a_{q+1} separation for every r >= 1, which the
  // naive linear-in-q scaling does not.
  static TameSchedule scaled(double nominal_density, int dim, int n_levels) {
    TameSchedule s;
    s.growth_exponent = static_cast<double>(dim);
    long long c = std::max<long long>(1, static_cast<long long>(std::ceil(nominal_density)));
    const double factor = std::pow(2.0, static_cast<double>(dim));
    s.level_scale.reserve(static_cast<std::size_t>(n_levels));
    for (int q = 0; q < n_levels; ++q) {
      s.level_scale.push_back(c);
      c = 2 + static_cast<long long>(std::ceil(static_cast<double>(c) * factor));
    }
    s.validate();
    return s;
  }
};

inline Configuration unlabel(const LabeledState& state) {
  return Configuration{state.positions, state.dim};
}

inline bool is_simple(const Configuration& cfg, double tol) {
  if (tol < 0) throw ConfigError("is_simple tolerance must be >= 0");
  for (std::size_t i = 0; i < cfg.points.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.points.size(); ++j)
      if (dist(cfg.points[i], cfg.points[j]) <= tol) return false;
  return true;
}

// Sort by increasing modulus, ties broken lexicographically by coordinates.
// The tie-break is not part of the mathematical label; it pins a unique
// order so replays are reproducible.
inline bool label_less(const Point& a, const Point& b) {
  const double na = norm(a), nb = norm(b);
  if (na < nb) return true;
  if (na > nb) return false;
  return lex_less(a, b);
}

inline LabeledState label(const Configuration& cfg) {
  for (std::size_t i = 0; i < cfg.points.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.points.size(); ++j)
      if (cfg.points[i] == cfg.points[j])
        throw NonSimpleConfiguration("label: configuration has a repeated point");
  LabeledState s{cfg.points, cfg.dim};
  std::sort(s.positions.begin(), s.positions.end(), label_less);
  return s;
}

inline MLabeledState split_m(const LabeledState& state, std::size_t m) {
  if (m > state.size()) throw IndexOutOfRange("split_m: m exceeds particle count");
  MLabeledState out;
  out.dim = state.dim;
  out.tagged.assign(state.positions.begin(), state.positions.begin() + static_cast<std::ptrdiff_t>(m));
  out.environment.dim = state.dim;
  out.environment.points.assign(state.positions.begin() + static_cast<std::ptrdiff_t>(m),
                                state.positions.end());
  return out;
}

// Count of points in the closed ball |x| <= r. Closed balls are used for
// all tame-set counts; open balls everywhere else.
inline long long count_in_closed_ball(const Configuration& cfg, double r) {
  long long n = 0;
  for (const auto& p : cfg.points)
    if (norm(p) <= r) ++n;
  return n;
}

// Membership in K_Q[a_q]: counts in closed balls of integer radius r <= Q
// bounded by a_q(r). For a finite configuration only radii up to
// ceil(max |x|) need checking.
inline bool in_tame_set(const Configuration& cfg, const TameSchedule& sched, int q,
                        int ball_cap = std::numeric_limits<int>::max()) {
  double rmax = 0;
  for (const auto& p : cfg.points) rmax = std::max(rmax, norm(p));
  // Counts saturate at ceil(rmax); a_q is nondecreasing in r, so larger
  // radii cannot fail once r = ceil(rmax) passes.
  const int r_needed = std::max(1, static_cast<int>(std::ceil(rmax)));
  const int r_hi = std::min({ball_cap, sched.max_level, r_needed});
  for (int r = 1; r <= r_hi; ++r)
    if (count_in_closed_ball(cfg, static_cast<double>(r)) > sched.count_bound(q, r)) return false;
  return true;
}

// Smallest q with cfg in K_Q[a_q]; nullopt if none up to the schedule's
// level ceiling.
inline std::optional<int> tame_level(const Configuration& cfg, const TameSchedule& sched) {
  for (int q = 1; q <= sched.levels(); ++q)
    if (in_tame_set(cfg, sched, q)) return q;
  return std::nullopt;
}

// --- serialization -------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

// One point per line, space-separated coordinates, 17 significant digits.
inline std::string serialize_configuration(const Configuration& cfg) {
  std::string out = "# dim=" + std::to_string(cfg.dim) + " n=" + std::to_string(cfg.size()) + "\n";
  for (const auto& p : cfg.points) {
    for (int k = 0; k < cfg.dim; ++k) {
      if (k) out += ' ';
      out += format_double(p[static_cast<std::size_t>(k)]);
    }
    out += '\n';
  }
  return out;
}

inline Configuration parse_configuration(const std::string& text) {
  Configuration cfg;
  std::size_t pos = 0;
  auto next_line = [&](std::string& line) -> bool {
    if (pos >= text.size()) return false;
    std::size_t e = text.find('\n', pos);
    if (e == std::string::npos) e = text.size();
    line = text.substr(pos, e - pos);
    pos = e + 1;
    return true;
  };
  std::string line;
  if (!next_line(line)) throw IoError("configuration: empty input");
  long n = -1;
  if (std::sscanf(line.c_str(), "# dim=%d n=%ld", &cfg.dim, &n) != 2)
    throw IoError("configuration: bad header '" + line + "'");
  if (cfg.dim < 1 || cfg.dim > 3) throw IoError("configuration: dim must be 1..3");
  while (next_line(line)) {
    if (line.empty()) continue;
    Point p{0, 0, 0};
    const char* s = line.c_str();
    char* end = nullptr;
    for (int k = 0; k < cfg.dim; ++k) {
      p[static_cast<std::size_t>(k)] = std::strtod(s, &end);
      if (end == s) throw IoError("configuration: bad point line '" + line + "'");
      s = end;
    }
    cfg.points.push_back(p);
  }
  if (n >= 0 && static_cast<long>(cfg.size()) != n)
    throw IoError("configuration: header count mismatch");
  return cfg;
}

}  // namespace ibsim

#endif  // IBSIM_CONFIGURATION_HPP
