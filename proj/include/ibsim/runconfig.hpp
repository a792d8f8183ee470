#ifndef IBSIM_RUNCONFIG_HPP
#define IBSIM_RUNCONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ibsim/errors.hpp"
#include "ibsim/integrator.hpp"
#include "ibsim/models.hpp"
#include "ibsim/sampler.hpp"

namespace ibsim {

// Line-based `key = value` configuration with dotted sections. Unknown
// keys are rejected so typos fail loudly instead of silently running a
// default.
class RunConfig {
 public:
  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "seed",
        "output.dir",
        "model.kind",
        "model.dimension",
        "model.beta",
        "model.alpha",
        "model.riesz_a",
        "model.cutoff",
        "model.confinement",
        "model.diffusion_scale",
        "model.nonconvergent_tolerance",
        "sampler.kind",
        "sampler.n",
        "sampler.window",
        "sampler.intensity",
        "sampler.mcmc_steps",
        "sampler.proposal_scale",
        "solver.scheme",
        "solver.dt",
        "solver.horizon",
        "solver.max_substep_depth",
        "solver.min_gap_substep_threshold",
        "solver.collision_abort_gap",
        "experiment.ensemble",
        "experiment.m",
        "experiment.dt_ladder",
        "experiment.schemes",
        "experiment.region",
        "experiment.nbj_r",
        "experiment.kappa_q",
        "experiment.chi_q",
        "experiment.chi_cap",
        "experiment.tame_levels",
        "experiment.density",
    };
    return keys;
  }

  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
      std::size_t e = text.find('\n', pos);
      if (e == std::string::npos) e = text.size();
      std::string line = text.substr(pos, e - pos);
      pos = e + 1;
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t sep = line.find('=');
      if (sep == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(line.substr(0, sep));
      const std::string value = trim(line.substr(sep + 1));
      if (known_keys().count(key) == 0) throw ConfigError("unknown config key: " + key);
      if (value.empty()) throw ConfigError("empty value for config key: " + key);
      cfg.kv_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
      throw ConfigError("config key " + key + ": bad number '" + it->second + "'");
    return v;
  }

  long long integer(const std::string& key, long long fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    const long long r = static_cast<long long>(v);
    if (static_cast<double>(r) != v)
      throw ConfigError("config key " + key + ": expected an integer");
    return r;
  }

  std::vector<double> number_list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::size_t pos = 0;
    const std::string& s = it->second;
    while (pos < s.size()) {
      std::size_t e = s.find(',', pos);
      if (e == std::string::npos) e = s.size();
      const std::string item = trim(s.substr(pos, e - pos));
      pos = e + 1;
      if (item.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0')
        throw ConfigError("config key " + key + ": bad list entry '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(integer("seed", 0));
  }

  // Resolved model block.
  InteractionSpec model() const {
    const std::string kind = text("model.kind", "free");
    InteractionSpec spec;
    if (kind == "sine_beta") {
      spec = InteractionSpec::sine_beta(number("model.beta", 2.0));
    } else if (kind == "bessel") {
      spec = InteractionSpec::bessel(number("model.alpha", 1.0));
    } else if (kind == "ginibre_rep1") {
      spec = InteractionSpec::ginibre_rep1();
    } else if (kind == "ginibre_rep2") {
      spec = InteractionSpec::ginibre_rep2();
    } else if (kind == "lennard_jones") {
      spec = InteractionSpec::lennard_jones(number("model.beta", 1.0));
    } else if (kind == "riesz") {
      spec = InteractionSpec::riesz(number("model.beta", 2.0), number("model.riesz_a", 3.0),
                                    static_cast<int>(integer("model.dimension", 1)));
    } else if (kind == "ruelle_compact") {
      spec = InteractionSpec::ruelle(smooth_bump_potential(), number("model.beta", 2.0),
                                     static_cast<int>(integer("model.dimension", 1)));
    } else if (kind == "skew_poisson") {
      spec = InteractionSpec::skew_poisson(number("model.beta", 2.0));
    } else if (kind == "free") {
      spec = InteractionSpec::free_diffusion(static_cast<int>(integer("model.dimension", 1)));
    } else {
      throw ConfigError("config key model.kind: unknown model '" + kind + "'");
    }
    spec.cutoff = number("model.cutoff", spec.cutoff);
    if (spec.cutoff <= 0) spec.cutoff = kInf;  // 0 or negative means no cutoff
    spec.confinement = number("model.confinement", spec.confinement);
    spec.diffusion_scale = number("model.diffusion_scale", spec.diffusion_scale);
    spec.nonconvergent_tolerance =
        number("model.nonconvergent_tolerance", spec.nonconvergent_tolerance);
    if (spec.nonconvergent_tolerance <= 0) spec.nonconvergent_tolerance = kInf;
    return spec;
  }

  SamplerConfig sampler(const InteractionSpec& spec) const {
    SamplerConfig s;
    s.dim = spec.dim;
    s.n_particles = static_cast<int>(integer("sampler.n", 16));
    s.window = number("sampler.window", 5.0);
    s.intensity = number("sampler.intensity", 1.0);
    s.beta = spec.beta;
    s.alpha = spec.alpha;
    s.mcmc_steps = integer("sampler.mcmc_steps", -1);
    s.proposal_scale = number("sampler.proposal_scale", -1.0);
    s.seed = seed();
    const std::string kind = sampler_kind();
    if (kind == "ginibre") s.window_kind = WindowKind::Disk;
    if (kind == "bessel") s.window_kind = WindowKind::HalfLine;
    return s;
  }

  std::string sampler_kind() const {
    const std::string kind = text("sampler.kind", "fixed");
    if (kind != "poisson" && kind != "dyson" && kind != "ginibre" && kind != "bessel" &&
        kind != "gibbs" && kind != "fixed")
      throw ConfigError("config key sampler.kind: unknown sampler '" + kind + "'");
    return kind;
  }

  SolverConfig solver() const {
    SolverConfig s;
    const std::string scheme = text("solver.scheme", "euler");
    if (scheme == "euler")
      s.scheme = Scheme::Euler;
    else if (scheme == "tamed_euler")
      s.scheme = Scheme::TamedEuler;
    else
      throw ConfigError("config key solver.scheme: unknown scheme '" + scheme + "'");
    s.dt = number("solver.dt", 1e-3);
    s.horizon = number("solver.horizon", 0.1);
    s.max_substep_depth = static_cast<int>(integer("solver.max_substep_depth", 4));
    s.min_gap_substep_threshold = number("solver.min_gap_substep_threshold", -1.0);
    s.collision_abort_gap = number("solver.collision_abort_gap", 1e-8);
    s.seed = seed();
    (void)s.n_steps();  // validate divisibility now
    return s;
  }

  const std::map<std::string, std::string>& raw() const { return kv_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace ibsim

#endif  // IBSIM_RUNCONFIG_HPP
