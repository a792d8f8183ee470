#ifndef IBSIM_IO_HPP
#define IBSIM_IO_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "ibsim/brownian.hpp"
#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"
#include "ibsim/integrator.hpp"

namespace ibsim {

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Trajectory CSV: header line, then one row per (time, particle) holding
// t, the 1-based label, and the coordinates. All floats carry 17
// significant digits so a fixed (config, seed) pair reproduces every byte.
inline std::string serialize_trajectory(const Trajectory& traj, std::uint64_t seed) {
  const int d = traj.states.empty() ? 1 : traj.states.front().dim;
  std::string out = "# model=" + model_kind_name(traj.spec.kind) +
                    " N=" + std::to_string(traj.n_particles()) + " dt=" + format_double(traj.dt) +
                    " T=" + format_double(traj.horizon()) + " seed=" + std::to_string(seed) + "\n";
  for (std::size_t k = 0; k < traj.n_times(); ++k) {
    const std::string ts = format_double(traj.times[k]);
    for (std::size_t i = 0; i < traj.n_particles(); ++i) {
      out += ts;
      out += ',';
      out += std::to_string(i + 1);
      for (int c = 0; c < d; ++c) {
        out += ',';
        out += format_double(traj.states[k].positions[i][static_cast<std::size_t>(c)]);
      }
      out += '\n';
    }
  }
  return out;
}

// Brownian increments in the same CSV shape: t is the left end of the
// finest step each row belongs to.
inline std::string serialize_brownian(const BrownianPath& bp, ModelKind kind,
                                      std::uint64_t seed) {
  std::string out = "# model=" + model_kind_name(kind) + " N=" + std::to_string(bp.n_particles) +
                    " dt=" + format_double(bp.finest_dt) +
                    " T=" + format_double(bp.finest_dt * bp.n_steps) +
                    " seed=" + std::to_string(seed) + "\n";
  for (int k = 0; k < bp.n_steps; ++k) {
    const std::string ts = format_double(k * bp.finest_dt);
    for (int i = 0; i < bp.n_particles; ++i) {
      out += ts;
      out += ',';
      out += std::to_string(i + 1);
      for (int c = 0; c < bp.dim; ++c) {
        out += ',';
        out += format_double(bp.at(k, i, c));
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace ibsim

#endif  // IBSIM_IO_HPP
