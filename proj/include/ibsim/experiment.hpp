#ifndef IBSIM_EXPERIMENT_HPP
#define IBSIM_EXPERIMENT_HPP

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ibsim/analysis.hpp"
#include "ibsim/diagnostics.hpp"
#include "ibsim/fields.hpp"
#include "ibsim/ifc.hpp"
#include "ibsim/io.hpp"
#include "ibsim/parallel.hpp"
#include "ibsim/report.hpp"
#include "ibsim/runconfig.hpp"
#include "ibsim/sampler.hpp"
#include "ibsim/stats.hpp"

namespace ibsim {

// Orchestrates the CLI subcommands: builds initial states, fans ensemble
// members out to workers, writes artifacts, and aggregates reports. Every
// emitted byte is a function of (config, seed).
class ExperimentRunner {
 public:
  ExperimentRunner(RunConfig cfg, std::string out_dir, int workers)
      : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)), workers_(workers) {
    std::filesystem::create_directories(out_dir_);
  }

  // Initial state for one ensemble member; the sampler stream is derived
  // from the master seed and the member index.
  LabeledState initial_state(const InteractionSpec& spec, std::uint64_t member) const {
    SamplerConfig scfg = cfg_.sampler(spec);
    scfg.seed = derive_stream(cfg_.seed(), member);
    const std::string kind = cfg_.sampler_kind();
    Configuration sample;
    if (kind == "poisson") {
      sample = sample_poisson(scfg);
    } else if (kind == "dyson") {
      sample = sample_loggas(scfg, LoggasKind::Dyson);
    } else if (kind == "ginibre") {
      sample = sample_loggas(scfg, LoggasKind::Ginibre);
    } else if (kind == "bessel") {
      sample = sample_loggas(scfg, LoggasKind::Bessel);
    } else if (kind == "gibbs") {
      const PairPotential pot = smooth_bump_potential();
      sample = sample_gibbs(scfg, [pot](const Vec& r) { return pot.value(r); });
    } else {  // fixed: deterministic evenly spaced points
      sample.dim = spec.dim;
      for (int i = 0; i < scfg.n_particles; ++i) {
        Point p{0, 0, 0};
        const double u = (i + 0.5) / scfg.n_particles;
        p[0] = spec.kind == ModelKind::Bessel ? u * scfg.window
                                              : -scfg.window + 2.0 * scfg.window * u;
        sample.points.push_back(p);
      }
    }
    return label(sample);
  }

  SimResult member_run(const InteractionSpec& spec, const SolverConfig& solver,
                       std::uint64_t member) const {
    SolverConfig s = solver;
    s.seed = derive_stream(cfg_.seed() ^ 0x5175ab1eULL, member);
    return simulate(initial_state(spec, member), spec, s);
  }

  void echo_config(Report& rep) const {
    for (const auto& [k, v] : cfg_.raw()) rep.set_text("config." + k, v);
    rep.set_text("config.resolved.workers", std::to_string(workers_));
  }

  void write_report(const Report& rep, const std::string& name = "report.txt") const {
    write_text_file((std::filesystem::path(out_dir_) / name).string(), rep.serialize());
  }

  // --- simulate -----------------------------------------------------------

  int run_simulate() {
    const InteractionSpec spec = cfg_.model();
    const SolverConfig solver = cfg_.solver();
    Report rep;
    echo_config(rep);
    const SimResult res = member_run(spec, solver, 0);
    write_text_file((std::filesystem::path(out_dir_) / "trajectory.csv").string(),
                    serialize_trajectory(res.traj, cfg_.seed()));
    write_text_file((std::filesystem::path(out_dir_) / "brownian.csv").string(),
                    serialize_brownian(res.noise, spec.kind, cfg_.seed()));
    rep.set_text("simulate.model", model_kind_name(spec.kind));
    rep.set_scalar("simulate.n_particles", static_cast<double>(res.traj.n_particles()));
    rep.set_scalar("simulate.n_steps", static_cast<double>(res.traj.n_times() - 1));
    rep.set_scalar("simulate.events", static_cast<double>(res.traj.events.size()));
    double min_gap_seen = kInf;
    for (const auto& st : res.traj.states)
      for (std::size_t i = 0; i < st.size(); ++i)
        for (std::size_t j = i + 1; j < st.size(); ++j)
          min_gap_seen = std::min(min_gap_seen, dist(st.positions[i], st.positions[j]));
    if (res.traj.n_particles() > 1) rep.set_scalar("simulate.min_gap", min_gap_seen);
    write_report(rep);
    return 0;
  }

  // --- ifc-check ----------------------------------------------------------

  int run_ifc_check(std::size_t m_override = 0, std::vector<double> ladder_override = {},
                    std::string schemes_override = "", std::string region_override = "") {
    const InteractionSpec spec = cfg_.model();
    const SolverConfig solver = cfg_.solver();
    const int ensemble = static_cast<int>(cfg_.integer("experiment.ensemble", 10));
    std::size_t m = m_override > 0
                        ? m_override
                        : static_cast<std::size_t>(cfg_.integer("experiment.m", 2));
    std::vector<double> ladder =
        !ladder_override.empty() ? ladder_override : cfg_.number_list("experiment.dt_ladder");
    if (ladder.empty()) ladder = {solver.dt};
    const std::string schemes =
        !schemes_override.empty() ? schemes_override : cfg_.text("experiment.schemes", "euler");

    std::vector<int> region = parse_region(region_override);
    const TameSchedule schedule = default_schedule(spec);

    Report rep;
    echo_config(rep);
    rep.set_scalar("ifc.m", static_cast<double>(m));

    std::vector<std::vector<double>> cons(ladder.size(),
                                          std::vector<double>(static_cast<std::size_t>(ensemble)));
    std::vector<double> uniq(static_cast<std::size_t>(ensemble), 0.0);
    std::vector<double> exit_censored(static_cast<std::size_t>(ensemble), 0.0);
    std::vector<double> uncovered(static_cast<std::size_t>(ensemble), 0.0);

    parallel_for(static_cast<std::size_t>(ensemble), workers_, [&](std::size_t member) {
      const SimResult src = member_run(spec, solver, member);
      const std::size_t mm = std::min(m, src.traj.n_particles());
      auto [tagged, env] = freeze_env(src.traj, mm);
      const BrownianPath bp_m = src.noise.select_particles(static_cast<int>(mm));
      for (std::size_t r = 0; r < ladder.size(); ++r) {
        SolverConfig s = solver;
        s.dt = ladder[r];
        const Trajectory y = solve_frozen(tagged.positions.front(), env, bp_m, spec, s);
        cons[r][member] = consistency_error(y, tagged);
      }
      if (schemes.find("tamed") != std::string::npos) {
        SolverConfig sa = solver, sb = solver;
        sa.scheme = Scheme::Euler;
        sb.scheme = Scheme::TamedEuler;
        uniq[member] = uniqueness_probe(tagged.positions.front(), env, bp_m, spec, sa, sb);
      }
      HRegion hr{region[0], region[1], region[2], schedule};
      const ExitTime et = exit_time_sigma(tagged, env, hr);
      exit_censored[member] = et.censored ? 1.0 : 0.0;
      const B1Report b1 = b1_report(src.traj, mm, schedule, 30, schedule.levels() - 1, 30);
      uncovered[member] = b1.uncovered_fraction;
    });

    bool monotone = true;
    double prev = kInf;
    for (std::size_t r = 0; r < ladder.size(); ++r) {
      const double med = median(cons[r]);
      rep.set_scalar("ifc.consistency_median.dt_" + format_double(ladder[r]), med);
      if (med > prev + 1e-15) monotone = false;
      prev = med;
    }
    for (int member = 0; member < ensemble; ++member) {
      rep.add_sample("ifc.uniqueness_probe", uniq[static_cast<std::size_t>(member)]);
      rep.add_sample("ifc.exit_censored", exit_censored[static_cast<std::size_t>(member)]);
      rep.add_sample("ifc.b1_uncovered_fraction", uncovered[static_cast<std::size_t>(member)]);
    }
    rep.set_text("checks.consistency_ladder_monotone",
                 ladder.size() < 2 || monotone ? "pass" : "fail");
    write_report(rep);
    return ladder.size() < 2 || monotone ? 0 : 1;
  }

  // --- diagnose -----------------------------------------------------------

  int run_diagnose(bool do_upsilon, int chi_q, int chi_cap, int nbj_r, int kappa_q) {
    const InteractionSpec spec = cfg_.model();
    const SolverConfig solver = cfg_.solver();
    const int ensemble = static_cast<int>(cfg_.integer("experiment.ensemble", 10));
    const TameSchedule schedule = default_schedule(spec);
    Report rep;
    echo_config(rep);
    if (do_upsilon) {
      rep.set_scalar("diagnose.upsilon_at_1", upsilon(1.0));
      rep.set_scalar("diagnose.upsilon_small_at_1", upsilon_small(1.0));
    }
    const int cap =
        chi_cap >= 1 ? chi_cap : static_cast<int>(cfg_.integer("experiment.chi_cap", 4));
    CutoffParams params(schedule, cap);
    std::vector<Report> partial(static_cast<std::size_t>(ensemble));
    std::vector<char> chi_ok(static_cast<std::size_t>(ensemble), 1);
    parallel_for(static_cast<std::size_t>(ensemble), workers_, [&](std::size_t member) {
      Report r;
      const SimResult res = member_run(spec, solver, member);
      const CollisionMonitorReport cm =
          collision_monitor(res.traj, cfg_.number("sampler.window", 5.0), solver.collision_abort_gap);
      r.add_sample("diagnose.upsilon_start", cm.upsilon_at_start);
      r.add_sample("diagnose.upsilon_end", cm.upsilon_at_end);
      r.add_sample("diagnose.collision_flag", cm.abort_flag ? 1.0 : 0.0);
      if (nbj_r > 0)
        r.add_sample("diagnose.nbj",
                     static_cast<double>(nbj_counter(res.traj, nbj_r, res.traj.horizon())));
      if (kappa_q >= 1 && kappa_q <= schedule.levels()) {
        const ExitTime ke = kappa_exit(res.traj, kappa_q, schedule);
        r.add_sample("diagnose.kappa_censored", ke.censored ? 1.0 : 0.0);
      }
      if (chi_q >= 1 && chi_q < schedule.levels()) {
        const double chi = cutoff_chi(unlabel(res.traj.states.back()), chi_q, params);
        if (chi < 0 || chi > 1) chi_ok[member] = 0;
        r.add_sample("diagnose.chi", chi);
        r.add_sample("diagnose.chi_carre",
                     carre_du_champ_chi(unlabel(res.traj.states.back()), chi_q, params));
      }
      partial[member] = r;
    });
    for (const auto& r : partial) rep = Report::merge(rep, r);
    bool chi_in_bounds = true;
    for (char ok : chi_ok) chi_in_bounds = chi_in_bounds && ok;
    rep.set_text("checks.chi_in_unit_interval", chi_in_bounds ? "pass" : "fail");
    write_report(rep);
    return chi_in_bounds ? 0 : 1;
  }

  // --- fields -------------------------------------------------------------

  int run_fields() {
    const InteractionSpec spec = cfg_.model();
    const int ensemble = static_cast<int>(cfg_.integer("experiment.ensemble", 50));
    Report rep;
    echo_config(rep);
    std::vector<Configuration> samples(static_cast<std::size_t>(ensemble));
    parallel_for(static_cast<std::size_t>(ensemble), workers_, [&](std::size_t member) {
      samples[member] = unlabel(initial_state(spec, member));
    });
    const double w = cfg_.number("sampler.window", 5.0);
    Bins bins{-w, w, 20};
    const CorrelationEstimate rho1 = estimate_correlation(samples, 1, bins);
    std::string csv = "# model=" + model_kind_name(spec.kind) +
                      " N=" + std::to_string(cfg_.integer("sampler.n", 16)) +
                      " ensemble=" + std::to_string(ensemble) +
                      " seed=" + std::to_string(cfg_.seed()) + "\n";
    csv += "bin_center,rho1,stderr\n";
    for (int b = 0; b < bins.n; ++b) {
      csv += format_double(bins.center(b)) + "," +
             format_double(rho1.values[static_cast<std::size_t>(b)]) + "," +
             format_double(rho1.stderrs[static_cast<std::size_t>(b)]) + "\n";
    }
    write_text_file((std::filesystem::path(out_dir_) / "correlation.csv").string(), csv);
    double mean_rho1 = 0;
    for (double v : rho1.values) mean_rho1 += v / rho1.values.size();
    rep.set_scalar("fields.rho1_mean", mean_rho1);
    rep.set_scalar("fields.ensemble", ensemble);
    write_report(rep);
    return 0;
  }

  // --- reverse-check ------------------------------------------------------

  int run_reverse_check() {
    const InteractionSpec spec = cfg_.model();
    const SolverConfig solver = cfg_.solver();
    const int ensemble = static_cast<int>(cfg_.integer("experiment.ensemble", 10));
    Report rep;
    echo_config(rep);
    std::vector<Report> partial(static_cast<std::size_t>(ensemble));
    std::vector<Trajectory> trajs(static_cast<std::size_t>(ensemble));
    std::vector<char> lz_ok(static_cast<std::size_t>(ensemble), 1);
    parallel_for(static_cast<std::size_t>(ensemble), workers_, [&](std::size_t member) {
      Report r;
      const SimResult res = member_run(spec, solver, member);
      const std::size_t m = std::max<std::size_t>(1, std::min<std::size_t>(res.traj.n_particles(), 2));
      const CylinderFunction F = coordinate_cylinder(m, 0, 0);
      const double ito = ito_residual(F, res.traj, res.noise);
      const double lz = lyons_zheng_residual(F, res.traj, res.noise, solver.horizon);
      const QvResult qv = qv_check(F, res.traj, res.noise);
      if (lz > 2.0 * ito + 1e-9) lz_ok[member] = 0;
      r.add_sample("reverse.ito_residual", ito);
      r.add_sample("reverse.lz_residual", lz);
      r.add_sample("reverse.qv_relative_gap",
                   qv.predicted > 0 ? std::abs(qv.realized - qv.predicted) / qv.predicted : 0.0);
      partial[member] = r;
      trajs[member] = res.traj;
    });
    for (const auto& r : partial) rep = Report::merge(rep, r);
    bool lz_bound_ok = true;
    for (char ok : lz_ok) lz_bound_ok = lz_bound_ok && ok;
    if (trajs.size() >= 2) {
      const double p = reversibility_test(
          trajs,
          [&](const Trajectory& t) {
            const std::size_t mid = t.n_times() / 2;
            return t.states.front().positions[0][0] - t.states[mid].positions[0][0];
          },
          solver.horizon);
      rep.set_scalar("reverse.reversibility_p", p);
    }
    rep.set_text("checks.lz_within_twice_ito", lz_bound_ok ? "pass" : "fail");
    write_report(rep);
    return lz_bound_ok ? 0 : 1;
  }

  int run_all() {
    int rc = 0;
    {
      ExperimentRunner r(cfg_, (std::filesystem::path(out_dir_) / "simulate").string(), workers_);
      rc |= r.run_simulate();
    }
    {
      ExperimentRunner r(cfg_, (std::filesystem::path(out_dir_) / "ifc-check").string(), workers_);
      rc |= r.run_ifc_check();
    }
    {
      ExperimentRunner r(cfg_, (std::filesystem::path(out_dir_) / "diagnose").string(), workers_);
      rc |= r.run_diagnose(true, 1, 0, 1, 1);
    }
    {
      ExperimentRunner r(cfg_, (std::filesystem::path(out_dir_) / "fields").string(), workers_);
      rc |= r.run_fields();
    }
    {
      ExperimentRunner r(cfg_, (std::filesystem::path(out_dir_) / "reverse-check").string(),
                         workers_);
      rc |= r.run_reverse_check();
    }
    return rc;
  }

  TameSchedule default_schedule(const InteractionSpec& spec) const {
    const double window = cfg_.number("sampler.window", 5.0);
    const double n = static_cast<double>(cfg_.integer("sampler.n", 16));
    double volume = 2.0 * window;
    if (spec.dim == 2) volume = 3.14159265358979323846 * window * window;
    if (spec.dim == 3) volume = 8.0 * window * window * window;
    const double density = cfg_.number("experiment.density", std::max(0.5, n / volume));
    const int levels = static_cast<int>(cfg_.integer("experiment.tame_levels", 12));
    return TameSchedule::scaled(density, spec.dim, levels);
  }

 private:
  std::vector<int> parse_region(const std::string& override_text) const {
    std::string text = override_text;
    if (text.empty()) text = cfg_.text("experiment.region", "10,3,10");
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t e = text.find(',', pos);
      if (e == std::string::npos) e = text.size();
      out.push_back(std::atoi(text.substr(pos, e - pos).c_str()));
      pos = e + 1;
    }
    if (out.size() != 3 || out[0] < 1 || out[1] < 1 || out[2] < 1)
      throw ConfigError("region must be three positive integers p,q,r");
    return out;
  }

  RunConfig cfg_;
  std::string out_dir_;
  int workers_;
};

}  // namespace ibsim

#endif  // IBSIM_EXPERIMENT_HPP
