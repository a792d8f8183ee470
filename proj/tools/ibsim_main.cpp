// Command-line front end: simulate | ifc-check | diagnose | fields |
// reverse-check | all, each driven by a line-based key = value config.
// Exit codes: 0 success, 1 a reported check failed, 2 configuration error,
// 3 numerical abort.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ibsim/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string seed_text;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "path to the run configuration file");
  cmd->add_option("--seed", args.seed_text, "master seed (overrides the config)");
  cmd->add_option("--out", args.out_dir, "output directory (default $IBSIM_OUT or ./out)");
  cmd->add_option("--workers", args.workers, "worker threads (default: hardware)");
}

ibsim::RunConfig load_config(const CommonArgs& args) {
  std::string text;
  if (!args.config_path.empty()) text = ibsim::read_text_file(args.config_path);
  ibsim::RunConfig cfg = ibsim::RunConfig::parse(text);
  if (!args.seed_text.empty())
    cfg = ibsim::RunConfig::parse(text + "\nseed = " + args.seed_text + "\n");
  return cfg;
}

std::string resolve_out(const CommonArgs& args, const std::string& sub) {
  if (!args.out_dir.empty()) return args.out_dir;
  const char* env = std::getenv("IBSIM_OUT");
  const std::string base = env != nullptr && *env != '\0' ? env : "out";
  return base + "/" + sub;
}

int resolve_workers(const CommonArgs& args) {
  if (args.workers > 0) return args.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interacting Brownian particle simulator and verification toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::size_t ifc_m = 0;
  std::string ifc_ladder, ifc_schemes, ifc_region;
  bool diag_upsilon = false;
  std::string diag_chi;
  int diag_nbj_r = 0, diag_kappa_q = 0;

  CLI::App* c_sim = app.add_subcommand("simulate", "run one labeled simulation");
  add_common(c_sim, args);
  CLI::App* c_ifc = app.add_subcommand("ifc-check", "frozen-environment re-solve probes");
  add_common(c_ifc, args);
  c_ifc->add_option("--m", ifc_m, "number of tagged particles");
  c_ifc->add_option("--dt-ladder", ifc_ladder, "comma-separated dt ladder");
  c_ifc->add_option("--schemes", ifc_schemes, "schemes to compare (euler,tamed_euler)");
  c_ifc->add_option("--region", ifc_region, "localization region p,q,r");
  CLI::App* c_diag = app.add_subcommand("diagnose", "Lyapunov, cut-off and exit-time probes");
  add_common(c_diag, args);
  c_diag->add_flag("--upsilon", diag_upsilon, "report the Lyapunov pair values");
  c_diag->add_option("--chi", diag_chi, "cut-off level and ball cap q,Q");
  c_diag->add_option("--nbj", diag_nbj_r, "ball radius for the big-jump counter");
  c_diag->add_option("--kappa", diag_kappa_q, "tame level for the exit scan");
  CLI::App* c_fields = app.add_subcommand("fields", "equilibrium correlation estimates");
  add_common(c_fields, args);
  CLI::App* c_rev = app.add_subcommand("reverse-check", "time-reversal and martingale tests");
  add_common(c_rev, args);
  CLI::App* c_all = app.add_subcommand("all", "run every probe into one directory tree");
  add_common(c_all, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const ibsim::RunConfig cfg = load_config(args);
    const int workers = resolve_workers(args);
    if (c_sim->parsed()) {
      ibsim::ExperimentRunner r(cfg, resolve_out(args, "simulate"), workers);
      return r.run_simulate();
    }
    if (c_ifc->parsed()) {
      ibsim::ExperimentRunner r(cfg, resolve_out(args, "ifc-check"), workers);
      std::vector<double> ladder;
      if (!ifc_ladder.empty()) {
        const ibsim::RunConfig tmp =
            ibsim::RunConfig::parse("experiment.dt_ladder = " + ifc_ladder + "\n");
        ladder = tmp.number_list("experiment.dt_ladder");
      }
      return r.run_ifc_check(ifc_m, ladder, ifc_schemes, ifc_region);
    }
    if (c_diag->parsed()) {
      ibsim::ExperimentRunner r(cfg, resolve_out(args, "diagnose"), workers);
      int chi_q = 0, chi_cap = 0;
      if (!diag_chi.empty() &&
          std::sscanf(diag_chi.c_str(), "%d,%d", &chi_q, &chi_cap) < 1)
        throw ibsim::ConfigError("--chi expects q or q,Q");
      return r.run_diagnose(diag_upsilon, chi_q, chi_cap, diag_nbj_r, diag_kappa_q);
    }
    if (c_fields->parsed()) {
      ibsim::ExperimentRunner r(cfg, resolve_out(args, "fields"), workers);
      return r.run_fields();
    }
    if (c_rev->parsed()) {
      ibsim::ExperimentRunner r(cfg, resolve_out(args, "reverse-check"), workers);
      return r.run_reverse_check();
    }
    ibsim::ExperimentRunner r(cfg, resolve_out(args, "all"), workers);
    return r.run_all();
  } catch (const ibsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ibsim::CollisionAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const ibsim::DomainViolation& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const ibsim::NonConvergentSum& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const ibsim::MCMCNotMixed& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const ibsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
