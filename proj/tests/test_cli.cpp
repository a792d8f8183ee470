#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "ibsim/io.hpp"
#include "ibsim/report.hpp"

using namespace ibsim;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IBSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "ibsim_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kSmokeConfig =
    "model.kind = free\n"
    "model.dimension = 1\n"
    "sampler.kind = fixed\n"
    "sampler.n = 1\n"
    "sampler.window = 1\n"
    "solver.dt = 0.01\n"
    "solver.horizon = 0.1\n"
    "seed = 7\n";

}  // namespace

TEST_CASE("smoke run: exit 0 and exactly three artifacts") {
  const fs::path dir = fresh_dir("smoke");
  const fs::path cfg = dir / "run.cfg";
  write_text_file(cfg.string(), kSmokeConfig);
  const fs::path out = dir / "out";
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + out.string()) == 0);
  REQUIRE(fs::exists(out / "trajectory.csv"));
  REQUIRE(fs::exists(out / "brownian.csv"));
  REQUIRE(fs::exists(out / "report.txt"));
  int files = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    (void)e;
    ++files;
  }
  REQUIRE(files == 3);

  // The report echoes the resolved configuration.
  const Report rep = Report::parse(read_text_file((out / "report.txt").string()));
  REQUIRE(rep.text("config.model.kind") == "free");
  REQUIRE(rep.text("config.seed") == "7");
}

TEST_CASE("identical config and seed give identical artifact bytes") {
  const fs::path dir = fresh_dir("determinism");
  const fs::path cfg = dir / "run.cfg";
  write_text_file(cfg.string(), kSmokeConfig);
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + out_a.string()) == 0);
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + out_b.string()) == 0);
  for (const char* name : {"trajectory.csv", "brownian.csv", "report.txt"}) {
    REQUIRE(read_text_file((out_a / name).string()) == read_text_file((out_b / name).string()));
  }

  // A different seed changes the trajectory bytes.
  const fs::path out_c = dir / "c";
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --seed 8 --out " + out_c.string()) == 0);
  REQUIRE(read_text_file((out_a / "trajectory.csv").string()) !=
          read_text_file((out_c / "trajectory.csv").string()));
}

TEST_CASE("smoke report matches the golden key lines") {
  const fs::path dir = fresh_dir("golden");
  const fs::path cfg = dir / "run.cfg";
  write_text_file(cfg.string(), kSmokeConfig);
  const fs::path out = dir / "out";
  REQUIRE(run_cli("simulate --workers 1 --config " + cfg.string() + " --out " + out.string()) ==
          0);
  // Compare the float-free subset of the report against the committed
  // golden copy.
  const std::string report = read_text_file((out / "report.txt").string());
  std::string subset;
  std::size_t pos = 0;
  while (pos < report.size()) {
    std::size_t e = report.find('\n', pos);
    if (e == std::string::npos) e = report.size();
    const std::string line = report.substr(pos, e - pos);
    pos = e + 1;
    for (const char* prefix : {"report_schema", "config.", "simulate.model",
                               "simulate.n_particles", "simulate.n_steps"}) {
      if (line.rfind(prefix, 0) == 0) {
        subset += line;
        subset += '\n';
        break;
      }
    }
  }
  const std::string golden = read_text_file(std::string(IBSIM_GOLDEN_DIR) + "/smoke_report_keys.txt");
  REQUIRE(subset == golden);
}

TEST_CASE("unknown model kinds and keys exit with status 2") {
  const fs::path dir = fresh_dir("badcfg");
  const fs::path bad_kind = dir / "bad_kind.cfg";
  write_text_file(bad_kind.string(), "model.kind = bogus\n");
  REQUIRE(run_cli("simulate --config " + bad_kind.string() + " --out " + (dir / "o1").string()) ==
          2);

  const fs::path bad_key = dir / "bad_key.cfg";
  write_text_file(bad_key.string(), "model.bogus_key = 1\n");
  REQUIRE(run_cli("simulate --config " + bad_key.string() + " --out " + (dir / "o2").string()) ==
          2);
}

TEST_CASE("ifc-check subcommand writes a consistency report") {
  const fs::path dir = fresh_dir("ifc");
  const fs::path cfg = dir / "run.cfg";
  write_text_file(cfg.string(),
                  "model.kind = sine_beta\n"
                  "model.beta = 2\n"
                  "model.confinement = 3\n"
                  "sampler.kind = dyson\n"
                  "sampler.n = 6\n"
                  "solver.dt = 0.001\n"
                  "solver.horizon = 0.02\n"
                  "experiment.ensemble = 4\n"
                  "experiment.m = 2\n"
                  "experiment.dt_ladder = 0.002,0.001\n"
                  "seed = 3\n");
  const fs::path out = dir / "out";
  REQUIRE(run_cli("ifc-check --config " + cfg.string() + " --out " + out.string()) == 0);
  const Report rep = Report::parse(read_text_file((out / "report.txt").string()));
  REQUIRE(rep.text("checks.consistency_ladder_monotone") == "pass");
  REQUIRE(rep.scalar("ifc.b1_uncovered_fraction.count") == 4.0);
}

TEST_CASE("diagnose and reverse-check run end to end") {
  const fs::path dir = fresh_dir("diag");
  const fs::path cfg = dir / "run.cfg";
  write_text_file(cfg.string(),
                  "model.kind = sine_beta\n"
                  "model.beta = 2\n"
                  "model.confinement = 3\n"
                  "sampler.kind = dyson\n"
                  "sampler.n = 6\n"
                  "sampler.window = 3\n"
                  "solver.dt = 0.001\n"
                  "solver.horizon = 0.02\n"
                  "experiment.ensemble = 4\n"
                  "seed = 5\n");
  const fs::path out_d = dir / "diag_out";
  REQUIRE(run_cli("diagnose --config " + cfg.string() + " --upsilon --chi 1 --nbj 1 --kappa 2 " +
                  "--out " + out_d.string()) == 0);
  const Report rep = Report::parse(read_text_file((out_d / "report.txt").string()));
  REQUIRE(rep.text("checks.chi_in_unit_interval") == "pass");
  REQUIRE(rep.scalar("diagnose.upsilon_at_1") == 1.0);

  const fs::path out_r = dir / "rev_out";
  REQUIRE(run_cli("reverse-check --config " + cfg.string() + " --out " + out_r.string()) == 0);
  const Report rev = Report::parse(read_text_file((out_r / "report.txt").string()));
  REQUIRE(rev.text("checks.lz_within_twice_ito") == "pass");
}
