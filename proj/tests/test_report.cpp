#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "ibsim/report.hpp"
#include "ibsim/rng.hpp"
#include "ibsim/runconfig.hpp"

using namespace ibsim;

TEST_CASE("report: serialize, parse, lookup") {
  Report r;
  r.set_text("run.model", "sine_beta");
  r.set_scalar("run.dt", 1e-3);
  r.add_sample("err", 0.5);
  r.add_sample("err", 1.5);
  const std::string text = r.serialize();
  const Report back = Report::parse(text);
  REQUIRE(back.text("run.model") == "sine_beta");
  REQUIRE(back.scalar("run.dt") == 1e-3);
  REQUIRE(back.sample_mean("err") == 1.0);
  REQUIRE(back.scalar("err.min") == 0.5);
  REQUIRE(back.scalar("err.max") == 1.5);

  // Sorted keys: serialization is stable under reconstruction.
  REQUIRE(back.serialize() == text);
}

TEST_CASE("report merge: identity, commutativity, quarter split") {
  Report base;
  base.set_text("run.model", "riesz");
  base.add_sample("x", 2.0);

  const Report empty;
  const Report m1 = Report::merge(base, empty);
  REQUIRE(m1.sample_mean("x") == 2.0);
  REQUIRE(m1.text("run.model") == "riesz");

  Report other;
  other.set_text("run.model", "riesz");
  other.add_sample("x", 4.0);
  const Report ab = Report::merge(base, other);
  const Report ba = Report::merge(other, base);
  REQUIRE(ab.serialize() == ba.serialize());
  REQUIRE(ab.sample_mean("x") == 3.0);

  // Four quarter-ensembles against one pass.
  Rng rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 64; ++i) xs.push_back(rng.uniform(-1, 1));
  Report full;
  for (double x : xs) full.add_sample("v", x);
  std::vector<Report> quarters(4);
  for (int q = 0; q < 4; ++q)
    for (int i = 16 * q; i < 16 * (q + 1); ++i) quarters[static_cast<std::size_t>(q)].add_sample("v", xs[static_cast<std::size_t>(i)]);
  Report merged = quarters[0];
  for (int q = 1; q < 4; ++q) merged = Report::merge(merged, quarters[static_cast<std::size_t>(q)]);
  REQUIRE(merged.scalar("v.count") == full.scalar("v.count"));
  REQUIRE(merged.scalar("v.sum") == Catch::Approx(full.scalar("v.sum")).epsilon(1e-14));
  REQUIRE(merged.scalar("v.sumsq") == Catch::Approx(full.scalar("v.sumsq")).epsilon(1e-14));
  REQUIRE(merged.scalar("v.min") == full.scalar("v.min"));
  REQUIRE(merged.scalar("v.max") == full.scalar("v.max"));

  // Conflicting plain keys refuse to merge.
  Report conflict;
  conflict.set_text("run.model", "bessel");
  REQUIRE_THROWS_AS(Report::merge(base, conflict), SchemaMismatch);
}

TEST_CASE("run config: parsing, defaults, rejection of unknown keys") {
  const RunConfig cfg = RunConfig::parse(
      "# comment line\n"
      "model.kind = sine_beta\n"
      "model.beta = 2\n"
      "solver.dt = 0.001   # trailing comment\n"
      "solver.horizon = 0.01\n"
      "seed = 42\n");
  REQUIRE(cfg.seed() == 42);
  const InteractionSpec spec = cfg.model();
  REQUIRE(spec.kind == ModelKind::SineBeta);
  REQUIRE(spec.beta == 2.0);
  const SolverConfig solver = cfg.solver();
  REQUIRE(solver.dt == 0.001);
  REQUIRE(solver.n_steps() == 10);

  REQUIRE_THROWS_AS(RunConfig::parse("model.bogus = 1\n"), ConfigError);
  REQUIRE_THROWS_AS(RunConfig::parse("model.kind = bogus\n").model(), ConfigError);
  REQUIRE_THROWS_AS(RunConfig::parse("solver.dt = abc\n").solver(), ConfigError);
  REQUIRE_THROWS_AS(RunConfig::parse("solver.dt = 0.003\nsolver.horizon = 0.01\n").solver(),
                    ConfigError);  // dt does not divide horizon
}

TEST_CASE("run config: dt ladder parsing") {
  const RunConfig cfg = RunConfig::parse("experiment.dt_ladder = 4e-3, 2e-3, 1e-3\n");
  const std::vector<double> ladder = cfg.number_list("experiment.dt_ladder");
  REQUIRE(ladder.size() == 3);
  REQUIRE(ladder[0] == 4e-3);
  REQUIRE(ladder[2] == 1e-3);
}
