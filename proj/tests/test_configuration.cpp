#include <catch2/catch_amalgamated.hpp>

#include "ibsim/configuration.hpp"
#include "ibsim/rng.hpp"

using namespace ibsim;

namespace {

Configuration cfg1d(std::initializer_list<double> xs) {
  Configuration c;
  c.dim = 1;
  for (double x : xs) c.points.push_back(Point{x, 0, 0});
  return c;
}

Configuration random_simple(Rng& rng, int n, int dim, double span) {
  Configuration c;
  c.dim = dim;
  for (int i = 0; i < n; ++i) {
    Point p{0, 0, 0};
    for (int k = 0; k < dim; ++k) p[static_cast<std::size_t>(k)] = rng.uniform(-span, span);
    c.points.push_back(p);
  }
  return c;
}

bool same_multiset(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size()) return false;
  auto sa = a.points, sb = b.points;
  std::sort(sa.begin(), sa.end(), lex_less);
  std::sort(sb.begin(), sb.end(), lex_less);
  return sa == sb;
}

}  // namespace

TEST_CASE("unlabel forgets order and keeps multiplicity") {
  LabeledState s;
  s.dim = 1;
  s.positions = {Point{1, 0, 0}, Point{-1, 0, 0}};
  const Configuration c = unlabel(s);
  REQUIRE(same_multiset(c, cfg1d({-1, 1})));

  LabeledState empty;
  REQUIRE(unlabel(empty).empty());

  LabeledState doubled;
  doubled.dim = 2;
  doubled.positions = {Point{0, 1, 0}, Point{0, 1, 0}};
  const Configuration dc = unlabel(doubled);
  REQUIRE(dc.size() == 2);
  REQUIRE_FALSE(is_simple(dc, 0.0));
}

TEST_CASE("label sorts by modulus with lexicographic tie-break") {
  const LabeledState s = label(cfg1d({3, -1, 2}));
  REQUIRE(s.positions[0][0] == -1.0);
  REQUIRE(s.positions[1][0] == 2.0);
  REQUIRE(s.positions[2][0] == 3.0);

  const LabeledState single = label(cfg1d({7}));
  REQUIRE(single.positions.size() == 1);
  REQUIRE(single.positions[0][0] == 7.0);

  // Equal moduli: -1 precedes 1 lexicographically.
  const LabeledState tie = label(cfg1d({1, -1}));
  REQUIRE(tie.positions[0][0] == -1.0);
  REQUIRE(tie.positions[1][0] == 1.0);

  REQUIRE_THROWS_AS(label(cfg1d({2, 2})), NonSimpleConfiguration);
}

TEST_CASE("unlabel after label is the identity on simple configurations") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng.below(3));
    const Configuration c = random_simple(rng, 1 + static_cast<int>(rng.below(20)), dim, 5.0);
    REQUIRE(same_multiset(unlabel(label(c)), c));
  }
}

TEST_CASE("split_m takes a prefix and unlabels the rest") {
  const LabeledState s = label(cfg1d({3, -1, 2}));

  const MLabeledState m1 = split_m(s, 1);
  REQUIRE(m1.tagged.size() == 1);
  REQUIRE(m1.tagged[0][0] == -1.0);
  REQUIRE(same_multiset(m1.environment, cfg1d({2, 3})));

  const MLabeledState m3 = split_m(s, 3);
  REQUIRE(m3.tagged.size() == 3);
  REQUIRE(m3.environment.empty());

  const MLabeledState m0 = split_m(s, 0);
  REQUIRE(m0.tagged.empty());
  REQUIRE(same_multiset(m0.environment, cfg1d({-1, 2, 3})));

  REQUIRE_THROWS_AS(split_m(s, 4), IndexOutOfRange);
}

TEST_CASE("split and recombine reproduces the unlabeled state") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration c = random_simple(rng, 8, 2, 3.0);
    const LabeledState s = label(c);
    const std::size_t m = rng.below(9);
    const MLabeledState sp = split_m(s, m);
    Configuration recombined = sp.environment;
    for (const auto& p : sp.tagged) recombined.points.push_back(p);
    REQUIRE(same_multiset(recombined, c));
  }
}

TEST_CASE("tame_level compares closed-ball counts against the schedule") {
  // a_q(r) = q * r over two levels and two radii.
  TameSchedule sched;
  sched.growth_exponent = 1.0;
  sched.level_scale = {1, 2};
  sched.max_level = 2;

  // counts: |x| <= 1 -> 2 points, |x| <= 2 -> 3 points.
  const Configuration c = cfg1d({0.5, -0.8, 1.5});
  REQUIRE(tame_level(c, sched).value() == 2);  // level 1 fails at r=1: 2 > 1

  REQUIRE(tame_level(Configuration{{}, 1}, sched).value() == 1);

  const Configuration far = cfg1d({10.0});
  REQUIRE(tame_level(far, sched).value() == 1);  // outside both balls, counts 0
}

TEST_CASE("tame_level is monotone under adding points") {
  TameSchedule sched = TameSchedule::scaled(1.0, 1, 6);
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Configuration c = random_simple(rng, 1 + static_cast<int>(rng.below(12)), 1, 3.0);
    const auto q0 = tame_level(c, sched);
    c.points.push_back(Point{rng.uniform(-3, 3), 0, 0});
    const auto q1 = tame_level(c, sched);
    if (q0 && q1) REQUIRE(q1.value() >= q0.value());
  }
}

TEST_CASE("tame_level witnesses membership and the predecessor fails") {
  TameSchedule sched = TameSchedule::scaled(2.0, 1, 8);
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Configuration c = random_simple(rng, 6 + static_cast<int>(rng.below(10)), 1, 2.0);
    const auto q = tame_level(c, sched);
    REQUIRE(q.has_value());
    REQUIRE(in_tame_set(c, sched, q.value()));
    if (q.value() > 1) REQUIRE_FALSE(in_tame_set(c, sched, q.value() - 1));
  }
}

TEST_CASE("points exactly on the sphere count for the closed ball") {
  const Configuration c = cfg1d({1.0});
  REQUIRE(count_in_closed_ball(c, 1.0) == 1);
  TameSchedule sched;
  sched.growth_exponent = 1.0;
  sched.level_scale = {1};
  // One point at radius exactly 1: inside the closed ball of radius 1.
  REQUIRE(in_tame_set(c, sched, 1));
}

TEST_CASE("is_simple with tolerance") {
  REQUIRE(is_simple(cfg1d({0, 1}), 0.0));
  REQUIRE_FALSE(is_simple(cfg1d({0, 0}), 0.0));
  REQUIRE_FALSE(is_simple(cfg1d({0, 1e-12}), 1e-9));
  REQUIRE_THROWS_AS(is_simple(cfg1d({0}), -1.0), ConfigError);
}

TEST_CASE("tame schedule validation enforces the separation chain") {
  const TameSchedule ok = TameSchedule::scaled(3.0, 1, 8);
  for (int q = 1; q < ok.levels(); ++q)
    for (int r = 1; r <= 6; ++r) {
      REQUIRE(ok.count_bound(q, r) < ok.count_bound(q, r + 1));
      REQUIRE(ok.count_bound(q, r) < ok.count_bound(q + 1, r));
      REQUIRE(ok.count_bound_plus(q, r) < ok.count_bound(q + 1, r));
    }

  TameSchedule bad;
  bad.growth_exponent = 1.0;
  bad.level_scale = {1, 2, 3};  // linear growth violates a_q^+ < a_{q+1}
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("configuration serialization round-trips at 17 digits") {
  Rng rng(5);
  const Configuration c = random_simple(rng, 9, 3, 4.0);
  const std::string text = serialize_configuration(c);
  const Configuration back = parse_configuration(text);
  REQUIRE(back.dim == c.dim);
  REQUIRE(back.points == c.points);

  const std::string header = text.substr(0, text.find('\n'));
  REQUIRE(header == "# dim=3 n=9");
}
