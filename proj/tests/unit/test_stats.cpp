#include <doctest.h>

#include <cmath>
#include <random>

#include "../support.hpp"
#include "crowdnlg/stats.hpp"

using namespace crowdnlg::stats;
using testing_support::close_rel;

namespace {

std::vector<Observation> observations_of(const nlohmann::json& rows) {
  std::vector<Observation> obs;
  for (const auto& r : rows) obs.push_back({r[0].get<int>(), r[1].get<int>(), r[2].get<double>()});
  return obs;
}

void check_effect(const AnovaEffect& got, const nlohmann::json& want) {
  CHECK(close_rel(got.sum_of_squares, want.at("ss").get<double>(), 1e-6));
  CHECK(got.df == want.at("df").get<double>());
  if (want.contains("F")) {
    REQUIRE(got.f.has_value());
    REQUIRE(got.p.has_value());
    CHECK(close_rel(*got.f, want.at("F").get<double>(), 1e-6));
    CHECK(close_rel(*got.p, want.at("p").get<double>(), 1e-6));
  }
}

void check_table(const AnovaTable& t, const nlohmann::json& want) {
  check_effect(t.factor_a, want.at("a"));
  check_effect(t.factor_b, want.at("b"));
  check_effect(t.interaction, want.at("ab"));
  check_effect(t.residual, want.at("residual"));
}

}  // namespace

TEST_SUITE("stats_engine") {

TEST_CASE("two-way ANOVA: hand-computed 2x2 design") {
  // Cell means 2, 2, 4, 4; every cell holds mean +- 0.5.
  const std::vector<Observation> obs = {{0, 0, 1.5}, {0, 0, 2.5}, {0, 1, 1.5}, {0, 1, 2.5},
                                        {1, 0, 3.5}, {1, 0, 4.5}, {1, 1, 3.5}, {1, 1, 4.5}};
  const auto t = two_way_anova(obs);
  CHECK(t.factor_a.sum_of_squares == doctest::Approx(8.0));
  CHECK(t.factor_a.df == 1);
  CHECK(t.residual.sum_of_squares == doctest::Approx(2.0));
  CHECK(t.residual.df == 4);
  CHECK(*t.factor_a.f == doctest::Approx(16.0));
  CHECK(t.factor_b.sum_of_squares == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.interaction.sum_of_squares == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.n == 8);
}

TEST_CASE("two-way ANOVA: wider spread lowers F") {
  const std::vector<Observation> obs = {{0, 0, 1}, {0, 0, 3}, {0, 1, 1}, {0, 1, 3},
                                        {1, 0, 3}, {1, 0, 5}, {1, 1, 3}, {1, 1, 5}};
  const auto t = two_way_anova(obs);
  CHECK(t.factor_a.sum_of_squares == doctest::Approx(8.0));
  CHECK(t.residual.sum_of_squares == doctest::Approx(8.0));
  CHECK(*t.factor_a.f == doctest::Approx(4.0));
}

TEST_CASE("two-way ANOVA matches the oracle on 50 random designs") {
  const auto doc = testing_support::load_json(testing_support::fixture("anova_random.json"));
  REQUIRE(doc.at("cases").size() == 50);
  int i = 0;
  for (const auto& c : doc.at("cases")) {
    CAPTURE(i++);
    check_table(two_way_anova(observations_of(c.at("observations"))), c.at("expected"));
  }
}

TEST_CASE("two-way ANOVA matches the oracle on an unbalanced design") {
  const auto doc = testing_support::load_json(testing_support::fixture("anova_unbalanced.json"));
  check_table(two_way_anova(observations_of(doc.at("observations"))), doc.at("expected"));
}

TEST_CASE("balanced designs: effect sums of squares add up to the total") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> noise(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Observation> obs;
    const int reps = 2 + trial % 4;
    for (int a = 0; a < 2; ++a)
      for (int b : {3, 5, 8})
        for (int r = 0; r < reps; ++r) obs.push_back({a, b, a * 1.5 + b * 0.3 + noise(gen)});
    const auto t = two_way_anova(obs);
    const double sum = t.factor_a.sum_of_squares + t.factor_b.sum_of_squares + t.interaction.sum_of_squares +
                       t.residual.sum_of_squares;
    CHECK(close_rel(sum, t.total_sum_of_squares, 1e-9));
    CHECK(t.factor_a.df + t.factor_b.df + t.interaction.df + t.residual.df == obs.size() - 1);
  }
}

TEST_CASE("two-way ANOVA degenerate designs") {
  const std::vector<Observation> one_level = {{0, 3, 1}, {0, 3, 2}, {0, 5, 3}, {0, 5, 4}};
  try {
    two_way_anova(one_level);
    FAIL("expected DegenerateDesign");
  } catch (const StatsError& e) {
    CHECK(e.kind() == StatsError::Kind::DegenerateDesign);
  }
  const std::vector<Observation> saturated = {{0, 3, 1}, {0, 5, 2}, {1, 3, 3}, {1, 5, 4}};
  CHECK_THROWS_AS(two_way_anova(saturated), StatsError);
}

TEST_CASE("F survival matches the oracle") {
  const auto doc = testing_support::load_json(testing_support::fixture("f_survival.json"));
  for (const auto& c : doc.at("cases")) {
    const double got = f_survival(c.at("f").get<double>(), c.at("df1").get<double>(), c.at("df2").get<double>());
    const double want = c.at("p").get<double>();
    CAPTURE(c.dump());
    CHECK((std::abs(got - want) <= 1e-10 || close_rel(got, want, 1e-6)));
  }
  CHECK(f_survival(24.99, 2, 1236) < 1e-10);
}

TEST_CASE("F survival is decreasing in F and bounded") {
  double prev = 1.0;
  for (double f = 0; f < 30; f += 0.25) {
    const double p = f_survival(f, 3, 40);
    CHECK(p <= prev + 1e-15);
    CHECK(p >= 0.0);
    prev = p;
  }
  CHECK(f_survival(0, 3, 40) == doctest::Approx(1.0));
}

TEST_CASE("incomplete beta and tails") {
  CHECK(incomplete_beta(0.5, 1, 1) == doctest::Approx(0.5));
  CHECK(incomplete_beta(0.5, 2, 2) == doctest::Approx(0.5));
  CHECK(incomplete_beta(0.25, 1, 2) == doctest::Approx(0.4375));
  CHECK(normal_two_sided(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(t_two_sided(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(t_two_sided(0, 5) == doctest::Approx(1.0));
}

TEST_CASE("Cohen's kappa: examples") {
  const std::vector<std::string> a = {"x", "y", "x", "y"};
  const auto k = cohens_kappa(a, a);
  CHECK(k.kappa == doctest::Approx(1.0));
  CHECK(k.observed_agreement == doctest::Approx(1.0));
  CHECK(k.expected_agreement == doctest::Approx(0.5));

  const std::vector<std::string> b = {"y", "x", "y", "x"};
  CHECK(cohens_kappa(a, b).kappa == doctest::Approx(-1.0));

  // Observed 0.5 against chance 0.5.
  const std::vector<std::string> c = {"x", "x", "y", "y"};
  const std::vector<std::string> d = {"x", "y", "x", "y"};
  const auto half = cohens_kappa(c, d);
  CHECK(half.observed_agreement == 0.5);
  CHECK(half.expected_agreement == 0.5);
  CHECK(half.kappa == 0.0);

  // Textbook table: 20/5/10/15 over 50 items gives kappa 0.4.
  std::vector<std::string> r1, r2;
  auto add = [&](int n, const char* u, const char* v) {
    for (int i = 0; i < n; ++i) {
      r1.push_back(u);
      r2.push_back(v);
    }
  };
  add(20, "yes", "yes");
  add(5, "yes", "no");
  add(10, "no", "yes");
  add(15, "no", "no");
  const auto t = cohens_kappa(r1, r2);
  CHECK(t.kappa == doctest::Approx(0.4));
  CHECK(t.observed_agreement == doctest::Approx(0.7));
  CHECK(t.expected_agreement == doctest::Approx(0.5));
}

TEST_CASE("Cohen's kappa: symmetric and label-permutation invariant") {
  const auto doc = testing_support::load_json(testing_support::fixture("kappa_random.json"));
  for (const auto& c : doc.at("cases")) {
    const auto a = c.at("a").get<std::vector<std::string>>();
    const auto b = c.at("b").get<std::vector<std::string>>();
    const auto k = cohens_kappa(a, b);
    CHECK(cohens_kappa(b, a).kappa == doctest::Approx(k.kappa).epsilon(1e-12));
    auto relabel = [](std::vector<std::string> v) {
      for (auto& s : v) s = "L" + std::to_string(s.size());
      return v;
    };
    CHECK(cohens_kappa(relabel(a), relabel(b)).kappa == doctest::Approx(k.kappa).epsilon(1e-12));
  }
}

TEST_CASE("Cohen's kappa matches the oracle") {
  const auto doc = testing_support::load_json(testing_support::fixture("kappa_random.json"));
  REQUIRE(doc.at("cases").size() == 50);
  for (const auto& c : doc.at("cases")) {
    const auto k = cohens_kappa(c.at("a").get<std::vector<std::string>>(), c.at("b").get<std::vector<std::string>>());
    const auto& e = c.at("expected");
    CHECK(close_rel(k.kappa, e.at("kappa").get<double>(), 1e-6));
    CHECK(close_rel(k.observed_agreement, e.at("observed").get<double>(), 1e-6));
    CHECK(close_rel(k.z, e.at("z").get<double>(), 1e-6));
    CHECK(close_rel(k.p, e.at("p").get<double>(), 1e-6));
  }
}

TEST_CASE("Cohen's kappa errors") {
  const std::vector<std::string> same = {"a", "a", "a"};
  try {
    cohens_kappa(same, same);
    FAIL("expected DegenerateMarginals");
  } catch (const StatsError& e) {
    CHECK(e.kind() == StatsError::Kind::DegenerateMarginals);
  }
  const std::vector<std::string> two = {"a", "b"};
  CHECK_THROWS_AS(cohens_kappa(same, two), StatsError);
  CHECK_THROWS_AS(cohens_kappa({}, {}), StatsError);
}

TEST_CASE("percentage agreement") {
  const std::vector<std::string> a = {"x", "y", "z"};
  const std::vector<std::string> b = {"x", "y", "x"};
  CHECK(percentage_agreement(a, b) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("Pearson: examples and errors") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> up = {2, 4, 6, 8, 10};
  const std::vector<double> down = {5, 4, 3, 2, 1};
  CHECK(pearson(x, up).r == doctest::Approx(1.0));
  CHECK(pearson(x, up).p == doctest::Approx(0.0));
  CHECK(pearson(x, down).r == doctest::Approx(-1.0));
  CHECK(pearson(x, std::vector<double>{1, 3, 2, 5, 4}).r == doctest::Approx(0.8));
  try {
    pearson(x, std::vector<double>{3, 3, 3, 3, 3});
    FAIL("expected ConstantInput");
  } catch (const StatsError& e) {
    CHECK(e.kind() == StatsError::Kind::ConstantInput);
  }
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), StatsError);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2, 3}), StatsError);
}

TEST_CASE("Pearson is invariant under positive affine maps and flips sign under negative ones") {
  const auto doc = testing_support::load_json(testing_support::fixture("pearson_random.json"));
  for (const auto& c : doc.at("cases")) {
    const auto x = c.at("x").get<std::vector<double>>();
    const auto y = c.at("y").get<std::vector<double>>();
    const double r = pearson(x, y).r;
    std::vector<double> xs, xn;
    for (double v : x) {
      xs.push_back(3.0 * v + 7.0);
      xn.push_back(-0.5 * v + 1.0);
    }
    CHECK(pearson(xs, y).r == doctest::Approx(r).epsilon(1e-9));
    CHECK(pearson(xn, y).r == doctest::Approx(-r).epsilon(1e-9));
  }
}

TEST_CASE("Pearson matches the oracle") {
  const auto doc = testing_support::load_json(testing_support::fixture("pearson_random.json"));
  REQUIRE(doc.at("cases").size() == 50);
  for (const auto& c : doc.at("cases")) {
    const auto res = pearson(c.at("x").get<std::vector<double>>(), c.at("y").get<std::vector<double>>());
    CHECK(close_rel(res.r, c.at("r").get<double>(), 1e-6));
    CHECK(close_rel(res.p, c.at("p").get<double>(), 1e-6));
  }
  const auto big = testing_support::load_json(testing_support::fixture("pearson_100.json"));
  const auto res = pearson(big.at("x").get<std::vector<double>>(), big.at("y").get<std::vector<double>>());
  CHECK(std::abs(res.r - big.at("r").get<double>()) <= 1e-9);
  CHECK(close_rel(res.p, big.at("p").get<double>(), 1e-6));
  CHECK(res.n == 100);
}

TEST_CASE("summarize") {
  const auto s = summarize(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(s.n == 8);
  CHECK(s.mean == doctest::Approx(5.0));
  CHECK(*s.stdev == doctest::Approx(2.138089935299395));
  const auto one = summarize(std::vector<double>{3});
  CHECK(one.mean == 3);
  CHECK_FALSE(one.stdev.has_value());
  CHECK(summarize(std::vector<double>{}).n == 0);
}

TEST_CASE("per-cell fixture values reproduce their summaries") {
  const auto doc = testing_support::load_json(testing_support::fixture("summary_cells.json"));
  for (const auto& cell : doc.at("cells")) {
    CAPTURE(cell.at("metric").get<std::string>());
    const auto s = summarize(cell.at("values").get<std::vector<double>>());
    CHECK(std::abs(s.mean - cell.at("mean").get<double>()) <= 0.01);
    CHECK(std::abs(*s.stdev - cell.at("stdev").get<double>()) <= 0.01);
  }
}

TEST_CASE("sentence counting") {
  CHECK(count_sentences("A pub. Near the river.") == 2);
  CHECK(count_sentences("A pub") == 1);
  CHECK(count_sentences("A pub. Near the river") == 2);
  CHECK(count_sentences("Wow... a pub.") == 2);
  CHECK(count_sentences("") == 0);
  CHECK(count_sentences(" . . ") == 0);
}

}  // TEST_SUITE
