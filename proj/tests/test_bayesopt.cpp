#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "djinn/bayesopt.hpp"
#include "djinn/error.hpp"

using namespace djinn;

TEST(ExpectedImprovement, ClosedForm) {
  EXPECT_DOUBLE_EQ(expected_improvement(1.0, 0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(expected_improvement(3.0, 0.0, 2.0), 0.0);
  // mean equal to best: sigma * phi(0)
  EXPECT_NEAR(expected_improvement(2.0, 4.0, 2.0), 2.0 / std::sqrt(2 * M_PI), 1e-12);
}

TEST(SearchSpace, CardinalityAndContains) {
  const SearchSpace s{{2, 3}, {5, 3}};
  EXPECT_DOUBLE_EQ(s.cardinality(), 4.0);
  EXPECT_TRUE(s.contains({4, 3}));
  EXPECT_FALSE(s.contains({4, 4}));
  EXPECT_FALSE(s.contains({4}));
  EXPECT_THROW((SearchSpace{{3}, {2}}.validate()), Error);
  EXPECT_THROW((SearchSpace{{0}, {2}}.validate()), Error);
}

TEST(GaussianProcess, InterpolatesTrainingPoints) {
  Matrix x(4, 1);
  x << 0.0, 0.3, 0.6, 1.0;
  Vector y(4);
  y << 1.0, 0.2, 0.5, 2.0;
  GaussianProcess gp;
  ASSERT_TRUE(gp.fit(x, y));
  for (int i = 0; i < 4; ++i) {
    const auto [m, v] = gp.predict(x.row(i).transpose());
    EXPECT_NEAR(m, y(i), 0.05);
    EXPECT_GE(v, 0.0);
  }
}

TEST(Optimize, FindsQuadraticMinimum) {
  const SearchSpace space{{2}, {30}};
  OptimizerConfig c;
  c.budget = 30;
  const SearchResult r = optimize(
      [](const std::vector<int> &w, std::uint64_t) { return std::pow(w[0] - 10.0, 2); }, space, c);
  EXPECT_EQ(r.best.widths, (std::vector<int>{10}));
  EXPECT_EQ(r.best.objective, 0.0);
  EXPECT_EQ(r.trials.size(), 30u);
}

TEST(Optimize, ExactBudgetAndInBounds) {
  const SearchSpace space{{2, 2}, {12, 12}};
  OptimizerConfig c;
  c.budget = 100;
  int calls = 0;
  const SearchResult r = optimize(
      [&](const std::vector<int> &w, std::uint64_t) {
        ++calls;
        return std::abs(w[0] - 7.0) + std::abs(w[1] - 3.0);
      },
      space, c);
  EXPECT_EQ(calls, 100);
  EXPECT_EQ(r.trials.size(), 100u);
  for (const auto &t : r.trials) EXPECT_TRUE(space.contains(t.widths));
  EXPECT_EQ(r.best.widths, (std::vector<int>{7, 3}));
}

TEST(Optimize, TinySpaceEnumeratedFirst) {
  const SearchSpace space{{2}, {5}};
  OptimizerConfig c;
  c.budget = 6;
  const SearchResult r = optimize(
      [](const std::vector<int> &w, std::uint64_t) { return -static_cast<double>(w[0]); }, space, c);
  std::set<int> seen;
  for (std::size_t i = 0; i < 4; ++i) seen.insert(r.trials[i].widths[0]);
  EXPECT_EQ(seen, (std::set<int>{2, 3, 4, 5}));
  EXPECT_EQ(r.trials.size(), 6u);
  EXPECT_EQ(r.best.widths, (std::vector<int>{5}));
}

TEST(Optimize, Deterministic) {
  const SearchSpace space{{2, 2}, {20, 20}};
  OptimizerConfig c;
  c.budget = 25;
  c.seed = 4;
  auto f = [](const std::vector<int> &w, std::uint64_t) {
    return std::sin(w[0] * 0.7) + std::cos(w[1] * 0.3);
  };
  const auto a = optimize(f, space, c), b = optimize(f, space, c);
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].widths, b.trials[i].widths);
}

TEST(DefaultSpace, TwiceWidestLayer) {
  const SearchSpace s = default_search_space({{4, 6}, {5, 9, 3}});
  EXPECT_EQ(s.lower, (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(s.upper, (std::vector<int>{18, 18, 18}));
}

TEST(SearchArchitecture, TrainsBudgetNetworks) {
  Dataset d;
  d.task = Task::regression;
  d.features = Matrix::Random(60, 2);
  d.targets = d.features.col(0) * 3.0 - d.features.col(1);
  TrainingConfig t;
  t.epochs = 5;
  t.batch_size = 8;
  OptimizerConfig c;
  c.budget = 12;
  const ArchitectureSearch s = search_architecture(d, SearchSpace{{2, 2}, {6, 6}}, t, c);
  EXPECT_EQ(s.networks_trained, 12);
  EXPECT_EQ(s.model.members.size(), 1u);
  EXPECT_EQ(s.model.members[0].hidden_widths(), s.result.best.widths);
  EXPECT_NE(trials_csv(s.result.trials).find("iteration"), std::string::npos);
}

TEST(Optimize, BudgetBelowInitialDesign) {
  OptimizerConfig c;
  c.budget = 3;
  int calls = 0;
  const SearchResult r = optimize(
      [&](const std::vector<int> &w, std::uint64_t) { return ++calls, static_cast<double>(w[0]); },
      SearchSpace{{2}, {40}}, c);
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(r.trials.size(), 3u);
  c.budget = 0;
  EXPECT_THROW(optimize([](const std::vector<int> &, std::uint64_t) { return 0.0; },
                        SearchSpace{{2}, {40}}, c),
               Error);
}
