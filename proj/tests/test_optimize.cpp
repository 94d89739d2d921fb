#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "afferentsim/optimize.hpp"
#include "test_support.hpp"

using namespace afferentsim;
using afferentsim::testing::sinusoid_banks;

namespace {

Eigen::VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }

// Peels off points no remaining point dominates.
std::vector<int> brute_force_ranks(const std::vector<Eigen::VectorXd>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> rank(n, -1);
  for (int r = 0, left = n; left > 0; ++r) {
    std::vector<int> layer;
    for (int i = 0; i < n; ++i) {
      if (rank[i] >= 0) continue;
      bool dominated = false;
      for (int j = 0; j < n && !dominated; ++j) {
        if (j == i || rank[j] >= 0) continue;
        bool no_worse = true, better = false;
        for (Eigen::Index k = 0; k < pts[i].size(); ++k) {
          no_worse = no_worse && pts[j](k) <= pts[i](k);
          better = better || pts[j](k) < pts[i](k);
        }
        dominated = no_worse && better;
      }
      if (!dominated) layer.push_back(i);
    }
    for (int i : layer) rank[i] = r;
    left -= static_cast<int>(layer.size());
  }
  return rank;
}

ParameterBounds line_bounds() {
  ParameterBounds b;
  b.names = {"x"};
  b.lower = Eigen::VectorXd::Constant(1, -10.0);
  b.upper = Eigen::VectorXd::Constant(1, 10.0);
  b.log_scale = {false};
  return b;
}

Eigen::VectorXd two_parabolas(const Eigen::VectorXd& x) {
  return v2(x(0) * x(0), (x(0) - 2.0) * (x(0) - 2.0));
}

ObservedRateSet observed_on_bank(const AfferentParams& p, const StressBank& bank) {
  return synthesize_observed(p, bank, bank.conditions());
}

}  // namespace

TEST(Dominance, Basics) {
  EXPECT_TRUE(dominates(v2(1, 1), v2(1, 2)));
  EXPECT_FALSE(dominates(v2(1, 2), v2(1, 2)));
  EXPECT_FALSE(dominates(v2(0, 3), v2(1, 2)));
  EXPECT_FALSE(dominates(v2(1, 2), v2(1, 1)));
}

TEST(Dominance, SortMatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> u(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 30; ++i) {
      Eigen::VectorXd p(3);
      p << u(rng), u(rng), u(rng);
      pts.push_back(p);
    }
    const auto fronts = non_dominated_sort(pts);
    const auto ranks = brute_force_ranks(pts);
    std::vector<int> seen(pts.size(), 0);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
      for (int i : fronts[r]) {
        EXPECT_EQ(ranks[i], static_cast<int>(r));
        ++seen[i];
      }
    }
    for (int s : seen) EXPECT_EQ(s, 1);
  }
}

TEST(Crowding, BoundaryInfiniteInteriorNormalized) {
  const std::vector<Eigen::VectorXd> pts = {v2(0, 4), v2(1, 2), v2(3, 1), v2(4, 0)};
  const auto d = crowding_distance(pts, {0, 1, 2, 3});
  EXPECT_TRUE(std::isinf(d[0]));
  EXPECT_TRUE(std::isinf(d[3]));
  EXPECT_NEAR(d[1], 3.0 / 4.0 + 3.0 / 4.0, 1e-12);
  EXPECT_NEAR(d[2], 3.0 / 4.0 + 2.0 / 4.0, 1e-12);
}

TEST(Hypervolume, StaircaseAndGridOracle) {
  const std::vector<Eigen::VectorXd> pts = {v2(1, 3), v2(2, 2), v2(3, 1), v2(3.5, 3.5), v2(5, 0)};
  const Eigen::Vector2d ref(4, 4);
  EXPECT_NEAR(hypervolume_2d(pts, ref), 6.0, 1e-12);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> cloud;
  for (int i = 0; i < 15; ++i) cloud.push_back(v2(u(rng), u(rng)));
  const int g = 800;
  int covered = 0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double x = (i + 0.5) / g, y = (j + 0.5) / g;
      for (const auto& p : cloud) {
        if (p(0) <= x && p(1) <= y) {
          ++covered;
          break;
        }
      }
    }
  }
  EXPECT_NEAR(hypervolume_2d(cloud, {1.0, 1.0}), static_cast<double>(covered) / (g * g), 5e-3);
}

TEST(Nsga2, ConvergesOnTwoParabolas) {
  Nsga2Options opt;
  opt.population = 40;
  opt.budget = 40 * 60;
  opt.seed = 3;
  const ParetoFront front = nsga2(two_parabolas, line_bounds(), opt);
  EXPECT_EQ(front.evaluations, opt.budget);
  std::vector<Eigen::VectorXd> objs;
  for (const auto& m : front.non_dominated()) {
    objs.push_back(m.objectives);
    EXPECT_GE(m.x(0), -1e-3);
    EXPECT_LE(m.x(0), 2.0 + 1e-3);
  }
  // Dominated area of the exact front {(x^2, (x-2)^2), 0 <= x <= 2} in [0, 25]^2.
  const double exact = 625.0 - 8.0 / 3.0;
  EXPECT_NEAR(hypervolume_2d(objs, {25.0, 25.0}), exact, 0.05 * exact);
  EXPECT_GT(hypervolume_2d(objs, {25.0, 25.0}), 0.995 * exact);
}

TEST(Nsga2, DeterministicAndMonotoneHistory) {
  Nsga2Options opt;
  opt.population = 12;
  opt.budget = 120;
  opt.seed = 17;
  const ParetoFront a = nsga2(two_parabolas, line_bounds(), opt);
  const ParetoFront b = nsga2(two_parabolas, line_bounds(), opt);
  ASSERT_EQ(a.members.size(), b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    EXPECT_TRUE(a.members[i].x == b.members[i].x);
    EXPECT_TRUE(a.members[i].objectives == b.members[i].objectives);
  }
  EXPECT_EQ(a.best_sum_history.size(), 10u);
  for (std::size_t i = 1; i < a.best_sum_history.size(); ++i) {
    EXPECT_LE(a.best_sum_history[i], a.best_sum_history[i - 1]);
  }
  opt.seed = 18;
  const ParetoFront c = nsga2(two_parabolas, line_bounds(), opt);
  EXPECT_FALSE(c.members[0].x == a.members[0].x);
}

TEST(Nsga2, SmallestBudgetRuns) {
  Nsga2Options opt;
  opt.population = 4;
  opt.budget = 8;
  const ParetoFront f = nsga2(two_parabolas, line_bounds(), opt);
  EXPECT_EQ(f.evaluations, 8);
  EXPECT_EQ(f.members.size(), 4u);
  opt.budget = 3;
  EXPECT_THROW(nsga2(two_parabolas, line_bounds(), opt), ValidationError);
}

TEST(Nsga2, FailingObjectiveReportsCandidate) {
  Nsga2Options opt;
  opt.population = 4;
  opt.budget = 4;
  const auto bad = [](const Eigen::VectorXd&) -> Eigen::VectorXd { return v2(NAN, 0); };
  try {
    nsga2(bad, line_bounds(), opt);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("candidate ["), std::string::npos);
  }
}

TEST(Selection, TieRules) {
  ParetoFront f;
  f.members = {{v2(5, 0), v2(1, 3), 0, 0}, {v2(4, 0), v2(2, 2), 0, 0},
               {v2(3, 0), v2(2, 2), 0, 0}, {v2(0, 0), v2(3, 3), 1, 0}};
  // Sums tie at 4; max objective 2 beats 3; then smaller x wins.
  EXPECT_TRUE(select_candidate(f).x == v2(3, 0));
  f.members.push_back({v2(9, 9), v2(0.5, 3), 0, 0});
  EXPECT_TRUE(select_candidate(f).x == v2(9, 9));
  EXPECT_THROW(select_candidate(ParetoFront{}), ValidationError);
}

TEST(Bounds, DefaultsAndCandidateMapping) {
  EXPECT_EQ(default_bounds(AfferentType::SA).size(), 4);
  EXPECT_EQ(default_bounds(AfferentType::RA).size(), 3);
  for (AfferentType t : kAllAfferents) {
    const auto b = default_bounds(t);
    EXPECT_NO_THROW(b.validate());
    const auto p = AfferentParams::published(t);
    const Eigen::VectorXd x = to_candidate(p);
    EXPECT_TRUE((x.array() >= b.lower.array()).all());
    EXPECT_TRUE((x.array() <= b.upper.array()).all());
    const AfferentParams q = from_candidate(p, x);
    EXPECT_TRUE(to_candidate(q) == x);
    EXPECT_EQ(q.threshold, p.threshold);
  }
}

TEST(Objectives, PerFrequencyMeanSquaredError) {
  const std::vector<ObservedRate> rec = {{20, 10, 5}, {20, 20, 7}, {100, 5, 0}};
  const Eigen::Vector4d o = per_frequency_objectives(rec, {8, 3, 2});
  EXPECT_DOUBLE_EQ(o(0), (9.0 + 16.0) / 2.0);
  EXPECT_DOUBLE_EQ(o(1), 0.0);
  EXPECT_DOUBLE_EQ(o(2), 4.0);
  EXPECT_DOUBLE_EQ(o(3), 0.0);
  EXPECT_THROW(per_frequency_objectives(rec, {1, 2}), ValidationError);
}

TEST(Objectives, SelfConsistentOffsetAndScaling) {
  const auto& bank = sinusoid_banks().at(AfferentType::RA);
  const auto p = AfferentParams::published(AfferentType::RA);
  ObservedRateSet obs = observed_on_bank(p, bank);
  EXPECT_TRUE(objectives(p, bank, obs).isZero(0.0));
  for (auto& r : obs.records) r.rate_ips += 10.0;
  EXPECT_TRUE(objectives(p, bank, obs).isApprox(Eigen::Vector4d::Constant(100.0)));
  for (auto& r : obs.records) r.rate_ips += 20.0;
  EXPECT_TRUE(objectives(p, bank, obs).isApprox(Eigen::Vector4d::Constant(900.0)));
}

TEST(Objectives, MissingConditionNamed) {
  const auto& bank = sinusoid_banks().at(AfferentType::PC);
  ObservedRateSet obs;
  obs.afferent = AfferentType::PC;
  obs.records = {{20.0, 250.0, 10.0}, {50.0, 33.0, 5.0}};
  try {
    objectives(AfferentParams::published(AfferentType::PC), bank, obs);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("50 Hz, 33 um"), std::string::npos);
  }
}

TEST(ObservedCsv, ParsesAndRejects) {
  std::istringstream ok(
      "# rates\nafferent,freq_hz,amplitude_um,rate_ips\nRA,20,250,30\nPC,300,50,120\nRA,50,10,0\n");
  const auto sets = read_observed_csv(ok);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets.at(AfferentType::RA).records.size(), 2u);
  EXPECT_DOUBLE_EQ(sets.at(AfferentType::PC).records[0].rate_ips, 120.0);

  const auto rejects = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(read_observed_csv(in), ValidationError) << text;
  };
  rejects("");
  rejects("# nothing\n");
  rejects("afferent,freq_hz,amplitude_um,rate_ips\n");
  rejects("RA,20,250\n");
  rejects("RA,20,abc,3\n");
  rejects("RA,25,250,3\n");
  rejects("RA,20,250,-1\n");
  rejects("XX,20,250,1\n");
  rejects("RA,20,250,1\nRA,20,250,2\n");
}

TEST(Fitting, RecoversRaRatesFromTwoSeeds) {
  const auto& bank = sinusoid_banks().at(AfferentType::RA);
  const auto truth = AfferentParams::published(AfferentType::RA);
  for (std::uint64_t seed : {1u, 2u}) {
    Nsga2Options opt;
    opt.population = 40;
    opt.budget = 40 * 50;
    opt.seed = seed;
    const FitResult r = recover_parameters(truth, bank, opt);
    EXPECT_LE(r.selected_objectives.sum(), 4.0 * 4.0) << "seed " << seed;
    EXPECT_DOUBLE_EQ(r.selected_objectives.sum(), select_candidate(r.front).objective_sum());
    EXPECT_EQ(r.selected.type, AfferentType::RA);
  }
}

TEST(Fitting, TypeMismatchRejected) {
  const auto& bank = sinusoid_banks().at(AfferentType::RA);
  ObservedRateSet obs = observed_on_bank(AfferentParams::published(AfferentType::RA), bank);
  Nsga2Options opt;
  opt.population = 4;
  opt.budget = 4;
  EXPECT_THROW(fit_afferent(AfferentParams::published(AfferentType::PC), bank, obs,
                            default_bounds(AfferentType::PC), opt),
               ValidationError);
}
