#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "afferentsim/analysis.hpp"
#include "afferentsim/stimulus.hpp"

using namespace afferentsim;

namespace {

SpikeTrain train_with(std::vector<double> spikes, double duration_ms, double dt = 0.5) {
  SpikeTrain s;
  s.dt_ms = dt;
  s.spike_times_ms = std::move(spikes);
  s.membrane_mv = Signal::Constant(static_cast<Eigen::Index>(std::lround(duration_ms / dt)) + 1, -65.0);
  return s;
}

// Two-sided tail of Student's t by Simpson's rule on the density.
double t_tail_two_sided(double t, double dof) {
  const double c = std::exp(std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2)) /
                   std::sqrt(dof * std::numbers::pi);
  const auto pdf = [&](double x) { return c * std::pow(1.0 + x * x / dof, -(dof + 1) / 2); };
  const int n = 200000;
  const double a = 0.0, b = std::abs(t);
  const double h = (b - a) / n;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(a + i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

}  // namespace

TEST(Window, ChoiceByFrequency) {
  EXPECT_DOUBLE_EQ(analysis_window(20.0).window_ms, 245.0);
  EXPECT_DOUBLE_EQ(analysis_window(49.9).window_ms, 245.0);
  EXPECT_DOUBLE_EQ(analysis_window(50.0).window_ms, 100.0);
  EXPECT_DOUBLE_EQ(analysis_window(300.0).discard_ms, 100.0);
  EXPECT_DOUBLE_EQ(protocol_duration_ms(20.0), 345.0);
  EXPECT_DOUBLE_EQ(protocol_duration_ms(100.0), 250.0);
}

TEST(FiringRate, CountsHalfOpenWindow) {
  std::vector<double> spikes;
  for (int i = 0; i < 10; ++i) spikes.push_back(100.0 + 10.0 * i);
  const SpikeTrain s = train_with(spikes, 250.0);
  EXPECT_DOUBLE_EQ(firing_rate(s, 100.0, 100.0), 100.0);
  // 100 is in [100, 200); 200 is not.
  const SpikeTrain edge = train_with({99.5, 100.0, 199.5, 200.0}, 250.0);
  EXPECT_DOUBLE_EQ(firing_rate(edge, 100.0, 100.0), 20.0);
  EXPECT_DOUBLE_EQ(firing_rate(train_with({}, 250.0), 100.0, 100.0), 0.0);
}

TEST(FiringRate, WindowPastEndRejected) {
  const SpikeTrain s = train_with({}, 250.0);
  EXPECT_NO_THROW(firing_rate(s, 100.0, 150.0));
  EXPECT_THROW(firing_rate(s, 100.0, 151.0), ValidationError);
  EXPECT_THROW(firing_rate(s, -1.0, 10.0), ValidationError);
  EXPECT_THROW(firing_rate(s, 0.0, 0.0), ValidationError);
}

TEST(FiringRate, ShiftInvariantInsideWindow) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(110.0, 180.0);
  std::vector<double> a(12);
  for (double& t : a) t = u(rng);
  std::sort(a.begin(), a.end());
  std::vector<double> b = a;
  for (double& t : b) t += 7.0;
  EXPECT_DOUBLE_EQ(firing_rate(train_with(a, 250.0), 100.0, 100.0),
                   firing_rate(train_with(b, 250.0), 100.0, 100.0));
}

TEST(FiringRate, QuantizationFloor) {
  EXPECT_TRUE(at_quantization_floor(10.0, 100.0));
  EXPECT_TRUE(at_quantization_floor(1000.0 / 245.0, 245.0));
  EXPECT_FALSE(at_quantization_floor(0.0, 100.0));
  EXPECT_FALSE(at_quantization_floor(20.0, 100.0));
}

TEST(Regression, IdentityAndAffine) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const RegressionReport id = regression(x, x);
  EXPECT_NEAR(id.slope, 1.0, 1e-12);
  EXPECT_NEAR(id.intercept, 0.0, 1e-12);
  EXPECT_NEAR(id.r_squared, 1.0, 1e-12);
  EXPECT_LT(id.p_value, 1e-9);
  EXPECT_EQ(id.n, 5);

  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v + 3.0);
  const RegressionReport r = regression(x, y);
  EXPECT_NEAR(r.slope, 2.0, 1e-12);
  EXPECT_NEAR(r.intercept, 3.0, 1e-12);
}

TEST(Regression, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 4.0);
  std::uniform_real_distribution<double> obs(0.0, 120.0);
  std::vector<double> x(20), y(20);
  for (int i = 0; i < 20; ++i) {
    x[i] = obs(rng);
    y[i] = 0.8 * x[i] + 5.0 + noise(rng);
  }
  long double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < 20; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
    syy += static_cast<long double>(y[i]) * y[i];
  }
  const long double n = 20;
  const long double det = n * sxx - sx * sx;
  const long double slope = (n * sxy - sx * sy) / det;
  const long double intercept = (sy * sxx - sx * sxy) / det;
  long double sse = 0, sst = 0;
  for (int i = 0; i < 20; ++i) {
    const long double e = y[i] - (intercept + slope * x[i]);
    const long double d = y[i] - sy / n;
    sse += e * e;
    sst += d * d;
  }
  const RegressionReport r = regression(x, y);
  EXPECT_NEAR(r.slope, static_cast<double>(slope), 1e-9);
  EXPECT_NEAR(r.intercept, static_cast<double>(intercept), 1e-9);
  EXPECT_NEAR(r.r_squared, static_cast<double>(1.0L - sse / sst), 1e-9);

  const long double se = std::sqrt(sse / (n - 2) / (sxx - sx * sx / n));
  const double t = static_cast<double>(slope / se);
  EXPECT_NEAR(r.p_value, t_tail_two_sided(t, 18.0), 1e-9);
}

TEST(Regression, PValueOfWeakFit) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const std::vector<double> y = {2.0, 1.0, 4.0, 3.0, 2.5, 4.5};
  const RegressionReport r = regression(x, y);
  const double sxx = 17.5;
  double sse = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    sse += e * e;
  }
  const double t = r.slope / std::sqrt(sse / 4.0 / sxx);
  EXPECT_GT(r.p_value, 0.01);
  EXPECT_NEAR(r.p_value, t_tail_two_sided(t, 4.0), 1e-9);
}

TEST(Regression, DegenerateInputRejected) {
  EXPECT_THROW(regression({1, 2}, {1, 2}), ValidationError);
  EXPECT_THROW(regression({1, 2, 3}, {1, 2}), ValidationError);
  EXPECT_THROW(regression({4, 4, 4}, {1, 2, 3}), ValidationError);
}

TEST(Regression, RSquaredInvariantUnderAffineMaps) {
  const std::vector<double> x = {3, 8, 1, 9, 4, 7};
  const std::vector<double> y = {2, 9, 2, 7, 5, 6};
  const double base = regression(x, y).r_squared;
  std::vector<double> x2, y2;
  for (double v : x) x2.push_back(-3.0 * v + 11.0);
  for (double v : y) y2.push_back(0.25 * v - 4.0);
  EXPECT_NEAR(regression(x2, y2).r_squared, base, 1e-12);
}

TEST(Raster, OrderedByTrialThenTime) {
  EXPECT_TRUE(raster({}).empty());
  const std::vector<SpikeTrain> trains = {train_with({5.0, 1.0}, 10.0), train_with({}, 10.0),
                                          train_with({2.0}, 10.0)};
  const auto rows = raster(trains);
  const std::vector<RasterRow> expected = {{0, 1.0}, {0, 5.0}, {2, 2.0}};
  EXPECT_EQ(rows, expected);
}

TEST(Raster, IdenticalRepeatsGiveIdenticalRows) {
  const SpikeTrain s = train_with({1.5, 7.0, 9.5}, 10.0);
  const auto rows = raster({s, s, s});
  ASSERT_EQ(rows.size(), 9u);
  for (int trial = 1; trial < 3; ++trial) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(rows[trial * 3 + k].t_ms, rows[k].t_ms);
  }
}
