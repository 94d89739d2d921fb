#include "afferentsim/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

namespace afferentsim {

AnalysisWindow analysis_window(double lowest_frequency_hz) {
  return {100.0, lowest_frequency_hz < 50.0 ? 245.0 : 100.0};
}

double firing_rate(const SpikeTrain& train, double discard_ms, double window_ms) {
  if (!(discard_ms >= 0.0)) throw ValidationError("discard_ms", "must be >= 0");
  if (!(window_ms > 0.0)) throw ValidationError("window_ms", "must be > 0");
  const double end = discard_ms + window_ms;
  const double tolerance = 1e-9 * std::max(1.0, end);
  if (end > train.duration_ms() + tolerance) {
    throw ValidationError("window_ms", "analysis window ends at " + std::to_string(end) +
                                           " ms but the run lasts " +
                                           std::to_string(train.duration_ms()) + " ms");
  }
  const auto& t = train.spike_times_ms;
  const auto first = std::lower_bound(t.begin(), t.end(), discard_ms);
  const auto last = std::lower_bound(t.begin(), t.end(), end);
  return static_cast<double>(last - first) * 1000.0 / window_ms;
}

bool at_quantization_floor(double rate_ips, double window_ms) {
  const double floor = 1000.0 / window_ms;
  return rate_ips > 0.0 && std::abs(rate_ips - floor) <= 1e-9 * floor;
}

RegressionReport regression(const std::vector<double>& observed,
                            const std::vector<double>& predicted) {
  if (observed.size() != predicted.size()) {
    throw ValidationError("regression", "observed and predicted differ in length");
  }
  const auto n = static_cast<int>(observed.size());
  if (n < 3) throw ValidationError("regression", "need at least 3 pairs");
  const Eigen::Map<const Eigen::ArrayXd> x(observed.data(), n);
  const Eigen::Map<const Eigen::ArrayXd> y(predicted.data(), n);
  const Eigen::ArrayXd dx = x - x.mean();
  const Eigen::ArrayXd dy = y - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  const double sxy = (dx * dy).sum();
  if (!(sxx > 0.0)) throw ValidationError("regression", "observed values are all equal");

  RegressionReport r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = y.mean() - r.slope * x.mean();
  r.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  const double sse = std::max(0.0, syy - r.slope * sxy);
  const double dof = n - 2;
  const double se = std::sqrt(sse / dof / sxx);
  if (se == 0.0) {
    r.p_value = r.slope != 0.0 ? 0.0 : 1.0;
  } else {
    const double t = std::abs(r.slope / se);
    const boost::math::students_t dist(dof);
    r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
  }
  return r;
}

std::vector<RasterRow> raster(const std::vector<SpikeTrain>& trains) {
  std::vector<RasterRow> rows;
  for (std::size_t i = 0; i < trains.size(); ++i) {
    for (double t : trains[i].spike_times_ms) rows.push_back({static_cast<int>(i), t});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RasterRow& a, const RasterRow& b) {
    return a.trial != b.trial ? a.trial < b.trial : a.t_ms < b.t_ms;
  });
  return rows;
}

}  // namespace afferentsim
