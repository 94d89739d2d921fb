#ifndef AFFERENTSIM_ANALYSIS_HPP
#define AFFERENTSIM_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "afferentsim/neural.hpp"

namespace afferentsim {

/// Transient discard followed by a counting window, both in ms.
struct AnalysisWindow {
  double discard_ms = 100.0;
  double window_ms = 100.0;
};

/// 100 ms discard, then 245 ms below 50 Hz and 100 ms otherwise.
AnalysisWindow analysis_window(double lowest_frequency_hz);

/// Spikes in [discard, discard + window) per second.
double firing_rate(const SpikeTrain& train, double discard_ms, double window_ms);
inline double firing_rate(const SpikeTrain& train, const AnalysisWindow& w) {
  return firing_rate(train, w.discard_ms, w.window_ms);
}

/// True for a nonzero rate equal to a single spike in the window, the
/// smallest rate the window can resolve.
bool at_quantization_floor(double rate_ips, double window_ms);

struct RateRecord {
  AfferentType afferent = AfferentType::SA;
  std::string stimulus_id;
  double frequency_hz = 0.0;
  double amplitude_um = 0.0;
  double predicted_ips = 0.0;
  std::optional<double> observed_ips;
};

struct RegressionReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double p_value = 1.0;
  int n = 0;
};

/// Ordinary least squares of predicted on observed with a two-sided t-test
/// on the slope.
RegressionReport regression(const std::vector<double>& observed,
                            const std::vector<double>& predicted);

struct RasterRow {
  int trial = 0;
  double t_ms = 0.0;

  bool operator==(const RasterRow&) const = default;
};

/// (trial, spike time) rows ordered by trial, then time.
std::vector<RasterRow> raster(const std::vector<SpikeTrain>& trains);

}  // namespace afferentsim

#endif  // AFFERENTSIM_ANALYSIS_HPP
