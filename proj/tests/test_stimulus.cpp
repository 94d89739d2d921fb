#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <sstream>

#include "afferentsim/stimulus.hpp"
#include "afferentsim/trace_io.hpp"

using namespace afferentsim;

namespace {

// Fraction of periodogram power in [lo, hi] Hz by direct DFT.
double in_band_fraction(const Signal& x, double dt_ms, double lo, double hi) {
  const Eigen::Index n = x.size();
  std::vector<std::complex<double>> twiddle(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) / n);
  }
  const double df = 1000.0 / (dt_ms * n);
  double total = 0.0, inside = 0.0;
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += x(i) * twiddle[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    const double p = std::norm(acc);
    total += p;
    const double f = k * df;
    if (f >= lo && f <= hi) inside += p;
  }
  return inside / total;
}

double rms(const Signal& x) { return std::sqrt(x.square().mean()); }

}  // namespace

TEST(Sinusoid, PeakAndPhase) {
  const Signal s = sinusoid(20.0, 250.0, 250.0);
  EXPECT_EQ(s.size(), 501);
  EXPECT_EQ(s(0), 0.0);
  EXPECT_NEAR(s.abs().maxCoeff(), 0.25, 1e-12);
  // Quarter period at 20 Hz is 12.5 ms = 25 steps.
  EXPECT_NEAR(s(25), 0.25, 1e-15);
}

TEST(Sinusoid, ZeroAmplitudeIsZero) {
  EXPECT_EQ(sinusoid(50.0, 0.0, 100.0).abs().maxCoeff(), 0.0);
}

TEST(Sinusoid, ExactlyPeriodic) {
  const Signal s = sinusoid(100.0, 37.0, 250.0);
  for (Eigen::Index k = 0; k + 20 < s.size(); ++k) EXPECT_EQ(s(k + 20), s(k));
}

TEST(Sinusoid, NyquistViolationRejected) {
  EXPECT_THROW(sinusoid(1000.0, 1.0, 10.0), ValidationError);
  EXPECT_THROW(sinusoid(1200.0, 1.0, 10.0), ValidationError);
  EXPECT_NO_THROW(sinusoid(999.0, 1.0, 10.0));
}

TEST(Diharmonic, PeakBoundedBySumOfAmplitudes) {
  const Signal s = diharmonic(10.0, 125.0, 50.0, 125.0, 345.0);
  EXPECT_LE(s.abs().maxCoeff(), 0.25 + 1e-15);
}

TEST(Diharmonic, DegenerateAndLinear) {
  EXPECT_TRUE((diharmonic(10.0, 44.46, 100.0, 0.0, 300.0) == sinusoid(10.0, 44.46, 300.0)).all());
  const Signal d = diharmonic(50.0, 15.81, 250.0, 6.12, 250.0);
  const Signal rest = d - sinusoid(50.0, 15.81, 250.0);
  EXPECT_LT((rest - sinusoid(250.0, 6.12, 250.0)).abs().maxCoeff(), 1e-15);
  EXPECT_THROW(diharmonic(10.0, 1.0, 1000.0, 1.0, 100.0), ValidationError);
}

TEST(Noise, RmsExactAndDeterministic) {
  const Signal a = bandpass_noise(5.0, 25.0, 10.0, 345.0, 0.5, 42);
  const Signal b = bandpass_noise(5.0, 25.0, 10.0, 345.0, 0.5, 42);
  const Signal c = bandpass_noise(5.0, 25.0, 10.0, 345.0, 0.5, 43);
  EXPECT_EQ(a.size(), 691);
  EXPECT_NEAR(rms(a), 10e-3, 1e-9 * 10e-3);
  EXPECT_NEAR(a.mean(), 0.0, 1e-15);
  EXPECT_TRUE((a == b).all());
  EXPECT_FALSE((a == c).all());
}

TEST(Noise, PowerInsideBand) {
  const Signal x = bandpass_noise(25.0, 250.0, 10.0, 4000.0, 0.5, 7);
  EXPECT_GE(in_band_fraction(x, 0.5, 25.0, 250.0), 0.9);
}

TEST(Noise, InvalidBandRejected) {
  EXPECT_THROW(bandpass_noise(250.0, 25.0, 1.0, 100.0, 0.5, 1), ValidationError);
  EXPECT_THROW(bandpass_noise(25.0, 1000.0, 1.0, 100.0, 0.5, 1), ValidationError);
  EXPECT_THROW(bandpass_noise(0.0, 100.0, 1.0, 100.0, 0.5, 1), ValidationError);
}

TEST(Butterworth, UnitGainInBandAndZeroAtDc) {
  const auto sos = butterworth_bandpass(4, 25.0, 250.0, 2000.0);
  ASSERT_EQ(sos.size(), 4u);
  const auto gain = [&](double f) {
    const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f / 2000.0);
    std::complex<double> h = 1.0;
    for (const Biquad& s : sos) {
      h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
    }
    return std::abs(h);
  };
  const double t1 = std::tan(std::numbers::pi * 25.0 / 2000.0);
  const double t2 = std::tan(std::numbers::pi * 250.0 / 2000.0);
  EXPECT_NEAR(gain(2000.0 / std::numbers::pi * std::atan(std::sqrt(t1 * t2))), 1.0, 1e-9);
  EXPECT_NEAR(gain(25.0), std::sqrt(0.5), 1e-6);
  EXPECT_NEAR(gain(250.0), std::sqrt(0.5), 1e-6);
  // Bilinear image of the analog prototype, evaluated in prewarped frequency.
  for (double f : {1.0, 10.0, 60.0, 400.0, 900.0}) {
    const double w = std::tan(std::numbers::pi * f / 2000.0);
    const double x = (w * w - t1 * t2) / ((t2 - t1) * w);
    EXPECT_NEAR(gain(f), 1.0 / std::sqrt(1.0 + std::pow(x, 8)), 1e-9) << f;
  }
}

TEST(Protocols, SinusoidTableHas37Conditions) {
  const auto specs = sinusoid_protocol();
  ASSERT_EQ(specs.size(), 37u);
  std::map<double, int> per_freq;
  for (const auto& s : specs) per_freq[s.components[0].frequency_hz]++;
  EXPECT_EQ(per_freq[20.0], 12);
  EXPECT_EQ(per_freq[50.0], 10);
  EXPECT_EQ(per_freq[100.0], 9);
  EXPECT_EQ(per_freq[300.0], 6);
  EXPECT_EQ(specs.front().id, "sin_20hz_6.71um");
  EXPECT_DOUBLE_EQ(specs[11].components[0].amplitude_um, 250.0);
  EXPECT_DOUBLE_EQ(specs.back().components[0].amplitude_um, 50.0);
  EXPECT_DOUBLE_EQ(specs.front().duration_ms, 345.0);
  EXPECT_DOUBLE_EQ(specs.back().duration_ms, 250.0);
}

TEST(Protocols, DiharmonicAndNoiseTables) {
  const auto dih = diharmonic_protocol();
  ASSERT_EQ(dih.size(), 20u);
  EXPECT_DOUBLE_EQ(dih[4].components[0].amplitude_um, 125.0);
  EXPECT_DOUBLE_EQ(dih[4].components[1].amplitude_um, 125.0);
  EXPECT_DOUBLE_EQ(dih[19].components[1].frequency_hz, 500.0);
  EXPECT_DOUBLE_EQ(dih[19].components[1].amplitude_um, 18.75);
  EXPECT_DOUBLE_EQ(dih[4].nominal_amplitude_um(), 125.0);

  const auto noise = noise_protocol();
  ASSERT_EQ(noise.size(), 25u);
  std::set<std::uint64_t> seeds;
  for (const auto& s : noise) {
    seeds.insert(s.seed);
    EXPECT_NO_THROW(s.validate());
  }
  EXPECT_EQ(seeds.size(), 25u);
  EXPECT_DOUBLE_EQ(noise[20].rms_um, 0.13);
  EXPECT_DOUBLE_EQ(noise[20].low_hz, 50.0);
}

TEST(Protocols, RoundTripThroughJson) {
  auto specs = sinusoid_protocol();
  const auto more = noise_protocol();
  specs.insert(specs.end(), more.begin(), more.end());
  std::stringstream buf;
  write_protocol(buf, specs);
  const auto back = read_protocol(buf);
  ASSERT_EQ(back.size(), specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    EXPECT_EQ(back[i].id, specs[i].id);
    EXPECT_TRUE((generate(back[i]) == generate(specs[i])).all()) << specs[i].id;
  }
}

TEST(Protocols, SpecValidation) {
  StimulusSpec s;
  s.id = "x";
  EXPECT_THROW(s.validate(), ValidationError);  // no components
  s.components = {{20.0, -1.0}};
  EXPECT_THROW(s.validate(), ValidationError);
  s.components = {{20.0, 1.0}};
  s.duration_ms = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
}
