#include "afferentsim/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace afferentsim {

namespace {

constexpr double kUmToMm = 1e-3;

std::string format_amplitude(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void check_frequency(double f, double dt_ms, const std::string& field) {
  if (!(f > 0.0)) throw ValidationError(field, "frequency must be > 0");
  if (!(f < 500.0 / dt_ms)) {
    throw ValidationError(field, "frequency " + std::to_string(f) + " Hz violates Nyquist");
  }
}

Eigen::Index samples_for(double duration_ms, double dt_ms) {
  if (!(duration_ms > 0.0)) throw ValidationError("duration_ms", "must be > 0");
  if (!(dt_ms > 0.0)) throw ValidationError("dt_ms", "must be > 0");
  return static_cast<Eigen::Index>(std::llround(duration_ms / dt_ms)) + 1;
}

}  // namespace

std::string_view to_string(StimulusKind kind) {
  switch (kind) {
    case StimulusKind::sinusoid: return "sinusoid";
    case StimulusKind::diharmonic: return "diharmonic";
    case StimulusKind::bandpass_noise: return "bandpass_noise";
  }
  return "?";
}

StimulusKind parse_stimulus_kind(std::string_view name) {
  if (name == "sinusoid") return StimulusKind::sinusoid;
  if (name == "diharmonic") return StimulusKind::diharmonic;
  if (name == "bandpass_noise") return StimulusKind::bandpass_noise;
  throw ValidationError("kind", "unknown stimulus kind '" + std::string(name) + "'");
}

int StimulusSpec::num_samples() const { return static_cast<int>(samples_for(duration_ms, dt_ms)); }

double StimulusSpec::lowest_frequency_hz() const {
  if (kind == StimulusKind::bandpass_noise) return low_hz;
  double lowest = components.empty() ? 0.0 : components.front().frequency_hz;
  for (const auto& c : components) lowest = std::min(lowest, c.frequency_hz);
  return lowest;
}

double StimulusSpec::nominal_amplitude_um() const {
  if (kind == StimulusKind::bandpass_noise) return rms_um;
  double amplitude = 0.0;
  for (const auto& c : components) amplitude = std::max(amplitude, c.amplitude_um);
  return amplitude;
}

void StimulusSpec::validate() const {
  samples_for(duration_ms, dt_ms);
  const std::size_t expected = kind == StimulusKind::sinusoid     ? 1
                               : kind == StimulusKind::diharmonic ? 2
                                                                  : 0;
  if (components.size() != expected) {
    throw ValidationError(id + ".components", "expected " + std::to_string(expected) +
                                                  " components for " +
                                                  std::string(to_string(kind)));
  }
  for (std::size_t i = 0; i < components.size(); ++i) {
    const std::string field = id + ".components[" + std::to_string(i) + "]";
    check_frequency(components[i].frequency_hz, dt_ms, field + ".frequency_hz");
    if (!(components[i].amplitude_um >= 0.0)) {
      throw ValidationError(field + ".amplitude_um", "must be >= 0");
    }
  }
  if (kind == StimulusKind::bandpass_noise) {
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist_hz())) {
      throw ValidationError(id + ".band", "need 0 < low_hz < high_hz < Nyquist");
    }
    if (!(rms_um >= 0.0)) throw ValidationError(id + ".rms_um", "must be >= 0");
    if (filter_order < 1) throw ValidationError(id + ".filter_order", "must be >= 1");
  }
}

Signal sinusoid(double frequency_hz, double amplitude_um, double duration_ms, double dt_ms) {
  const Eigen::Index n = samples_for(duration_ms, dt_ms);
  check_frequency(frequency_hz, dt_ms, "frequency_hz");
  if (!(amplitude_um >= 0.0)) throw ValidationError("amplitude_um", "must be >= 0");
  Signal s(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // Whole cycles are removed first so periodic samples repeat bit for bit.
    const double cycles = std::fmod(frequency_hz * static_cast<double>(k) * dt_ms, 1000.0) * 1e-3;
    s(k) = amplitude_um * kUmToMm * std::sin(2.0 * std::numbers::pi * cycles);
  }
  return s;
}

Signal diharmonic(double f1_hz, double a1_um, double f2_hz, double a2_um, double duration_ms,
                  double dt_ms) {
  return sinusoid(f1_hz, a1_um, duration_ms, dt_ms) + sinusoid(f2_hz, a2_um, duration_ms, dt_ms);
}

Signal bandpass_noise(double low_hz, double high_hz, double rms_um, double duration_ms,
                      double dt_ms, std::uint64_t seed, int filter_order) {
  const Eigen::Index n = samples_for(duration_ms, dt_ms);
  const double sample_rate = 1000.0 / dt_ms;
  const auto sections = butterworth_bandpass(filter_order, low_hz, high_hz, sample_rate);
  if (!(rms_um >= 0.0)) throw ValidationError("rms_um", "must be >= 0");

  // Generate extra samples on both sides so the filter transients fall
  // outside the returned segment.
  const auto pad = static_cast<Eigen::Index>(std::ceil(3.0 * sample_rate / low_hz));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Signal raw(n + 2 * pad);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) = normal(rng);

  Signal y = sos_filtfilt(sections, raw).segment(pad, n);
  y -= y.mean();
  const double rms = std::sqrt(y.square().mean());
  if (rms_um == 0.0 || !(rms > 0.0)) return Signal::Zero(n);
  return y * (rms_um * kUmToMm / rms);
}

Signal generate(const StimulusSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case StimulusKind::sinusoid:
      return sinusoid(spec.components[0].frequency_hz, spec.components[0].amplitude_um,
                      spec.duration_ms, spec.dt_ms);
    case StimulusKind::diharmonic:
      return diharmonic(spec.components[0].frequency_hz, spec.components[0].amplitude_um,
                        spec.components[1].frequency_hz, spec.components[1].amplitude_um,
                        spec.duration_ms, spec.dt_ms);
    case StimulusKind::bandpass_noise:
      return bandpass_noise(spec.low_hz, spec.high_hz, spec.rms_um, spec.duration_ms, spec.dt_ms,
                            spec.seed, spec.filter_order);
  }
  throw ValidationError("kind", "unhandled stimulus kind");
}

double protocol_duration_ms(double lowest_frequency_hz) {
  // 100 ms discard + 245 ms window below 50 Hz, + 100 ms window otherwise;
  // never shorter than the 250 ms vibration.
  return lowest_frequency_hz < 50.0 ? 345.0 : 250.0;
}

std::vector<StimulusSpec> sinusoid_protocol() {
  const std::vector<std::pair<double, std::vector<double>>> table = {
      {20.0, {6.71, 9.32, 12.50, 18.00, 25.00, 34.74, 48.27, 67.07, 93.19, 129.49, 179.92, 250.00}},
      {50.0, {7.19, 10.66, 15.81, 23.46, 34.80, 51.62, 76.58, 113.60, 168.52, 250.00}},
      {100.0, {6.52, 10.00, 15.34, 23.54, 36.11, 55.39, 85.98, 130.37, 200.00}},
      {300.0, {4.59, 7.41, 11.94, 19.24, 31.02, 50.00}},
  };
  std::vector<StimulusSpec> out;
  for (const auto& [f, amplitudes] : table) {
    for (double a : amplitudes) {
      StimulusSpec s;
      s.id = "sin_" + std::to_string(static_cast<int>(f)) + "hz_" + format_amplitude(a) + "um";
      s.kind = StimulusKind::sinusoid;
      s.components = {{f, a}};
      s.duration_ms = protocol_duration_ms(f);
      out.push_back(s);
    }
  }
  return out;
}

std::vector<StimulusSpec> diharmonic_protocol() {
  const std::vector<double> first = {2.00, 5.62, 15.81, 44.46, 125.00};
  struct Pair {
    double f1, f2;
    std::vector<double> second;
  };
  const std::vector<Pair> table = {
      {10.0, 50.0, {2.00, 5.62, 15.81, 44.46, 125.00}},
      {10.0, 100.0, {2.00, 5.32, 14.14, 37.61, 100.00}},
      {50.0, 250.0, {1.00, 2.48, 6.12, 15.15, 37.50}},
      {50.0, 500.0, {0.25, 0.74, 2.17, 6.37, 18.75}},
  };
  std::vector<StimulusSpec> out;
  for (const Pair& p : table) {
    for (std::size_t i = 0; i < first.size(); ++i) {
      StimulusSpec s;
      s.id = "dih_" + std::to_string(static_cast<int>(p.f1)) + "+" +
             std::to_string(static_cast<int>(p.f2)) + "hz_" + format_amplitude(first[i]) + "+" +
             format_amplitude(p.second[i]) + "um";
      s.kind = StimulusKind::diharmonic;
      s.components = {{p.f1, first[i]}, {p.f2, p.second[i]}};
      s.duration_ms = protocol_duration_ms(p.f1);
      out.push_back(s);
    }
  }
  return out;
}

std::vector<StimulusSpec> noise_protocol() {
  struct Band {
    double low, high;
    std::vector<double> rms;
  };
  const std::vector<Band> table = {
      {5.0, 25.0, {0.50, 1.00, 5.00, 10.00, 50.00}},
      {5.0, 100.0, {0.50, 1.00, 5.00, 10.00, 50.00}},
      {25.0, 250.0, {0.25, 1.00, 5.00, 10.00, 20.00}},
      {25.0, 500.0, {0.25, 1.00, 5.00, 10.00, 20.00}},
      {50.0, 500.0, {0.13, 0.50, 1.00, 5.00, 10.00}},
  };
  std::vector<StimulusSpec> out;
  for (std::size_t b = 0; b < table.size(); ++b) {
    for (std::size_t i = 0; i < table[b].rms.size(); ++i) {
      StimulusSpec s;
      s.id = "noise_" + std::to_string(static_cast<int>(table[b].low)) + "-" +
             std::to_string(static_cast<int>(table[b].high)) + "hz_" +
             format_amplitude(table[b].rms[i]) + "um";
      s.kind = StimulusKind::bandpass_noise;
      s.low_hz = table[b].low;
      s.high_hz = table[b].high;
      s.rms_um = table[b].rms[i];
      s.seed = 100 * (b + 1) + i + 1;
      s.duration_ms = protocol_duration_ms(table[b].low);
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace afferentsim
