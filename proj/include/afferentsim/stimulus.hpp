#ifndef AFFERENTSIM_STIMULUS_HPP
#define AFFERENTSIM_STIMULUS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "afferentsim/types.hpp"

namespace afferentsim {

enum class StimulusKind { sinusoid, diharmonic, bandpass_noise };

std::string_view to_string(StimulusKind kind);
StimulusKind parse_stimulus_kind(std::string_view name);

struct SineComponent {
  double frequency_hz = 0.0;
  double amplitude_um = 0.0;
};

/// One indenter displacement protocol entry. Displacement is positive into
/// the skin; all traces start at phase zero.
struct StimulusSpec {
  std::string id;
  StimulusKind kind = StimulusKind::sinusoid;
  double duration_ms = 250.0;
  double dt_ms = kDefaultDtMs;
  /// One component for a sinusoid, two for a diharmonic.
  std::vector<SineComponent> components;
  // Band-pass noise only.
  double low_hz = 0.0;
  double high_hz = 0.0;
  double rms_um = 0.0;
  std::uint64_t seed = 0;
  int filter_order = 4;

  double nyquist_hz() const { return 500.0 / dt_ms; }
  int num_samples() const;
  /// Lowest frequency present in the stimulus.
  double lowest_frequency_hz() const;
  /// Amplitude used when plotting rate against stimulus intensity: the
  /// sinusoid amplitude, the larger diharmonic component, or the noise RMS.
  double nominal_amplitude_um() const;
  void validate() const;
};

/// A * sin(2 pi f k dt) in mm, duration / dt + 1 samples.
Signal sinusoid(double frequency_hz, double amplitude_um, double duration_ms,
                double dt_ms = kDefaultDtMs);

Signal diharmonic(double f1_hz, double a1_um, double f2_hz, double a2_um, double duration_ms,
                  double dt_ms = kDefaultDtMs);

/// Seeded Gaussian noise, zero-phase Butterworth band-pass (forward and
/// backward), mean removed, scaled to the exact sample RMS. Returns mm.
Signal bandpass_noise(double low_hz, double high_hz, double rms_um, double duration_ms,
                      double dt_ms, std::uint64_t seed, int filter_order = 4);

Signal generate(const StimulusSpec& spec);

/// Sinusoidal protocol: 12 + 10 + 9 + 6 conditions at 20/50/100/300 Hz.
std::vector<StimulusSpec> sinusoid_protocol();
/// Diharmonic protocol: four frequency pairs, five amplitude steps each.
std::vector<StimulusSpec> diharmonic_protocol();
/// Band-pass noise protocol: five bands, five RMS levels each.
std::vector<StimulusSpec> noise_protocol();

/// Stimulus length needed to cover the transient discard plus the analysis
/// window for this kind of stimulus.
double protocol_duration_ms(double lowest_frequency_hz);

// Biquad cascade used by the noise generator.
struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 == 1
};

/// Digital Butterworth band-pass of analog prototype order `order`
/// (2 * order poles, `order` sections), unit gain at the band center.
std::vector<Biquad> butterworth_bandpass(int order, double low_hz, double high_hz,
                                         double sample_rate_hz);

Signal sos_filter(const std::vector<Biquad>& sections, const Signal& x);
/// Forward then backward pass; zero phase, squared magnitude response.
Signal sos_filtfilt(const std::vector<Biquad>& sections, const Signal& x);

}  // namespace afferentsim

#endif  // AFFERENTSIM_STIMULUS_HPP
