#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "afferentsim/stimulus.hpp"

namespace afferentsim {

using cd = std::complex<double>;

std::vector<Biquad> butterworth_bandpass(int order, double low_hz, double high_hz,
                                         double sample_rate_hz) {
  if (order < 1) throw ValidationError("filter_order", "must be >= 1");
  const double nyquist = 0.5 * sample_rate_hz;
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist)) {
    throw ValidationError("band", "need 0 < low < high < Nyquist");
  }
  const double pi = std::numbers::pi;
  const double fs2 = 2.0 * sample_rate_hz;
  // Prewarped analog band edges (rad/s).
  const double w1 = fs2 * std::tan(pi * low_hz / sample_rate_hz);
  const double w2 = fs2 * std::tan(pi * high_hz / sample_rate_hz);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);

  std::vector<cd> poles;
  for (int k = 1; k <= order; ++k) {
    const cd p = std::polar(1.0, pi * (2.0 * k + order - 1) / (2.0 * order));
    const cd half = p * (0.5 * bw);
    const cd root = std::sqrt(half * half - w0 * w0);
    for (const cd s : {half + root, half - root}) {
      poles.push_back((fs2 + s) / (fs2 - s));
    }
  }
  // One section per conjugate pair; keep the upper-half-plane member.
  std::vector<cd> upper;
  for (const cd& z : poles) {
    if (z.imag() > 0.0) upper.push_back(z);
  }
  if (static_cast<int>(upper.size()) != order) {
    throw NumericalError("band-pass design produced real poles; band too wide");
  }
  std::sort(upper.begin(), upper.end(),
            [](const cd& a, const cd& b) { return std::abs(a) < std::abs(b); });

  std::vector<Biquad> sections;
  for (const cd& z : upper) {
    sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  }
  // Normalize to unit magnitude at the mapped center frequency.
  const double center = 2.0 * std::atan(w0 / fs2);
  const cd e1 = std::polar(1.0, -center);
  const cd e2 = e1 * e1;
  cd h = 1.0;
  for (const Biquad& s : sections) {
    h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
  }
  const double gain = 1.0 / std::abs(h);
  sections.front().b0 *= gain;
  sections.front().b1 *= gain;
  sections.front().b2 *= gain;
  return sections;
}

Signal sos_filter(const std::vector<Biquad>& sections, const Signal& x) {
  Signal y = x;
  for (const Biquad& s : sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y(i);
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y(i) = out;
    }
  }
  return y;
}

Signal sos_filtfilt(const std::vector<Biquad>& sections, const Signal& x) {
  Signal forward = sos_filter(sections, x);
  Signal backward = sos_filter(sections, forward.reverse().eval());
  return backward.reverse();
}

}  // namespace afferentsim
