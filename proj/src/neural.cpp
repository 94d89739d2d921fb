#include "afferentsim/neural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace afferentsim {

AfferentParams AfferentParams::published(AfferentType type) {
  AfferentParams p;
  p.type = type;
  switch (type) {
    case AfferentType::SA:
      p.tau_m = 32.14;
      p.a1 = 1926.32;
      p.a2 = 9850.98;
      p.alpha_prime = 1.79;
      p.threshold = -50.0;
      p.tau_r = 1.0;
      break;
    case AfferentType::RA:
      p.tau_m = 456.70;
      p.a3 = 17191.87;
      p.alpha_prime = 10.23;
      p.threshold = -55.0;
      p.tau_r = 0.5;
      break;
    case AfferentType::PC:
      p.tau_m = 639.85;
      p.a4 = 16.34;
      p.alpha_prime = 4.14;
      p.threshold = -55.0;
      p.tau_r = 0.5;
      break;
  }
  return p;
}

void AfferentParams::validate() const {
  const std::string prefix = "params." + std::string(to_string(type)) + ".";
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(prefix + name, "must be > 0");
  };
  positive(tau_m, "tau_m");
  positive(alpha_prime, "alpha_prime");
  switch (type) {
    case AfferentType::SA:
      positive(a1, "a1");
      positive(a2, "a2");
      break;
    case AfferentType::RA: positive(a3, "a3"); break;
    case AfferentType::PC: positive(a4, "a4"); break;
  }
  if (!(tau_r >= 0.0)) throw ValidationError(prefix + "tau_r", "must be >= 0");
  if (!(u_reset <= u_rest && u_rest < threshold)) {
    throw ValidationError(prefix + "threshold", "need u_reset <= u_rest < threshold");
  }
  if (m1 < 0 || m2 < 0 || m3 < 0 || m4 < 0) {
    throw ValidationError(prefix + "m", "filter widths must be >= 0");
  }
}

Signal derivative(const Signal& x, double dt_ms) {
  if (x.size() < 2) throw ValidationError("trace", "derivative needs at least 2 samples");
  if (!(dt_ms > 0.0)) throw ValidationError("dt_ms", "must be > 0");
  const Eigen::Index n = x.size();
  Signal d(n);
  d(0) = 0.0;
  d.tail(n - 1) = (x.tail(n - 1) - x.head(n - 1)) / dt_ms;
  return d;
}

Signal moving_average_abs(const Signal& x, int m_before, int m_after) {
  if (m_before < 0 || m_after < 0) throw ValidationError("window", "widths must be >= 0");
  const Eigen::Index n = x.size();
  const Signal a = x.abs();
  // Prefix sums keep this linear in the trace length.
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + a(i);
  const double scale = 1.0 / static_cast<double>(m_before + m_after + 1);
  Signal y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - m_after);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + m_before);
    y(t) = lo <= hi ? (prefix[hi + 1] - prefix[lo]) * scale : 0.0;
  }
  return y;
}

Signal abs_difference_filter(const Signal& x) {
  if (x.size() < 2) throw ValidationError("trace", "difference filter needs at least 2 samples");
  const Eigen::Index n = x.size();
  Signal y(n);
  y(0) = 0.0;
  y.tail(n - 1) = (x.tail(n - 1) - x.head(n - 1)).abs();
  return y;
}

FilteredStress filter_stress(const Signal& stress_pa, double dt_ms, const AfferentParams& params) {
  FilteredStress out;
  out.type = params.type;
  out.dt_ms = dt_ms;
  const Signal rate = derivative(stress_pa, dt_ms);
  switch (params.type) {
    case AfferentType::SA:
      out.channels.push_back(moving_average_abs(stress_pa, params.m1, params.m2));
      out.channels.push_back(moving_average_abs(rate, params.m3, params.m4));
      break;
    case AfferentType::RA:
      out.channels.push_back(abs_difference_filter(rate));
      break;
    case AfferentType::PC:
      out.channels.push_back(abs_difference_filter(derivative(rate, dt_ms)));
      break;
  }
  return out;
}

DriveTrace stress_to_drive(const FilteredStress& inputs, const AfferentParams& params) {
  if (inputs.type != params.type) {
    throw ValidationError("params.type", "filtered inputs are " +
                                             std::string(to_string(inputs.type)) +
                                             " but params are " +
                                             std::string(to_string(params.type)));
  }
  std::vector<double> half;
  switch (params.type) {
    case AfferentType::SA: half = {params.a1, params.a2}; break;
    case AfferentType::RA: half = {params.a3}; break;
    case AfferentType::PC: half = {params.a4}; break;
  }
  if (inputs.channels.size() != half.size()) {
    throw ValidationError("inputs", "wrong number of filtered channels");
  }
  DriveTrace drive;
  drive.dt_ms = inputs.dt_ms;
  drive.values = Signal::Zero(inputs.channels.front().size());
  for (std::size_t i = 0; i < half.size(); ++i) {
    const Signal x = inputs.channels[i].abs();
    drive.values += x / (half[i] + x);
  }
  drive.values *= params.alpha_prime;
  return drive;
}

SpikeTrain simulate_lif(const DriveTrace& drive, const AfferentParams& params,
                        Integrator integrator) {
  const double dt = drive.dt_ms;
  if (!(dt > 0.0)) throw ValidationError("dt_ms", "must be > 0");
  if (!drive.values.allFinite()) throw NumericalError("non-finite membrane drive");
  const Eigen::Index n = drive.values.size();
  const double tau = params.tau_m;
  const double decay = std::exp(-dt / tau);
  const auto refractory_steps = static_cast<int>(std::ceil(params.tau_r / dt - 1e-12));

  SpikeTrain train;
  train.dt_ms = dt;
  train.membrane_mv.resize(n);
  if (n == 0) return train;
  double u = params.u_rest;
  train.membrane_mv(0) = u;
  int refractory = 0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double d = refractory > 0 ? 0.0 : drive.values(k);
    if (refractory > 0) --refractory;
    if (integrator == Integrator::euler) {
      u += dt * (-(u - params.u_rest) / tau + d);
    } else {
      const double target = params.u_rest + tau * d;
      u = target + (u - target) * decay;
    }
    if (u >= params.threshold) {
      train.spike_times_ms.push_back(static_cast<double>(k + 1) * dt);
      u = params.u_reset;
      refractory = refractory_steps;
    }
    train.membrane_mv(k + 1) = u;
  }
  return train;
}

SpikeTrain run_afferent(const Signal& stress_pa, double dt_ms, const AfferentParams& params) {
  params.validate();
  return simulate_lif(stress_to_drive(filter_stress(stress_pa, dt_ms, params), params), params);
}

}  // namespace afferentsim
