#ifndef AFFERENTSIM_NEURAL_HPP
#define AFFERENTSIM_NEURAL_HPP

#include <vector>

#include "afferentsim/types.hpp"

namespace afferentsim {

/// Constants of one afferent model. Only the half-saturation constants of the
/// matching type are used: a1, a2 for SA (Pa, Pa/ms), a3 for RA (Pa/ms), a4
/// for PC (Pa/ms^2).
struct AfferentParams {
  AfferentType type = AfferentType::SA;
  double tau_m = 10.0;        // ms
  double a1 = 1.0;
  double a2 = 1.0;
  double a3 = 1.0;
  double a4 = 1.0;
  double alpha_prime = 1.0;   // mV/ms
  double threshold = -50.0;   // mV
  double u_rest = -65.0;      // mV
  double u_reset = -65.0;     // mV
  double tau_r = 1.0;         // ms
  // SA averaging windows: (m1, m2) for stress, (m3, m4) for its derivative.
  int m1 = 9;
  int m2 = 9;
  int m3 = 9;
  int m4 = 8;

  /// Published optimized constants for each afferent type.
  static AfferentParams published(AfferentType type);
  void validate() const;
};

/// Membrane drive in mV/ms, i.e. current already scaled by R_m / tau_m.
struct DriveTrace {
  double dt_ms = kDefaultDtMs;
  Signal values;
};

struct SpikeTrain {
  double dt_ms = kDefaultDtMs;
  std::vector<double> spike_times_ms;
  /// Membrane potential after each step (post-reset on spike steps).
  Signal membrane_mv;

  double duration_ms() const {
    return membrane_mv.size() > 0 ? dt_ms * static_cast<double>(membrane_mv.size() - 1) : 0.0;
  }
};

/// Backward difference (x[k] - x[k-1]) / dt with d[0] = 0.
Signal derivative(const Signal& x, double dt_ms);

/// y[t] = sum_{n=-m_after}^{m_before} |x[t+n]| / (m_before + m_after + 1);
/// samples outside the trace count as zero.
Signal moving_average_abs(const Signal& x, int m_before, int m_after);

/// y[t] = |x[t] - x[t-1]|, y[0] = 0.
Signal abs_difference_filter(const Signal& x);

/// Filtered inputs to the stress-to-current transform: two channels for SA
/// (averaged |stress| and |stress rate|), one for RA and PC.
struct FilteredStress {
  AfferentType type = AfferentType::SA;
  double dt_ms = kDefaultDtMs;
  std::vector<Signal> channels;
};

FilteredStress filter_stress(const Signal& stress_pa, double dt_ms, const AfferentParams& params);

/// alpha' * sum over channels of x / (a + x).
DriveTrace stress_to_drive(const FilteredStress& inputs, const AfferentParams& params);

enum class Integrator { euler, exponential };

/// Leaky integrate-and-fire. A spike is recorded when the updated potential
/// reaches threshold; the potential is reset and the drive is withheld for
/// ceil(tau_r / dt) steps while the leak stays active.
SpikeTrain simulate_lif(const DriveTrace& drive, const AfferentParams& params,
                        Integrator integrator = Integrator::euler);

/// Full chain: filters, transform, LIF.
SpikeTrain run_afferent(const Signal& stress_pa, double dt_ms, const AfferentParams& params);

}  // namespace afferentsim

#endif  // AFFERENTSIM_NEURAL_HPP
