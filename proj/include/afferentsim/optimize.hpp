#ifndef AFFERENTSIM_OPTIMIZE_HPP
#define AFFERENTSIM_OPTIMIZE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "afferentsim/analysis.hpp"
#include "afferentsim/neural.hpp"

namespace afferentsim {

/// Frequencies with one objective each.
inline constexpr std::array<double, 4> kFitFrequencies = {20.0, 50.0, 100.0, 300.0};

struct ObservedRate {
  double frequency_hz = 0.0;
  double amplitude_um = 0.0;
  double rate_ips = 0.0;
};

struct ObservedRateSet {
  AfferentType afferent = AfferentType::SA;
  std::vector<ObservedRate> records;

  void validate() const;
};

/// Reads `afferent,freq_hz,amplitude_um,rate_ips` rows; `#` lines are
/// comments. Throws ValidationError on malformed or empty input.
std::map<AfferentType, ObservedRateSet> read_observed_csv(std::istream& in);

/// Stimulus condition rounded to 0.01 Hz / 0.01 um.
using ConditionKey = std::pair<std::int64_t, std::int64_t>;
ConditionKey condition_key(double frequency_hz, double amplitude_um);

/// Von Mises stress traces at one afferent node, one per sinusoidal
/// condition. Built once from FEM runs and shared by every evaluation.
struct StressBank {
  double dt_ms = kDefaultDtMs;
  std::map<ConditionKey, Signal> traces;

  void add(double frequency_hz, double amplitude_um, Signal stress_pa);
  const Signal* find(double frequency_hz, double amplitude_um) const;
  /// (frequency, amplitude) of every stored condition, in key order.
  std::vector<std::pair<double, double>> conditions() const;
};

/// Box bounds on the free parameters. Log-scaled entries are searched in
/// log10 space.
struct ParameterBounds {
  std::vector<std::string> names;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<bool> log_scale;

  int size() const { return static_cast<int>(lower.size()); }
  void validate() const;
};

/// SA: (tau_m, a1, a2, alpha'); RA: (tau_m, a3, alpha'); PC: (tau_m, a4, alpha').
ParameterBounds default_bounds(AfferentType type);
Eigen::VectorXd to_candidate(const AfferentParams& params);
AfferentParams from_candidate(const AfferentParams& base, const Eigen::VectorXd& candidate);

/// Mean squared rate error per fit frequency; frequencies without records
/// score 0.
Eigen::Vector4d per_frequency_objectives(const std::vector<ObservedRate>& records,
                                         const std::vector<double>& predicted_ips);

/// Predicts rates for every observed condition. Filtering does not depend on
/// the fitted parameters, so it is done once at construction.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const AfferentParams& base, const StressBank& bank,
                     ObservedRateSet observed);

  std::vector<double> predicted_rates(const AfferentParams& params) const;
  Eigen::Vector4d operator()(const AfferentParams& params) const;
  const ObservedRateSet& observed() const { return observed_; }

 private:
  struct Prepared {
    FilteredStress inputs;
    AnalysisWindow window;
  };
  ObservedRateSet observed_;
  std::vector<Prepared> prepared_;
};

Eigen::Vector4d objectives(const AfferentParams& params, const StressBank& bank,
                           const ObservedRateSet& observed);

struct Nsga2Options {
  int population = 100;
  /// Total objective evaluations, initial population included.
  int budget = 10000;
  double crossover_probability = 0.9;
  double eta_crossover = 15.0;
  double eta_mutation = 20.0;
  /// Per-variable mutation probability; non-positive means 1 / n.
  double mutation_probability = -1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

using ObjectiveFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct FrontMember {
  Eigen::VectorXd x;
  Eigen::VectorXd objectives;
  int rank = 0;
  double crowding = 0.0;

  double objective_sum() const { return objectives.sum(); }
};

struct ParetoFront {
  /// Final population ordered by rank, then decreasing crowding distance.
  std::vector<FrontMember> members;
  /// Lowest objective sum seen so far, after the initial population and
  /// after each generation.
  std::vector<double> best_sum_history;
  int evaluations = 0;

  std::vector<FrontMember> non_dominated() const;
};

/// a is no worse than b everywhere and better somewhere (minimization).
bool dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
/// Fronts of indices, best first.
std::vector<std::vector<int>> non_dominated_sort(const std::vector<Eigen::VectorXd>& objectives);
/// Crowding distance of each member of `front`, in the same order.
std::vector<double> crowding_distance(const std::vector<Eigen::VectorXd>& objectives,
                                      const std::vector<int>& front);
/// Area dominated by the points and bounded by `reference` (two objectives).
double hypervolume_2d(const std::vector<Eigen::VectorXd>& points, const Eigen::Vector2d& reference);

ParetoFront nsga2(const ObjectiveFunction& evaluate, const ParameterBounds& bounds,
                  const Nsga2Options& options);

/// Smallest objective sum; ties by smallest largest objective, then by
/// parameter vector in lexicographic order.
const FrontMember& select_candidate(const ParetoFront& front);

/// Rates predicted by `params` for the given (frequency, amplitude) pairs.
ObservedRateSet synthesize_observed(const AfferentParams& params, const StressBank& bank,
                                    const std::vector<std::pair<double, double>>& conditions);

struct FitResult {
  ParetoFront front;
  AfferentParams selected;
  Eigen::Vector4d selected_objectives = Eigen::Vector4d::Zero();
  ParameterBounds bounds;
};

FitResult fit_afferent(const AfferentParams& base, const StressBank& bank,
                       const ObservedRateSet& observed, const ParameterBounds& bounds,
                       const Nsga2Options& options);

/// Fits against rates synthesized from `ground_truth` on every bank condition.
FitResult recover_parameters(const AfferentParams& ground_truth, const StressBank& bank,
                             const Nsga2Options& options);

}  // namespace afferentsim

#endif  // AFFERENTSIM_OPTIMIZE_HPP
