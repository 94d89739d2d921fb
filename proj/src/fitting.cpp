#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>

#include "afferentsim/optimize.hpp"

namespace afferentsim {

namespace {

int frequency_index(double frequency_hz) {
  for (std::size_t i = 0; i < kFitFrequencies.size(); ++i) {
    if (std::abs(kFitFrequencies[i] - frequency_hz) < 1e-9) return static_cast<int>(i);
  }
  return -1;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(field, "not a number: '" + text + "'");
  }
}

}  // namespace

void ObservedRateSet::validate() const {
  const std::string prefix = "observed." + std::string(to_string(afferent));
  if (records.empty()) throw ValidationError(prefix, "no records");
  std::set<ConditionKey> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ObservedRate& r = records[i];
    const std::string field = prefix + "[" + std::to_string(i) + "]";
    if (frequency_index(r.frequency_hz) < 0) {
      throw ValidationError(field + ".freq_hz", "must be one of 20, 50, 100, 300");
    }
    if (!(r.rate_ips >= 0.0)) throw ValidationError(field + ".rate_ips", "must be >= 0");
    if (!(r.amplitude_um >= 0.0)) throw ValidationError(field + ".amplitude_um", "must be >= 0");
    if (!seen.insert(condition_key(r.frequency_hz, r.amplitude_um)).second) {
      throw ValidationError(field, "duplicate (frequency, amplitude) condition");
    }
  }
}

std::map<AfferentType, ObservedRateSet> read_observed_csv(std::istream& in) {
  std::map<AfferentType, ObservedRateSet> sets;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    const std::string where = "observed:" + std::to_string(line_no);
    if (!header_seen) {
      header_seen = true;
      if (cells == std::vector<std::string>{"afferent", "freq_hz", "amplitude_um", "rate_ips"}) {
        continue;
      }
    }
    if (cells.size() != 4) throw ValidationError(where, "expected 4 columns");
    const AfferentType type = parse_afferent(cells[0]);
    auto& set = sets[type];
    set.afferent = type;
    set.records.push_back({parse_number(cells[1], where + ".freq_hz"),
                           parse_number(cells[2], where + ".amplitude_um"),
                           parse_number(cells[3], where + ".rate_ips")});
  }
  if (sets.empty()) throw ValidationError("observed", "no observed rate records");
  for (const auto& [type, set] : sets) set.validate();
  return sets;
}

ConditionKey condition_key(double frequency_hz, double amplitude_um) {
  return {std::llround(frequency_hz * 100.0), std::llround(amplitude_um * 100.0)};
}

void StressBank::add(double frequency_hz, double amplitude_um, Signal stress_pa) {
  traces[condition_key(frequency_hz, amplitude_um)] = std::move(stress_pa);
}

const Signal* StressBank::find(double frequency_hz, double amplitude_um) const {
  const auto it = traces.find(condition_key(frequency_hz, amplitude_um));
  return it == traces.end() ? nullptr : &it->second;
}

std::vector<std::pair<double, double>> StressBank::conditions() const {
  std::vector<std::pair<double, double>> out;
  for (const auto& [key, trace] : traces) {
    out.emplace_back(static_cast<double>(key.first) / 100.0,
                     static_cast<double>(key.second) / 100.0);
  }
  return out;
}

void ParameterBounds::validate() const {
  const auto n = static_cast<std::size_t>(size());
  if (n == 0 || upper.size() != lower.size() || log_scale.size() != n || names.size() != n) {
    throw ValidationError("bounds", "inconsistent bound vectors");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (!std::isfinite(lower(k)) || !std::isfinite(upper(k)) || !(lower(k) <= upper(k))) {
      throw ValidationError("bounds." + names[i], "need finite lower <= upper");
    }
    if (log_scale[i] && !(lower(k) > 0.0)) {
      throw ValidationError("bounds." + names[i], "log-scaled bound must be positive");
    }
  }
}

ParameterBounds default_bounds(AfferentType type) {
  ParameterBounds b;
  switch (type) {
    case AfferentType::SA: b.names = {"tau_m", "a1", "a2", "alpha_prime"}; break;
    case AfferentType::RA: b.names = {"tau_m", "a3", "alpha_prime"}; break;
    case AfferentType::PC: b.names = {"tau_m", "a4", "alpha_prime"}; break;
  }
  const auto n = static_cast<Eigen::Index>(b.names.size());
  b.lower.resize(n);
  b.upper.resize(n);
  b.log_scale.assign(b.names.size(), false);
  b.lower(0) = 1.0;
  b.upper(0) = 2000.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    b.lower(i) = 1.0;
    b.upper(i) = 1e6;
    b.log_scale[i] = true;
  }
  b.lower(n - 1) = 0.01;
  b.upper(n - 1) = 100.0;
  return b;
}

Eigen::VectorXd to_candidate(const AfferentParams& p) {
  switch (p.type) {
    case AfferentType::SA: return Eigen::Vector4d(p.tau_m, p.a1, p.a2, p.alpha_prime);
    case AfferentType::RA: return Eigen::Vector3d(p.tau_m, p.a3, p.alpha_prime);
    case AfferentType::PC: return Eigen::Vector3d(p.tau_m, p.a4, p.alpha_prime);
  }
  return {};
}

AfferentParams from_candidate(const AfferentParams& base, const Eigen::VectorXd& x) {
  const Eigen::Index expected = base.type == AfferentType::SA ? 4 : 3;
  if (x.size() != expected) throw ValidationError("candidate", "wrong parameter count");
  AfferentParams p = base;
  p.tau_m = x(0);
  p.alpha_prime = x(expected - 1);
  switch (base.type) {
    case AfferentType::SA:
      p.a1 = x(1);
      p.a2 = x(2);
      break;
    case AfferentType::RA: p.a3 = x(1); break;
    case AfferentType::PC: p.a4 = x(1); break;
  }
  return p;
}

Eigen::Vector4d per_frequency_objectives(const std::vector<ObservedRate>& records,
                                         const std::vector<double>& predicted_ips) {
  if (records.size() != predicted_ips.size()) {
    throw ValidationError("predicted", "one prediction per observed record required");
  }
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  Eigen::Vector4d count = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int f = frequency_index(records[i].frequency_hz);
    if (f < 0) throw ValidationError("observed.freq_hz", "not a fit frequency");
    const double e = predicted_ips[i] - records[i].rate_ips;
    sum(f) += e * e;
    count(f) += 1.0;
  }
  for (int f = 0; f < 4; ++f) {
    if (count(f) > 0.0) sum(f) /= count(f);
  }
  return sum;
}

ObjectiveEvaluator::ObjectiveEvaluator(const AfferentParams& base, const StressBank& bank,
                                       ObservedRateSet observed)
    : observed_(std::move(observed)) {
  observed_.validate();
  std::string missing;
  for (const ObservedRate& r : observed_.records) {
    if (!bank.find(r.frequency_hz, r.amplitude_um)) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s(%g Hz, %g um)", missing.empty() ? "" : ", ",
                    r.frequency_hz, r.amplitude_um);
      missing += buf;
    }
  }
  if (!missing.empty()) throw ValidationError("stress_bank", "missing conditions: " + missing);
  for (const ObservedRate& r : observed_.records) {
    const Signal& stress = *bank.find(r.frequency_hz, r.amplitude_um);
    prepared_.push_back({filter_stress(stress, bank.dt_ms, base), analysis_window(r.frequency_hz)});
  }
}

std::vector<double> ObjectiveEvaluator::predicted_rates(const AfferentParams& params) const {
  params.validate();
  std::vector<double> rates;
  rates.reserve(prepared_.size());
  for (const Prepared& p : prepared_) {
    rates.push_back(firing_rate(simulate_lif(stress_to_drive(p.inputs, params), params), p.window));
  }
  return rates;
}

Eigen::Vector4d ObjectiveEvaluator::operator()(const AfferentParams& params) const {
  return per_frequency_objectives(observed_.records, predicted_rates(params));
}

Eigen::Vector4d objectives(const AfferentParams& params, const StressBank& bank,
                           const ObservedRateSet& observed) {
  return ObjectiveEvaluator(params, bank, observed)(params);
}

ObservedRateSet synthesize_observed(const AfferentParams& params, const StressBank& bank,
                                    const std::vector<std::pair<double, double>>& conditions) {
  ObservedRateSet set;
  set.afferent = params.type;
  for (const auto& [f, a] : conditions) {
    const Signal* stress = bank.find(f, a);
    if (!stress) {
      throw ValidationError("stress_bank", "missing condition " + std::to_string(f) + " Hz, " +
                                               std::to_string(a) + " um");
    }
    const SpikeTrain train = run_afferent(*stress, bank.dt_ms, params);
    set.records.push_back({f, a, firing_rate(train, analysis_window(f))});
  }
  return set;
}

FitResult fit_afferent(const AfferentParams& base, const StressBank& bank,
                       const ObservedRateSet& observed, const ParameterBounds& bounds,
                       const Nsga2Options& options) {
  if (observed.afferent != base.type) {
    throw ValidationError("observed.afferent", "does not match the fitted afferent type");
  }
  const ObjectiveEvaluator evaluator(base, bank, observed);
  FitResult result;
  result.bounds = bounds;
  result.front = nsga2(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return evaluator(from_candidate(base, x));
      },
      bounds, options);
  const FrontMember& chosen = select_candidate(result.front);
  result.selected = from_candidate(base, chosen.x);
  result.selected_objectives = chosen.objectives;
  return result;
}

FitResult recover_parameters(const AfferentParams& ground_truth, const StressBank& bank,
                             const Nsga2Options& options) {
  const ObservedRateSet observed = synthesize_observed(ground_truth, bank, bank.conditions());
  return fit_afferent(ground_truth, bank, observed, default_bounds(ground_truth.type), options);
}

}  // namespace afferentsim
