#include "afferentsim/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "afferentsim/hash.hpp"

namespace afferentsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void maybe_provenance(std::ostream& out, const Provenance* p) {
  if (p) write_provenance(out, *p);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(key, e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_provenance(std::ostream& out, const Provenance& p) {
  out << "# afferentsim " << kVersion << " config=" << p.config_hash << " seed=" << p.seed;
  for (const auto& [k, v] : p.extra) out << ' ' << k << '=' << v;
  out << '\n';
}

ordered_json provenance_json(const Provenance& p) {
  ordered_json j;
  j["version"] = kVersion;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  for (const auto& [k, v] : p.extra) j[k] = v;
  return j;
}

void write_stress_csv(std::ostream& out, const StressTrace& trace, const Provenance* p) {
  maybe_provenance(out, p);
  out << "# afferent,node,dt_ms\n";
  out << "# " << to_string(trace.afferent) << ',' << trace.node << ','
      << format_double(trace.dt_ms) << '\n';
  out << "t_ms,sigma_pa\n";
  for (Eigen::Index k = 0; k < trace.values.size(); ++k) {
    out << format_double(static_cast<double>(k) * trace.dt_ms) << ','
        << format_double(trace.values(k)) << '\n';
  }
}

StressTrace read_stress_csv(std::istream& in) {
  StressTrace trace;
  std::string line;
  bool header_next = false;
  bool have_header = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line == "# afferent,node,dt_ms") {
        header_next = true;
      } else if (header_next) {
        std::stringstream ss(line.substr(2));
        std::string type, node, dt;
        std::getline(ss, type, ',');
        std::getline(ss, node, ',');
        std::getline(ss, dt, ',');
        trace.afferent = parse_afferent(type);
        trace.node = std::stoi(node);
        trace.dt_ms = std::stod(dt);
        header_next = false;
        have_header = true;
      }
      continue;
    }
    if (line == "t_ms,sigma_pa") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("stress_csv", "malformed row: " + line);
    values.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
  }
  if (!have_header) throw ValidationError("stress_csv", "missing afferent,node,dt_ms header");
  trace.values = Eigen::Map<Signal>(values.data(), static_cast<Eigen::Index>(values.size()));
  return trace;
}

void write_deflection_csv(std::ostream& out, const DeflectionProfile& profile,
                          const Provenance* p) {
  maybe_provenance(out, p);
  out << "x_mm,deflection_mm\n";
  for (std::size_t i = 0; i < profile.x_mm.size(); ++i) {
    out << format_double(profile.x_mm[i]) << ',' << format_double(profile.deflection_mm[i])
        << '\n';
  }
}

void write_stimulus_csv(std::ostream& out, const Signal& displacement_mm, double dt_ms,
                        const Provenance* p) {
  maybe_provenance(out, p);
  out << "t_ms,displacement_mm\n";
  for (Eigen::Index k = 0; k < displacement_mm.size(); ++k) {
    out << format_double(static_cast<double>(k) * dt_ms) << ','
        << format_double(displacement_mm(k)) << '\n';
  }
}

void write_membrane_csv(std::ostream& out, const SpikeTrain& train) {
  out << "t_ms,u_mv\n";
  for (Eigen::Index k = 0; k < train.membrane_mv.size(); ++k) {
    out << format_double(static_cast<double>(k) * train.dt_ms) << ','
        << format_double(train.membrane_mv(k)) << '\n';
  }
}

ordered_json spike_record(AfferentType afferent, const std::string& params_hash,
                          const SpikeTrain& train, ordered_json meta) {
  ordered_json j;
  j["afferent"] = std::string(to_string(afferent));
  j["params_hash"] = params_hash;
  j["dt"] = train.dt_ms;
  j["spikes"] = train.spike_times_ms;
  j["meta"] = std::move(meta);
  return j;
}

void write_rates_csv(std::ostream& out, const std::vector<RateRecord>& rows,
                     const Provenance* p) {
  maybe_provenance(out, p);
  out << "afferent,stimulus_id,freq_hz,amplitude_um,predicted_ips,observed_ips\n";
  for (const RateRecord& r : rows) {
    out << to_string(r.afferent) << ',' << r.stimulus_id << ',' << format_double(r.frequency_hz)
        << ',' << format_double(r.amplitude_um) << ',' << format_double(r.predicted_ips) << ','
        << (r.observed_ips ? format_double(*r.observed_ips) : std::string()) << '\n';
  }
}

void write_raster_csv(std::ostream& out, const std::vector<RasterRow>& rows,
                      const Provenance* p) {
  maybe_provenance(out, p);
  out << "trial,t_ms\n";
  for (const RasterRow& r : rows) out << r.trial << ',' << format_double(r.t_ms) << '\n';
}

void write_front_csv(std::ostream& out, const ParetoFront& front,
                     const std::vector<std::string>& parameter_names, const Provenance* p) {
  maybe_provenance(out, p);
  out << "rank,objective_20,objective_50,objective_100,objective_300";
  for (const auto& name : parameter_names) out << ',' << name;
  out << '\n';
  for (const FrontMember& m : front.members) {
    out << m.rank;
    for (Eigen::Index i = 0; i < m.objectives.size(); ++i) out << ',' << format_double(m.objectives(i));
    for (Eigen::Index i = 0; i < m.x.size(); ++i) out << ',' << format_double(m.x(i));
    out << '\n';
  }
}

ordered_json regression_json(const RegressionReport& r) {
  ordered_json j;
  j["slope"] = r.slope;
  j["intercept"] = r.intercept;
  j["r_squared"] = r.r_squared;
  j["p_value"] = r.p_value;
  j["n"] = r.n;
  return j;
}

ordered_json params_to_json(const AfferentParams& p) {
  ordered_json j;
  j["type"] = std::string(to_string(p.type));
  j["tau_m"] = p.tau_m;
  switch (p.type) {
    case AfferentType::SA:
      j["a1"] = p.a1;
      j["a2"] = p.a2;
      break;
    case AfferentType::RA: j["a3"] = p.a3; break;
    case AfferentType::PC: j["a4"] = p.a4; break;
  }
  j["alpha_prime"] = p.alpha_prime;
  j["threshold"] = p.threshold;
  j["u_rest"] = p.u_rest;
  j["u_reset"] = p.u_reset;
  j["tau_r"] = p.tau_r;
  if (p.type == AfferentType::SA) j["m"] = {p.m1, p.m2, p.m3, p.m4};
  return j;
}

AfferentParams params_from_json(const json& j, const AfferentParams& base) {
  if (!j.is_object()) throw ValidationError("params", "expected an object");
  AfferentParams p = base;
  if (j.contains("type")) p.type = parse_afferent(get_or<std::string>(j, "type", ""));
  p.tau_m = get_or(j, "tau_m", p.tau_m);
  p.a1 = get_or(j, "a1", p.a1);
  p.a2 = get_or(j, "a2", p.a2);
  p.a3 = get_or(j, "a3", p.a3);
  p.a4 = get_or(j, "a4", p.a4);
  p.alpha_prime = get_or(j, "alpha_prime", p.alpha_prime);
  p.threshold = get_or(j, "threshold", p.threshold);
  p.u_rest = get_or(j, "u_rest", p.u_rest);
  p.u_reset = get_or(j, "u_reset", p.u_reset);
  p.tau_r = get_or(j, "tau_r", p.tau_r);
  if (j.contains("m")) {
    const auto m = get_or<std::vector<int>>(j, "m", {});
    if (m.size() != 4) throw ValidationError("params.m", "expected four filter widths");
    p.m1 = m[0];
    p.m2 = m[1];
    p.m3 = m[2];
    p.m4 = m[3];
  }
  p.validate();
  return p;
}

std::string params_hash(const AfferentParams& p) {
  ordered_json j = params_to_json(p);
  j["m"] = {p.m1, p.m2, p.m3, p.m4};
  return content_hash(j.dump());
}

ordered_json stimulus_to_json(const StimulusSpec& s) {
  ordered_json j;
  j["id"] = s.id;
  j["kind"] = std::string(to_string(s.kind));
  j["duration_ms"] = s.duration_ms;
  j["dt_ms"] = s.dt_ms;
  if (s.kind == StimulusKind::bandpass_noise) {
    j["low_hz"] = s.low_hz;
    j["high_hz"] = s.high_hz;
    j["rms_um"] = s.rms_um;
    j["seed"] = s.seed;
    j["filter_order"] = s.filter_order;
  } else {
    ordered_json comps = ordered_json::array();
    for (const auto& c : s.components) {
      comps.push_back({{"frequency_hz", c.frequency_hz}, {"amplitude_um", c.amplitude_um}});
    }
    j["components"] = comps;
  }
  return j;
}

StimulusSpec stimulus_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("stimulus", "expected an object");
  StimulusSpec s;
  s.id = get_or<std::string>(j, "id", "");
  if (s.id.empty()) throw ValidationError("stimulus.id", "missing");
  s.kind = parse_stimulus_kind(get_or<std::string>(j, "kind", "sinusoid"));
  s.duration_ms = get_or(j, "duration_ms", s.duration_ms);
  s.dt_ms = get_or(j, "dt_ms", s.dt_ms);
  s.low_hz = get_or(j, "low_hz", s.low_hz);
  s.high_hz = get_or(j, "high_hz", s.high_hz);
  s.rms_um = get_or(j, "rms_um", s.rms_um);
  s.seed = get_or(j, "seed", s.seed);
  s.filter_order = get_or(j, "filter_order", s.filter_order);
  if (j.contains("components")) {
    for (const auto& c : j.at("components")) {
      s.components.push_back({get_or(c, "frequency_hz", 0.0), get_or(c, "amplitude_um", 0.0)});
    }
  }
  s.validate();
  return s;
}

std::vector<StimulusSpec> read_protocol(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("protocol", e.what());
  }
  if (!j.is_array()) throw ValidationError("protocol", "expected a JSON list of stimuli");
  std::vector<StimulusSpec> specs;
  for (const auto& item : j) specs.push_back(stimulus_from_json(item));
  if (specs.empty()) throw ValidationError("protocol", "no stimuli");
  return specs;
}

void write_protocol(std::ostream& out, const std::vector<StimulusSpec>& specs) {
  ordered_json j = ordered_json::array();
  for (const auto& s : specs) j.push_back(stimulus_to_json(s));
  out << j.dump(2) << '\n';
}

}  // namespace afferentsim
