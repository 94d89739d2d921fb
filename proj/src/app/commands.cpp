#include "afferentsim/app/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "afferentsim/analysis.hpp"
#include "afferentsim/hash.hpp"
#include "afferentsim/neural.hpp"
#include "afferentsim/optimize.hpp"
#include "afferentsim/parallel.hpp"
#include "afferentsim/trace_io.hpp"

namespace afferentsim::app {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("output_dir", "cannot write " + path.string());
  body(out);
  if (!out) throw ValidationError("output_dir", "write failed for " + path.string());
}

Provenance provenance(const RunConfig& config, std::vector<std::pair<std::string, std::string>> extra = {}) {
  return {config.hash(), config.seed, std::move(extra)};
}

Mesh build_configured_mesh(const RunConfig& config) {
  config.validate();
  return build_mesh(config.geometry, config.layers());
}

IndenterSpec indenter_for(const RunConfig& config, const Signal& displacement_mm) {
  IndenterSpec s;
  s.diameter_mm = config.indenter_diameter_mm;
  s.center_x_mm = config.indenter_center();
  s.pre_indentation_mm = config.pre_indentation_mm;
  s.dt_ms = config.dt_ms;
  s.displacement_trace_mm.assign(displacement_mm.data(),
                                 displacement_mm.data() + displacement_mm.size());
  return s;
}

std::string sinusoid_id(double f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "sin_%dhz_%.2fum", static_cast<int>(std::lround(f)), a);
  return buf;
}

ordered_json regression_or_null(const std::vector<double>& obs, const std::vector<double>& pred) {
  try {
    return regression_json(regression(obs, pred));
  } catch (const ValidationError& e) {
    return {{"skipped", e.what()}, {"n", obs.size()}};
  }
}

// Pooled and per-frequency regressions of predicted on observed.
ordered_json regression_report(const std::vector<RateRecord>& rows, const RunConfig& config) {
  ordered_json report;
  report["provenance"] = provenance_json(provenance(config));
  for (AfferentType type : kAllAfferents) {
    std::vector<double> obs;
    std::vector<double> pred;
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_freq;
    for (const RateRecord& r : rows) {
      if (r.afferent != type || !r.observed_ips) continue;
      obs.push_back(*r.observed_ips);
      pred.push_back(r.predicted_ips);
      by_freq[r.frequency_hz].first.push_back(*r.observed_ips);
      by_freq[r.frequency_hz].second.push_back(r.predicted_ips);
    }
    if (obs.empty()) continue;
    ordered_json entry;
    entry["pooled"] = regression_or_null(obs, pred);
    for (const auto& [f, pairs] : by_freq) {
      entry["per_frequency"][format_double(f)] = regression_or_null(pairs.first, pairs.second);
    }
    report[std::string(to_string(type))] = entry;
  }
  return report;
}

std::map<AfferentType, ObservedRateSet> load_observed(const RunConfig& config, bool required) {
  if (config.observed_csv.empty()) {
    if (required) throw ValidationError("observed", "an observed-rate CSV is required");
    return {};
  }
  std::ifstream in(config.observed_csv);
  if (!in) throw ValidationError("observed", "cannot open " + config.observed_csv.string());
  return read_observed_csv(in);
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return content_hash(ss.str());
}

}  // namespace

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".afferentsim.lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw ValidationError("output_dir", dir.string() + " is in use by another invocation (" +
                                              path_.string() + ")");
    }
    throw ValidationError("output_dir", "cannot create lock file: " + std::string(std::strerror(errno)));
  }
  ::close(fd);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

FemStage::FemStage(const RunConfig& config, std::ostream& log)
    : config_(config), log_(log), mesh_(build_configured_mesh(config)) {
  mesh_hash_ = content_hash(mesh_to_string(mesh_));
}

FemStage::~FemStage() = default;

std::map<AfferentType, StressTrace> FemStage::stress(const StimulusSpec& spec,
                                                     const Signal& displacement_mm) {
  ordered_json key = stimulus_to_json(spec);
  key.erase("id");
  key["indenter"] = {{"diameter_mm", config_.indenter_diameter_mm},
                     {"center_x_mm", config_.indenter_center()},
                     {"pre_indentation_mm", config_.pre_indentation_mm}};
  const std::string stim_hash = content_hash(key.dump());
  const fs::path dir = config_.output_dir / "cache";
  auto cache_file = [&](AfferentType t) {
    return dir / (mesh_hash_ + "-" + stim_hash + "-" + std::string(to_string(t)) + ".csv");
  };

  std::map<AfferentType, StressTrace> traces;
  bool complete = true;
  for (AfferentType t : kAllAfferents) {
    std::ifstream in(cache_file(t));
    if (!in) {
      complete = false;
      break;
    }
    try {
      traces[t] = read_stress_csv(in);
    } catch (const std::exception&) {
      complete = false;
      break;
    }
    if (traces[t].values.size() != displacement_mm.size()) {
      complete = false;
      break;
    }
  }
  if (complete) {
    ++hits_;
    log_ << "cache hit: " << spec.id << " (FEM skipped)\n";
    return traces;
  }

  ++misses_;
  if (!engine_) engine_ = std::make_unique<IndentationEngine>(mesh_);
  IndentationResult result;
  try {
    result = engine_->run(indenter_for(config_, displacement_mm));
  } catch (const NumericalError& e) {
    throw NumericalError(spec.id + ": " + e.what());
  }
  for (AfferentType t : kAllAfferents) {
    write_file(cache_file(t), [&](std::ostream& o) { write_stress_csv(o, result.traces.at(t)); });
  }
  log_ << "fem: " << spec.id << " (" << displacement_mm.size() << " steps)\n";
  return result.traces;
}

fs::path cmd_mesh(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const Mesh mesh = build_configured_mesh(config);
  OutputLock lock(config.output_dir);
  const fs::path path = config.output_dir / "mesh.txt";
  write_file(path, [&](std::ostream& o) { write_mesh(o, mesh); });
  out << "nodes " << mesh.num_nodes() << "\nelements " << mesh.num_elements() << '\n';
  for (const auto& [type, node] : mesh.afferent_nodes) {
    out << "afferent " << to_string(type) << " node " << node << " at (" << mesh.nodes(node, 0)
        << ", " << mesh.nodes(node, 1) << ")\n";
  }
  log << "wrote " << path.string() << '\n';
  return path;
}

void cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const auto specs = resolve_protocol(config.protocol, config.dt_ms, config.base_dir);
  const auto observed = load_observed(config, false);
  OutputLock lock(config.output_dir);
  FemStage fem(config, log);
  const fs::path dir = config.output_dir;
  const Provenance prov = provenance(config, {{"protocol", config.protocol},
                                              {"mesh", fem.mesh_hash()}});
  write_file(dir / "mesh.txt", [&](std::ostream& o) { write_mesh(o, fem.mesh()); });

  std::map<AfferentType, AfferentParams> params;
  std::map<AfferentType, std::string> phash;
  for (AfferentType t : config.afferents) {
    params[t] = config.params(t);
    phash[t] = params_hash(params[t]);
  }

  std::vector<RateRecord> rows;
  std::map<AfferentType, std::vector<SpikeTrain>> trains;
  std::ostringstream spikes;
  for (const StimulusSpec& spec : specs) {
    const Signal displacement = generate(spec);
    const AnalysisWindow window = analysis_window(spec.lowest_frequency_hz());
    if (window.discard_ms + window.window_ms > spec.duration_ms + 1e-9) {
      throw ValidationError(spec.id + ".duration_ms",
                            "shorter than the analysis window (" +
                                format_double(window.discard_ms + window.window_ms) + " ms)");
    }
    write_file(dir / "stimulus" / (spec.id + ".csv"),
               [&](std::ostream& o) { write_stimulus_csv(o, displacement, spec.dt_ms, &prov); });
    const auto traces = fem.stress(spec, displacement);

    std::vector<SpikeTrain> results(config.afferents.size());
    parallel_for(config.afferents.size(), [&](std::size_t i) {
      const AfferentType t = config.afferents[i];
      results[i] = run_afferent(traces.at(t).values, spec.dt_ms, params[t]);
    });
    for (std::size_t i = 0; i < config.afferents.size(); ++i) {
      const AfferentType t = config.afferents[i];
      write_file(dir / "stress" / (spec.id + "_" + std::string(to_string(t)) + ".csv"),
                 [&](std::ostream& o) { write_stress_csv(o, traces.at(t), &prov); });
      RateRecord r;
      r.afferent = t;
      r.stimulus_id = spec.id;
      r.frequency_hz = spec.lowest_frequency_hz();
      r.amplitude_um = spec.nominal_amplitude_um();
      r.predicted_ips = firing_rate(results[i], window);
      if (spec.kind == StimulusKind::sinusoid && observed.count(t)) {
        for (const ObservedRate& o : observed.at(t).records) {
          if (condition_key(o.frequency_hz, o.amplitude_um) ==
              condition_key(r.frequency_hz, r.amplitude_um)) {
            r.observed_ips = o.rate_ips;
          }
        }
      }
      rows.push_back(r);
      ordered_json meta;
      meta["stimulus_id"] = spec.id;
      meta["node"] = traces.at(t).node;
      meta["depth_mm"] = config.geometry.afferent_depth_mm.at(t);
      meta["window_ms"] = {window.discard_ms, window.discard_ms + window.window_ms};
      meta["rate_ips"] = r.predicted_ips;
      meta["at_quantization_floor"] = at_quantization_floor(r.predicted_ips, window.window_ms);
      spikes << spike_record(t, phash[t], results[i], meta).dump() << '\n';
      trains[t].push_back(std::move(results[i]));
    }
  }

  write_file(dir / "spikes.jsonl", [&](std::ostream& o) { o << spikes.str(); });
  write_file(dir / "rates.csv", [&](std::ostream& o) { write_rates_csv(o, rows, &prov); });
  for (const auto& [t, list] : trains) {
    write_file(dir / ("raster_" + std::string(to_string(t)) + ".csv"),
               [&](std::ostream& o) { write_raster_csv(o, raster(list), &prov); });
  }
  if (!observed.empty()) {
    write_file(dir / "regression.json",
               [&](std::ostream& o) { o << regression_report(rows, config).dump(2) << '\n'; });
  }
  ordered_json run;
  run["provenance"] = provenance_json(prov);
  run["config"] = config.to_json();
  for (const auto& [type, node] : fem.mesh().afferent_nodes) {
    run["afferent_nodes"][std::string(to_string(type))] = node;
  }
  run["stimuli"] = specs.size();
  write_file(dir / "run.json", [&](std::ostream& o) { o << run.dump(2) << '\n'; });
  out << "stimuli " << specs.size() << "\nrate rows " << rows.size() << "\nfem runs "
      << fem.cache_misses() << "\ncache hits " << fem.cache_hits() << '\n';
}

void cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const auto observed = load_observed(config, true);
  const std::string data_hash = file_hash(config.observed_csv);
  OutputLock lock(config.output_dir);
  FemStage fem(config, log);
  const fs::path dir = config.output_dir;
  Nsga2Options options = config.nsga2;
  options.seed = config.seed;
  const Provenance prov = provenance(config, {{"observed", data_hash}, {"mesh", fem.mesh_hash()}});

  std::vector<RateRecord> rows;
  for (const auto& [type, set] : observed) {
    StressBank bank;
    bank.dt_ms = config.dt_ms;
    for (const ObservedRate& r : set.records) {
      if (bank.find(r.frequency_hz, r.amplitude_um)) continue;
      StimulusSpec spec;
      spec.id = sinusoid_id(r.frequency_hz, r.amplitude_um);
      spec.kind = StimulusKind::sinusoid;
      spec.components = {{r.frequency_hz, r.amplitude_um}};
      spec.dt_ms = config.dt_ms;
      spec.duration_ms = protocol_duration_ms(r.frequency_hz);
      bank.add(r.frequency_hz, r.amplitude_um, fem.stress(spec, generate(spec)).at(type).values);
    }
    const AfferentParams base = config.params(type);
    const ParameterBounds bounds = default_bounds(type);
    log << "fit " << to_string(type) << ": population " << options.population << ", budget "
        << options.budget << ", seed " << options.seed << '\n';
    const FitResult fit = fit_afferent(base, bank, set, bounds, options);
    const std::string name(to_string(type));
    write_file(dir / ("front_" + name + ".csv"),
               [&](std::ostream& o) { write_front_csv(o, fit.front, bounds.names, &prov); });

    ordered_json selected;
    ordered_json p = provenance_json(prov);
    p["budget"] = options.budget;
    p["population"] = options.population;
    for (int i = 0; i < bounds.size(); ++i) {
      p["bounds"][bounds.names[i]] = {bounds.lower(i), bounds.upper(i)};
    }
    selected["provenance"] = p;
    selected["params"] = params_to_json(fit.selected);
    selected["objectives"] = {fit.selected_objectives(0), fit.selected_objectives(1),
                              fit.selected_objectives(2), fit.selected_objectives(3)};
    selected["objective_sum"] = fit.selected_objectives.sum();
    selected["evaluations"] = fit.front.evaluations;
    write_file(dir / ("selected_" + name + ".json"),
               [&](std::ostream& o) { o << selected.dump(2) << '\n'; });

    const ObjectiveEvaluator evaluator(fit.selected, bank, set);
    const auto predicted = evaluator.predicted_rates(fit.selected);
    for (std::size_t i = 0; i < set.records.size(); ++i) {
      const ObservedRate& r = set.records[i];
      rows.push_back({type, sinusoid_id(r.frequency_hz, r.amplitude_um), r.frequency_hz,
                      r.amplitude_um, predicted[i], r.rate_ips});
    }
    out << name << " objective_sum " << format_double(fit.selected_objectives.sum()) << '\n';
  }
  write_file(dir / "fit_rates.csv", [&](std::ostream& o) { write_rates_csv(o, rows, &prov); });
}

bool cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  if (!(config.probe_indentation_mm >= 0.0)) {
    throw ValidationError("validate.probe_indentation_mm", "must be >= 0");
  }
  OutputLock lock(config.output_dir);
  const Mesh mesh = build_configured_mesh(config);
  IndentationEngine engine(mesh);
  const IndenterShape probe{config.probe_diameter_mm, config.indenter_center()};
  const double depth = config.probe_indentation_mm;
  const auto stations = engine.deflection_stations(probe.center_x_mm);
  const DeflectionProfile profile =
      surface_deflection(mesh, engine.solve_depth(probe, depth), stations);

  // Distances from the probe on each side, nearest first.
  std::vector<double> left;
  std::vector<double> right;
  double at1 = 0.0;
  double at5 = 0.0;
  double peak = -1e300;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const double dx = stations[i] - probe.center_x_mm;
    peak = std::max(peak, profile.deflection_mm[i]);
    if (std::abs(std::abs(dx) - 1.0) < 1e-9 && dx > 0) at1 = profile.deflection_mm[i];
    if (std::abs(std::abs(dx) - 5.0) < 1e-9 && dx > 0) at5 = profile.deflection_mm[i];
    if (dx <= 1e-9) left.insert(left.begin(), profile.deflection_mm[i]);
    if (dx >= -1e-9) right.push_back(profile.deflection_mm[i]);
  }
  auto strictly_decreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] < v[i - 1])) return false;
    }
    return true;
  };

  ordered_json checks;
  bool ok = true;
  auto check = [&](const std::string& name, bool pass, ordered_json detail) {
    detail["pass"] = pass;
    checks[name] = detail;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << name << '\n';
  };
  if (depth > 0.0) {
    check("max_deflection",
          peak >= 0.9 * depth && peak <= 1.1 * depth,
          {{"value_mm", peak}, {"range_mm", {0.9 * depth, 1.1 * depth}}});
    check("monotonic_decay", strictly_decreasing(left) && strictly_decreasing(right),
          {{"spacing_mm", 0.5}});
    check("decay_1_to_5_mm", at5 < at1, {{"at_1mm", at1}, {"at_5mm", at5}});
  } else {
    double largest = 0.0;
    for (double d : profile.deflection_mm) largest = std::max(largest, std::abs(d));
    check("zero_profile", largest == 0.0, {{"max_abs_mm", largest}});
  }

  const Provenance prov = provenance(config);
  write_file(config.output_dir / "deflection.csv",
             [&](std::ostream& o) { write_deflection_csv(o, profile, &prov); });
  ordered_json report;
  report["provenance"] = provenance_json(prov);
  report["probe_diameter_mm"] = config.probe_diameter_mm;
  report["indentation_mm"] = depth;
  report["checks"] = checks;
  report["pass"] = ok;
  write_file(config.output_dir / "validate_report.json",
             [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  log << "deflection profile: " << stations.size() << " stations\n";
  return ok;
}

}  // namespace afferentsim::app
