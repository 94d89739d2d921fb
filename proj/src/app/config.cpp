#include "afferentsim/app/config.hpp"

#include <cmath>
#include <fstream>

#include "afferentsim/hash.hpp"
#include "afferentsim/trace_io.hpp"

namespace afferentsim::app {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& value, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    value = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + key, "wrong type");
  }
}

const json& object_at(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_object()) throw ValidationError(path + key, "expected an object");
  return v;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace

fs::path data_dir() {
#ifdef AFFERENTSIM_DATA_DIR
  return AFFERENTSIM_DATA_DIR;
#else
  return "data";
#endif
}

double RunConfig::indenter_center() const {
  return indenter_center_x_mm < 0.0 ? geometry.centerline() : indenter_center_x_mm;
}

std::vector<MaterialLayer> RunConfig::layers() const {
  return stack_layers(materials, geometry.layer_thickness_mm);
}

AfferentParams RunConfig::params(AfferentType type) const {
  AfferentParams p = AfferentParams::published(type);
  if (params_source == "fitted") {
    const auto it = fitted_params.find(type);
    if (it != fitted_params.end()) {
      std::ifstream in(it->second);
      if (!in) throw ValidationError("params.files." + std::string(to_string(type)),
                                     "cannot open " + it->second.string());
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw ValidationError("params.files." + std::string(to_string(type)), e.what());
      }
      p = params_from_json(j.contains("params") ? j.at("params") : j, p);
    }
  }
  const auto o = param_overrides.find(type);
  if (o != param_overrides.end()) p = params_from_json(o->second, p);
  if (p.type != type) {
    throw ValidationError("params." + std::string(to_string(type)), "type mismatch");
  }
  return p;
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  ordered_json g;
  g["domain_width_mm"] = geometry.domain_width_mm;
  g["layer_thickness_mm"] = geometry.layer_thickness_mm;
  g["surface_element_mm"] = geometry.surface_element_mm;
  g["coarsening"] = geometry.coarsening;
  g["growth_ratio"] = geometry.growth_ratio;
  g["centerline_x_mm"] = geometry.centerline();
  for (const auto& [type, depth] : geometry.afferent_depth_mm) {
    g["afferent_depth_mm"][std::string(to_string(type))] = depth;
  }
  j["geometry"] = g;
  for (const auto& m : materials) {
    j["materials"].push_back({{"name", m.name},
                              {"elastic_modulus_mpa", m.elastic_modulus_mpa},
                              {"poisson_ratio", m.poisson_ratio}});
  }
  j["indenter"] = {{"diameter_mm", indenter_diameter_mm},
                   {"center_x_mm", indenter_center()},
                   {"pre_indentation_mm", pre_indentation_mm}};
  j["dt_ms"] = dt_ms;
  j["protocol"] = protocol;
  for (AfferentType t : afferents) j["afferents"].push_back(std::string(to_string(t)));
  ordered_json params;
  for (AfferentType t : afferents) params[std::string(to_string(t))] = params_to_json(this->params(t));
  j["params"] = params;
  j["seed"] = seed;
  j["nsga2"] = {{"population", nsga2.population},
                {"budget", nsga2.budget},
                {"crossover_probability", nsga2.crossover_probability},
                {"eta_crossover", nsga2.eta_crossover},
                {"eta_mutation", nsga2.eta_mutation},
                {"mutation_probability", nsga2.mutation_probability}};
  j["validate"] = {{"probe_diameter_mm", probe_diameter_mm},
                   {"probe_indentation_mm", probe_indentation_mm}};
  return j;
}

std::string RunConfig::hash() const { return content_hash(to_json().dump()); }

void RunConfig::validate() const {
  try {
    geometry.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("geometry." + e.field(),
                          std::string(e.what()).substr(e.field().size() + 2));
  }
  if (materials.size() != geometry.layer_thickness_mm.size()) {
    throw ValidationError("materials", "need one material per layer thickness");
  }
  for (std::size_t i = 0; i < materials.size(); ++i) {
    const std::string f = "materials[" + std::to_string(i) + "]";
    if (!(materials[i].elastic_modulus_mpa > 0.0)) {
      throw ValidationError(f + ".elastic_modulus_mpa", "must be > 0");
    }
    if (!(materials[i].poisson_ratio >= 0.0 && materials[i].poisson_ratio < 0.5)) {
      throw ValidationError(f + ".poisson_ratio", "must be in [0, 0.5)");
    }
  }
  if (!(indenter_diameter_mm > 0.0)) throw ValidationError("indenter.diameter_mm", "must be > 0");
  if (indenter_center_x_mm > geometry.domain_width_mm) {
    throw ValidationError("indenter.center_x_mm", "outside the domain");
  }
  if (!(dt_ms > 0.0)) throw ValidationError("dt_ms", "must be > 0");
  if (params_source != "published" && params_source != "fitted") {
    throw ValidationError("params.source", "must be published or fitted");
  }
  if (afferents.empty()) throw ValidationError("afferents", "at least one afferent type");
  for (AfferentType t : afferents) params(t).validate();
  try {
    nsga2.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  if (!(probe_diameter_mm > 0.0)) {
    throw ValidationError("validate.probe_diameter_mm", "must be > 0");
  }
}

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config", "expected a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  {
    auto table = fingertip_material_table();
    table.resize(4);
    c.materials = table;
  }
  if (j.contains("geometry")) {
    const json& g = object_at(j, "geometry", "");
    const std::string p = "geometry.";
    read_field(g, "domain_width_mm", c.geometry.domain_width_mm, p);
    read_field(g, "layer_thickness_mm", c.geometry.layer_thickness_mm, p);
    read_field(g, "surface_element_mm", c.geometry.surface_element_mm, p);
    read_field(g, "coarsening", c.geometry.coarsening, p);
    read_field(g, "growth_ratio", c.geometry.growth_ratio, p);
    read_field(g, "centerline_x_mm", c.geometry.centerline_x_mm, p);
    if (g.contains("afferent_depth_mm")) {
      const json& d = object_at(g, "afferent_depth_mm", p);
      for (const auto& [key, value] : d.items()) {
        if (!value.is_number()) throw ValidationError(p + "afferent_depth_mm." + key, "not a number");
        c.geometry.afferent_depth_mm[parse_afferent(key)] = value.get<double>();
      }
    }
  }
  if (j.contains("materials")) {
    const json& m = j.at("materials");
    if (!m.is_array()) throw ValidationError("materials", "expected a list");
    c.materials.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string p = "materials[" + std::to_string(i) + "].";
      MaterialLayer layer;
      read_field(m[i], "name", layer.name, p);
      read_field(m[i], "elastic_modulus_mpa", layer.elastic_modulus_mpa, p);
      read_field(m[i], "poisson_ratio", layer.poisson_ratio, p);
      c.materials.push_back(layer);
    }
  }
  if (j.contains("indenter")) {
    const json& ind = object_at(j, "indenter", "");
    read_field(ind, "diameter_mm", c.indenter_diameter_mm, "indenter.");
    read_field(ind, "center_x_mm", c.indenter_center_x_mm, "indenter.");
    read_field(ind, "pre_indentation_mm", c.pre_indentation_mm, "indenter.");
  }
  read_field(j, "dt_ms", c.dt_ms, "");
  read_field(j, "protocol", c.protocol, "");
  read_field(j, "seed", c.seed, "");
  if (j.contains("output_dir")) {
    std::string out;
    read_field(j, "output_dir", out, "");
    c.output_dir = resolve(out, base_dir);
  }
  if (j.contains("observed")) {
    std::string obs;
    read_field(j, "observed", obs, "");
    c.observed_csv = resolve(obs, base_dir);
  }
  if (j.contains("afferents")) {
    std::vector<std::string> names;
    read_field(j, "afferents", names, "");
    c.afferents.clear();
    for (const auto& n : names) c.afferents.push_back(parse_afferent(n));
  }
  if (j.contains("params")) {
    const json& p = object_at(j, "params", "");
    read_field(p, "source", c.params_source, "params.");
    if (p.contains("files")) {
      for (const auto& [key, value] : object_at(p, "files", "params.").items()) {
        c.fitted_params[parse_afferent(key)] = resolve(value.get<std::string>(), base_dir);
      }
    }
    for (AfferentType t : kAllAfferents) {
      const std::string key(to_string(t));
      if (p.contains(key)) c.param_overrides[t] = object_at(p, key.c_str(), "params.");
    }
  }
  if (j.contains("nsga2")) {
    const json& n = object_at(j, "nsga2", "");
    read_field(n, "population", c.nsga2.population, "nsga2.");
    read_field(n, "budget", c.nsga2.budget, "nsga2.");
    read_field(n, "crossover_probability", c.nsga2.crossover_probability, "nsga2.");
    read_field(n, "eta_crossover", c.nsga2.eta_crossover, "nsga2.");
    read_field(n, "eta_mutation", c.nsga2.eta_mutation, "nsga2.");
    read_field(n, "mutation_probability", c.nsga2.mutation_probability, "nsga2.");
  }
  if (j.contains("validate")) {
    const json& v = object_at(j, "validate", "");
    read_field(v, "probe_diameter_mm", c.probe_diameter_mm, "validate.");
    read_field(v, "probe_indentation_mm", c.probe_indentation_mm, "validate.");
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
  return config_from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

std::vector<StimulusSpec> resolve_protocol(const std::string& name, double dt_ms,
                                           const fs::path& base_dir) {
  std::vector<StimulusSpec> specs;
  const bool builtin = name == "sinusoid" || name == "diharmonic" || name == "noise";
  fs::path file = builtin ? data_dir() / "protocols" / (name + ".json") : resolve(name, base_dir);
  if (!builtin && !fs::exists(file) && fs::exists(name)) file = name;
  if (fs::exists(file)) {
    std::ifstream in(file);
    specs = read_protocol(in);
  } else if (name == "sinusoid") {
    specs = sinusoid_protocol();
  } else if (name == "diharmonic") {
    specs = diharmonic_protocol();
  } else if (name == "noise") {
    specs = noise_protocol();
  } else {
    throw ValidationError("protocol", "no such protocol file: " + name);
  }
  for (auto& s : specs) {
    if (builtin) s.dt_ms = dt_ms;
    if (std::abs(s.dt_ms - dt_ms) > 1e-12) {
      throw ValidationError(s.id + ".dt_ms", "differs from the configured dt_ms");
    }
    s.validate();
  }
  return specs;
}

}  // namespace afferentsim::app
