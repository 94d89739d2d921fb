#ifndef AFFERENTSIM_APP_CONFIG_HPP
#define AFFERENTSIM_APP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "afferentsim/mesh.hpp"
#include "afferentsim/neural.hpp"
#include "afferentsim/optimize.hpp"
#include "afferentsim/stimulus.hpp"

namespace afferentsim::app {

/// Everything a command needs, with defaults reproducing the published setup.
struct RunConfig {
  GeometrySpec geometry;
  /// Soft layers from the surface down; thicknesses come from `geometry`.
  std::vector<MaterialLayer> materials;
  double indenter_diameter_mm = 1.0;
  /// Negative means the mesh centerline.
  double indenter_center_x_mm = -1.0;
  double pre_indentation_mm = 0.0;
  double dt_ms = kDefaultDtMs;
  /// sinusoid | diharmonic | noise | path to a protocol JSON file.
  std::string protocol = "sinusoid";
  /// published | fitted
  std::string params_source = "published";
  std::map<AfferentType, std::filesystem::path> fitted_params;
  std::map<AfferentType, nlohmann::json> param_overrides;
  std::vector<AfferentType> afferents = {kAllAfferents.begin(), kAllAfferents.end()};
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::filesystem::path observed_csv;
  Nsga2Options nsga2;
  double probe_diameter_mm = 0.05;
  double probe_indentation_mm = 1.0;
  /// Directory relative paths in the file are resolved against.
  std::filesystem::path base_dir = ".";

  double indenter_center() const;
  std::vector<MaterialLayer> layers() const;
  AfferentParams params(AfferentType type) const;
  /// Effective configuration, output directory excluded.
  nlohmann::ordered_json to_json() const;
  /// Digest of `to_json()`.
  std::string hash() const;
  void validate() const;
};

/// Reads a config file; missing fields keep their defaults. Throws
/// ValidationError naming the offending field path.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Resolves `sinusoid`, `diharmonic` or `noise` to the shipped protocol files (falling back to the
/// built-in tables) or reads a protocol file. Stimulus dt must match `dt_ms`.
std::vector<StimulusSpec> resolve_protocol(const std::string& name, double dt_ms,
                                           const std::filesystem::path& base_dir);

std::filesystem::path data_dir();

}  // namespace afferentsim::app

#endif  // AFFERENTSIM_APP_CONFIG_HPP
