#ifndef AFFERENTSIM_APP_COMMANDS_HPP
#define AFFERENTSIM_APP_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "afferentsim/app/config.hpp"
#include "afferentsim/fem.hpp"

namespace afferentsim::app {

/// Exclusive claim on an output directory, released on destruction.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// FEM runs behind a content-addressed stress-trace cache in
/// `<out>/cache`. The engine is only built on the first cache miss.
class FemStage {
 public:
  FemStage(const RunConfig& config, std::ostream& log);
  ~FemStage();

  const Mesh& mesh() const { return mesh_; }
  const std::string& mesh_hash() const { return mesh_hash_; }
  std::map<AfferentType, StressTrace> stress(const StimulusSpec& spec, const Signal& displacement_mm);
  int cache_hits() const { return hits_; }
  int cache_misses() const { return misses_; }

 private:
  const RunConfig& config_;
  std::ostream& log_;
  Mesh mesh_;
  std::string mesh_hash_;
  std::unique_ptr<IndentationEngine> engine_;
  int hits_ = 0;
  int misses_ = 0;
};

/// Builds the mesh and writes `<out>/mesh.txt`.
std::filesystem::path cmd_mesh(const RunConfig& config, std::ostream& out, std::ostream& log);

/// FEM over the protocol, all afferent models, rate table, rasters and
/// regression reports (when observed rates are configured).
void cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& log);

/// NSGA-II fit per afferent type present in the observed-rate file.
void cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Static probe indentation; returns whether every deflection check passed.
bool cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Command-line entry point. Returns the process exit code: 0 success,
/// 1 failed validation checks or unexpected error, 2 invalid input,
/// 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace afferentsim::app

#endif  // AFFERENTSIM_APP_COMMANDS_HPP
