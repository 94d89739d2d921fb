#ifndef AFFERENTSIM_TRACE_IO_HPP
#define AFFERENTSIM_TRACE_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "afferentsim/analysis.hpp"
#include "afferentsim/fem.hpp"
#include "afferentsim/neural.hpp"
#include "afferentsim/optimize.hpp"
#include "afferentsim/stimulus.hpp"

namespace afferentsim {

/// Identifies the inputs an output file was produced from.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

/// `# afferentsim <version> config=<hash> seed=<n> key=value...`
void write_provenance(std::ostream& out, const Provenance& p);
nlohmann::ordered_json provenance_json(const Provenance& p);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

void write_stress_csv(std::ostream& out, const StressTrace& trace, const Provenance* p = nullptr);
StressTrace read_stress_csv(std::istream& in);

void write_deflection_csv(std::ostream& out, const DeflectionProfile& profile,
                          const Provenance* p = nullptr);
void write_stimulus_csv(std::ostream& out, const Signal& displacement_mm, double dt_ms,
                        const Provenance* p = nullptr);
void write_membrane_csv(std::ostream& out, const SpikeTrain& train);

/// One JSON-lines record per spike train.
nlohmann::ordered_json spike_record(AfferentType afferent, const std::string& params_hash,
                                    const SpikeTrain& train, nlohmann::ordered_json meta);

void write_rates_csv(std::ostream& out, const std::vector<RateRecord>& rows,
                     const Provenance* p = nullptr);
void write_raster_csv(std::ostream& out, const std::vector<RasterRow>& rows,
                      const Provenance* p = nullptr);
void write_front_csv(std::ostream& out, const ParetoFront& front,
                     const std::vector<std::string>& parameter_names,
                     const Provenance* p = nullptr);

nlohmann::ordered_json regression_json(const RegressionReport& r);

nlohmann::ordered_json params_to_json(const AfferentParams& p);
/// Fields missing from `j` keep their values from `base`.
AfferentParams params_from_json(const nlohmann::json& j, const AfferentParams& base);
/// Stable digest of every field that affects a simulation.
std::string params_hash(const AfferentParams& p);

nlohmann::ordered_json stimulus_to_json(const StimulusSpec& s);
StimulusSpec stimulus_from_json(const nlohmann::json& j);
std::vector<StimulusSpec> read_protocol(std::istream& in);
void write_protocol(std::ostream& out, const std::vector<StimulusSpec>& specs);

}  // namespace afferentsim

#endif  // AFFERENTSIM_TRACE_IO_HPP
