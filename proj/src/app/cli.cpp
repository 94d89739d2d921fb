#include <CLI11.hpp>

#include <ostream>
#include <sstream>

#include "afferentsim/app/commands.hpp"

namespace afferentsim::app {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Tactile afferent simulator: skin mechanics, neural models, fitting"};
  cli.set_version_flag("--version", kVersion);
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string protocol;
  std::string observed;
  std::uint64_t seed = 0;
  cli.add_option("command", command, "mesh | simulate | fit | validate")
      ->required()
      ->check(CLI::IsMember({"mesh", "simulate", "fit", "validate"}));
  cli.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* seed_opt = cli.add_option("--seed", seed, "Random seed");
  cli.add_option("--out", out_dir, "Output directory");
  cli.add_option("--protocol", protocol, "sinusoid | diharmonic | noise | protocol file");
  cli.add_option("--observed", observed, "Observed firing-rate CSV (fit, simulate)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    const int code = cli.exit(e, out, msg);
    err << msg.str();
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config = config_path.empty()
                           ? config_from_json(nlohmann::json::object(), ".")
                           : load_config(config_path);
    if (*seed_opt) config.seed = seed;
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (!protocol.empty()) config.protocol = protocol;
    if (!observed.empty()) config.observed_csv = observed;

    if (command == "mesh") {
      cmd_mesh(config, out, err);
    } else if (command == "simulate") {
      cmd_simulate(config, out, err);
    } else if (command == "fit") {
      cmd_fit(config, out, err);
    } else if (!cmd_validate(config, out, err)) {
      return 1;
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace afferentsim::app
