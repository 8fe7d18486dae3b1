// Command-line front end: fvc {validate|synth|run} --config FILE

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fvc/error.hpp"
#include "fvc/pipeline.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Forensic voice comparison: scoring, LR calibration and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::vector<std::string> systems;
  std::optional<std::uint64_t> seed;

  auto* validate = app.add_subcommand("validate", "check a manifest and its embeddings");
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  auto* run_cmd = app.add_subcommand("run", "score, calibrate, evaluate and plot");
  for (auto* sub : {validate, synth, run_cmd}) {
    sub->add_option("-c,--config", config_path, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
  }
  synth->add_option("--seed", seed, "override the configured seed");
  run_cmd->add_option("--system", systems, "restrict to these systems (SYS1..SYS4)");
  run_cmd->add_option("-o,--output-dir", output_dir, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto config = fvc::load_config(config_path);
  fvc::apply_env_overrides(config);

  if (validate->parsed()) {
    std::cout << fvc::format_summary(fvc::cmd_validate(config));
    return 0;
  }
  if (synth->parsed()) {
    if (seed) config.seed = *seed;
    std::cout << fvc::format_summary(fvc::cmd_synth(config));
    std::cout << fmt::format("wrote {} and {}\n", config.manifest.string(),
                             config.embeddings.string());
    return 0;
  }

  if (!output_dir.empty()) config.output_dir = output_dir;
  if (!systems.empty()) {
    config.systems.clear();
    for (const auto& s : systems) {
      const auto tag = fvc::parse_system_tag(s);
      if (!tag) {
        throw fvc::Error(fvc::ErrorKind::kArgument, fmt::format("unknown system '{}'", s));
      }
      config.systems.push_back(*tag);
    }
    fvc::validate_config(config);
  }
  const auto result = fvc::cmd_run(config);
  int code = 0;
  for (const auto& o : result.outcomes) {
    if (o.report) {
      std::cerr << fmt::format("{}: done\n", fvc::to_string(o.system));
    } else {
      std::cerr << fmt::format("error: {}\n", o.error);
      if (code == 0) code = o.exit_code;
    }
  }
  std::cout << result.table_text;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const fvc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
