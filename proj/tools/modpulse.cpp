#include "modpulse/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  CLI::App app{"Modulating pulses in periodic media: bands, conditions, normal forms, orbits and simulations"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool force = false;
  const std::map<std::string, std::string> help = {
      {"bands", "band structure over the quasimomentum grid"},
      {"check", "non-degeneracy and non-resonance conditions"},
      {"envelope", "NLS constants and initial data"},
      {"spectrum", "spatial-dynamics spectra and resolvent bounds"},
      {"jordan", "Jordan chain and projector at the double zero"},
      {"normalform", "near-identity transformation steps"},
      {"homoclinic", "reversible homoclinic orbit of the reduced system"},
      {"simulate", "wave equation run with envelope diagnostics"},
      {"pipeline", "all stages in order with a manifest"},
  };
  for (const auto& name : modpulse::command_names()) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides outputs.directory)");
    sub->add_option("--seed", seed, "seed for random test vectors (overrides the config)");
    sub->add_flag("--force", force, "continue the pipeline past a failed check");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  modpulse::CommandOptions opts;
  opts.out = out_dir;
  opts.force = force;
  for (auto* sub : app.get_subcommands()) {
    opts.has_seed = sub->count("--seed") > 0;
    opts.seed = seed;
    return modpulse::run_command_file(sub->get_name(), config_path, opts, std::cerr);
  }
  return 2;
}
