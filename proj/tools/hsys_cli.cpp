// hsys: command-line front end.
//
//   hsys run experiment.cfg
//   hsys solve-ground --config base.cfg --nu 10 --out_dir out/
//   hsys constants --N 4 --lambda1 0.5 --lambda2 0.5 --s1 1 --s2 1 --s3 1 --alpha 1.4 --beta 1.4

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "hsys/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radial ground and bound states of coupled Hardy-Sobolev systems"};
  app.require_subcommand(1);

  std::string run_path;
  auto* run = app.add_subcommand("run", "run the command named in a config file");
  run->add_option("config", run_path, "config file")->required();

  struct Sub {
    CLI::App* app;
    std::string config;
    std::map<std::string, std::string> overrides;
  };
  const std::map<std::string, std::string> commands{
      {"constants", "print Hardy, Hardy-Sobolev and coupling constants"},
      {"validate", "check the hypotheses on the coupling weight"},
      {"solve-ground", "multi-start ground state on the Nehari manifold"},
      {"solve-mp", "mountain-pass bound state by path deformation"},
      {"sweep", "ground states over nu_list"},
      {"regime", "which existence statements apply"},
  };
  std::map<std::string, Sub> subs;
  for (const auto& [name, help] : commands) {
    auto& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.app->add_option("--config", s.config, "base config file; flags override its keys");
    for (const auto& key : hsys::config_keys())
      if (key != "command") s.app->add_option("--" + key, s.overrides[key], key);
  }

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return hsys::run_config(run_path, std::cout, std::cerr);

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    hsys::KeyValues kv;
    if (!s.config.empty()) {
      try {
        kv = hsys::read_key_values_file(s.config);
      } catch (const hsys::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hsys::exit_status(e);
      }
    }
    for (const auto& [key, value] : s.overrides)
      if (s.app->count("--" + key) > 0) kv[key] = value;
    kv["command"] = name;
    return hsys::run_key_values(kv, std::cout, std::cerr);
  }
  return hsys::kExitFailure;
}
