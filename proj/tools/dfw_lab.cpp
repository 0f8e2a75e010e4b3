// Command-line front end: run experiments, transfer evaluation, dump presets.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dfw/harness.hpp"

namespace {

dfw::ExperimentConfig load(const std::string& path, const std::string& out_override) {
  dfw::ExperimentConfig c = dfw::config_from_json(dfw::read_json_file(path));
  if (!out_override.empty()) c.output_dir = out_override;
  return c;
}

int cmd_run(const std::string& path, const std::string& out) {
  const dfw::ExperimentConfig c = load(path, out);
  const dfw::ExperimentSummary s = dfw::run_experiment(c);
  for (const auto& curve : s.curves) {
    fmt::print("{:<20} final dist {:.4e}  [{:.4e}, {:.4e}]\n", curve.name, curve.mean.back(),
               curve.lower.back(), curve.upper.back());
  }
  fmt::print("wrote {}\n", c.output_dir.string());
  return 0;
}

int cmd_transfer(const std::string& path, const std::string& out) {
  const dfw::ExperimentConfig c = load(path, out);
  for (const auto& row : dfw::run_transfer_eval(c)) {
    fmt::print("N'={:<6} mean sq error {:.4e} (se {:.2e}, {} trials)\n", row.n_prime, row.mean_sq_error,
               row.stderr_sq_error, row.trials);
  }
  return 0;
}

int cmd_presets(const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : dfw::presets()) {
    const auto file = std::filesystem::path(dir) / fmt::format("{}.json", dfw::to_string(p.setting));
    dfw::write_json_file(file, dfw::config_to_json(p));
    fmt::print("{}\n", file.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task representation learning experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  auto* run = app.add_subcommand("run", "train all variants and write curves");
  run->add_option("-c,--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out, "override output_dir");

  auto* transfer = app.add_subcommand("transfer", "fine-tune on the held-out task");
  transfer->add_option("-c,--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
  transfer->add_option("-o,--output", out, "override output_dir");

  std::string preset_dir = "configs";
  auto* presets = app.add_subcommand("presets", "write the reference configs");
  presets->add_option("-d,--dir", preset_dir, "destination directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out);
    if (*transfer) return cmd_transfer(config, out);
    if (*presets) return cmd_presets(preset_dir);
  } catch (const dfw::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
