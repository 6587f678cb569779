// celab: command-line front end for the connection-establishment lab.
// Exit codes: 0 success, 1 check/verification failure, 2 configuration error.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "celab/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run(const std::string& name, const CommonArgs& args) {
  using namespace celab::harness;
  ScenarioConfig config;
  try {
    if (!args.config_path.empty()) config = load_config(args.config_path);
    if (args.seed_set) config.seed = args.seed;
    config.validate();

    const auto result = run_subcommand(name, config, args.format);
    if (!args.out_path.empty()) {
      std::filesystem::path out(args.out_path);
      if (const char* dir = std::getenv("CELAB_OUT_DIR"); dir && *dir) {
        out = std::filesystem::path(dir) / out.filename();
      }
      write_file_atomic(out.string(), result.report);
    } else {
      std::cout << result.report;
    }
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wi-Fi connection-establishment defense lab"};
  app.require_subcommand(1);

  struct SubEntry {
    CLI::App* cmd;
    CommonArgs args;
    std::string name;
  };
  std::vector<std::unique_ptr<SubEntry>> entries;

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"ber-sweep", "Monte Carlo bit-error-rate sweep over SNR"},
      {"sr-sweep", "Monte Carlo signature success-rate sweep over SNR"},
      {"relay-sim", "Generate benign vs. relayed inter-frame timing samples"},
      {"detect", "Train and evaluate a relay detector on synthetic timing data"},
      {"fsm-check", "Bounded model check of the CE state machines under attack"},
      {"pca", "SIG-field PCA classification of APs and frame types"},
      {"ce-run", "End-to-end connection establishment simulation"},
  };
  for (const auto& [name, help] : subs) {
    auto entry = std::make_unique<SubEntry>();
    entry->name = name;
    entry->cmd = app.add_subcommand(name, help);
    entry->cmd->add_option("--config", entry->args.config_path, "JSON scenario config");
    entry->cmd->add_option("--out", entry->args.out_path,
                           "Output path (written atomically; default stdout)");
    entry->cmd->add_option("--format", entry->args.format, "Report format: csv or json");
    auto* seed_opt = entry->cmd->add_option("--seed", entry->args.seed, "Override config seed");
    entry->cmd->final_callback([e = entry.get(), seed_opt]() {
      e->args.seed_set = seed_opt->count() > 0;
    });
    entries.push_back(std::move(entry));
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& entry : entries) {
    if (entry->cmd->parsed()) return run(entry->name, entry->args);
  }
  return 2;
}
