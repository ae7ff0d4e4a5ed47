// Command-line front end: distq {oracle | run | validate-controller}.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "distq/errors.h"
#include "distq/experiment/commands.h"
#include "distq/experiment/config.h"

namespace {

namespace ex = distq::experiment;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("distq");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("QLEARN_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::string(level) != "off") {
      spdlog::warn("QLEARN_LOG='{}' is not a log level; using info", level);
    } else {
      spdlog::set_level(parsed);
    }
  }
}

struct Inputs {
  std::string config_path;
  std::string preset;
  std::string seeds;
  std::string out;
  std::optional<std::size_t> rounds;
};

void add_common_options(CLI::App& cmd, Inputs& in) {
  auto* config = cmd.add_option("--config", in.config_path, "Experiment config (JSON)");
  auto* preset = cmd.add_option("--preset", in.preset, "Built-in preset")
                     ->check(CLI::IsMember(ex::preset_names()));
  config->excludes(preset);
  preset->excludes(config);
  cmd.add_option("--seeds", in.seeds, "Seed count N (seeds 0..N-1) or list a,b,c");
  cmd.add_option("--out", in.out, "Output directory");
  cmd.add_option("--rounds", in.rounds, "Override the number of iterations");
}

ex::ExperimentConfig resolve(const Inputs& in) {
  if (in.config_path.empty() && in.preset.empty()) {
    throw distq::ParseError("one of --config or --preset is required");
  }
  ex::ExperimentConfig cfg =
      in.preset.empty() ? ex::load_config(in.config_path) : ex::load_preset(in.preset);
  if (!in.seeds.empty()) cfg.seeds = ex::parse_seed_list(in.seeds);
  if (in.rounds) {
    if (*in.rounds < 1) throw distq::ValidationError({"rounds must be >= 1"});
    cfg.rounds = *in.rounds;
  }
  if (!in.out.empty()) cfg.output_dir = in.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Distributed Q-learning for LQ control with multiplicative noise"};
  app.require_subcommand(1);

  Inputs oracle_in;
  auto* oracle = app.add_subcommand("oracle", "Solve for G*, P and K*; writes oracle.json");
  add_common_options(*oracle, oracle_in);

  Inputs run_in;
  std::string mode = "distributed";
  auto* run = app.add_subcommand("run", "Run the learners; writes traces, plots and summary.json");
  add_common_options(*run, run_in);
  run->add_option("--mode", mode, "centralized | distributed | both")
      ->check(CLI::IsMember({"centralized", "distributed", "both"}));

  Inputs ctl_in;
  std::string source = "run";
  std::string summary_path;
  auto* ctl = app.add_subcommand("validate-controller",
                                 "Check a learned gain against K*; writes controller_report.json");
  add_common_options(*ctl, ctl_in);
  ctl->add_option("--gain-source", source, "run | oracle | summary")
      ->check(CLI::IsMember({"run", "oracle", "summary"}));
  ctl->add_option("--summary", summary_path, "summary.json to read with --gain-source summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kExitValidation;
  }

  try {
    if (oracle->parsed()) {
      const auto cfg = resolve(oracle_in);
      return ex::cmd_oracle(cfg, cfg.output_dir);
    }
    if (run->parsed()) {
      const auto cfg = resolve(run_in);
      return ex::cmd_run(cfg, ex::parse_run_mode(mode), cfg.output_dir);
    }
    const auto cfg = resolve(ctl_in);
    ex::ControllerOptions options;
    options.source = ex::parse_gain_source(source);
    options.summary_path = summary_path;
    if (options.source == ex::GainSource::kSummary && summary_path.empty()) {
      throw distq::ParseError("--gain-source summary requires --summary PATH");
    }
    return ex::cmd_validate_controller(cfg, options, cfg.output_dir);
  } catch (const distq::ValidationError& e) {
    spdlog::error("{}", e.what());
    return ex::kExitValidation;
  } catch (const distq::ParseError& e) {
    spdlog::error("{}", e.what());
    return ex::kExitValidation;
  } catch (const distq::BadSpec& e) {
    spdlog::error("{}", e.what());
    return ex::kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return ex::kExitFailure;
  }
}
