// Built-in experiment presets. configs/*.json hold the same documents.

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distq/errors.h"
#include "distq/experiment/config.h"

namespace distq::experiment {

namespace {

// Benchmark plant: two states, one input, w ~ N(1, 0.1), step size
// (1/(k+2))^0.6, 200 iterations on four sensors. The benchmark does not pin
// down the network topology; ring:4 is an assumption.
constexpr std::string_view kPaperSec4 = R"({
  "version": 1,
  "name": "paper_sec4",
  "system": {
    "A": [[0.2, 0.0], [0.0, 0.6]],
    "A_bar": [[0.7, 0.0], [0.0, 0.8]],
    "B": [[0.7], [0.3]],
    "B_bar": [[0.1], [0.7]],
    "Q": [[0.4, 0.0], [0.0, 0.7]],
    "R": 1.0
  },
  "noise": {"law": "gaussian", "mu": 1.0, "sigma2": 0.1},
  "rng": "mt19937_64-boxmuller",
  "schedule": {"exponent": 0.6, "offset": 2, "scale": 1.0},
  "graph": "ring:4",
  "gain_mode": "uniform",
  "consensus_weight": null,
  "rounds": 200,
  "seeds": [0],
  "shared_noise": true,
  "init": "diag",
  "output_dir": "out/paper_sec4",
  "oracle": {"tol": 1e-12, "max_iter": 100000},
  "validation": {"x0": [1.0, 1.0], "horizon": 400, "n_runs": 2000}
}
)";

constexpr std::string_view kDeterministicPlant = R"({
  "version": 1,
  "name": "deterministic_plant",
  "system": {
    "A": [[0.2, 0.0], [0.0, 0.6]],
    "A_bar": [[0.0, 0.0], [0.0, 0.0]],
    "B": [[0.7], [0.3]],
    "B_bar": [[0.0], [0.0]],
    "Q": [[0.4, 0.0], [0.0, 0.7]],
    "R": 1.0
  },
  "noise": {"law": "gaussian", "mu": 0.0, "sigma2": 0.0},
  "rng": "mt19937_64-boxmuller",
  "schedule": {"exponent": 0.6, "offset": 2, "scale": 1.0},
  "graph": "ring:4",
  "gain_mode": "uniform",
  "rounds": 10000,
  "seeds": [0],
  "shared_noise": true,
  "init": "spread",
  "output_dir": "out/deterministic_plant",
  "validation": {"x0": [1.0, 1.0], "horizon": 400, "n_runs": 100}
}
)";

constexpr std::string_view kScalarDeterministic = R"({
  "version": 1,
  "name": "scalar_deterministic",
  "system": {"A": 1.0, "A_bar": 0.0, "B": 1.0, "B_bar": 0.0, "Q": 1.0, "R": 1.0},
  "noise": {"law": "gaussian", "mu": 0.0, "sigma2": 0.0},
  "schedule": {"exponent": 0.6, "offset": 2, "scale": 1.0},
  "graph": "ring:4",
  "rounds": 2000,
  "seeds": [0],
  "output_dir": "out/scalar_deterministic",
  "validation": {"x0": [1.0], "horizon": 200, "n_runs": 10}
}
)";

constexpr std::string_view kZeroDynamics = R"({
  "version": 1,
  "name": "zero_dynamics",
  "system": {
    "A": [[0.0, 0.0], [0.0, 0.0]],
    "A_bar": [[0.0, 0.0], [0.0, 0.0]],
    "B": [[0.0], [0.0]],
    "B_bar": [[0.0], [0.0]],
    "Q": [[1.0, 0.0], [0.0, 1.0]],
    "R": 1.0
  },
  "noise": {"law": "gaussian", "mu": 1.0, "sigma2": 0.1},
  "graph": "ring:4",
  "rounds": 50,
  "seeds": [0],
  "output_dir": "out/zero_dynamics",
  "validation": {"x0": [1.0, 1.0], "horizon": 50, "n_runs": 10}
}
)";

constexpr std::string_view kSingleSensor = R"({
  "version": 1,
  "name": "single_sensor",
  "system": {
    "A": [[0.2, 0.0], [0.0, 0.6]],
    "A_bar": [[0.7, 0.0], [0.0, 0.8]],
    "B": [[0.7], [0.3]],
    "B_bar": [[0.1], [0.7]],
    "Q": [[0.4, 0.0], [0.0, 0.7]],
    "R": 1.0
  },
  "noise": {"law": "gaussian", "mu": 1.0, "sigma2": 0.1},
  "graph": "single",
  "rounds": 200,
  "seeds": [0],
  "output_dir": "out/single_sensor",
  "validation": {"x0": [1.0, 1.0], "horizon": 400, "n_runs": 2000}
}
)";

constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kPresets{{
    {"paper_sec4", kPaperSec4},
    {"deterministic_plant", kDeterministicPlant},
    {"scalar_deterministic", kScalarDeterministic},
    {"zero_dynamics", kZeroDynamics},
    {"single_sensor", kSingleSensor},
}};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : kPresets) names.emplace_back(name);
  return names;
}

std::string_view preset_text(std::string_view name) {
  for (const auto& [preset, text] : kPresets) {
    if (preset == name) return text;
  }
  throw ParseError("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig load_preset(std::string_view name) {
  return parse_config(preset_text(name), "preset " + std::string(name));
}

}  // namespace distq::experiment
