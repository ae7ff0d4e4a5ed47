#include "distq/experiment/config.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "distq/errors.h"
#include "distq/sampling.h"

namespace distq::experiment {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& source, const std::string& field,
                              const std::string& what) {
  throw ParseError(source + ": field '" + field + "': " + what);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& source, const std::string& prefix) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) field_error(source, prefix + key, "unknown key");
  }
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double read_number(const json& value, const std::string& source, const std::string& field) {
  if (!value.is_number()) field_error(source, field, "expected a number");
  return value.get<double>();
}

std::uint64_t read_count(const json& value, const std::string& source, const std::string& field) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
    field_error(source, field, "expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

bool read_bool(const json& value, const std::string& source, const std::string& field) {
  if (!value.is_boolean()) field_error(source, field, "expected true or false");
  return value.get<bool>();
}

std::string read_string(const json& value, const std::string& source, const std::string& field) {
  if (!value.is_string()) field_error(source, field, "expected a string");
  return value.get<std::string>();
}

// A number is a 1x1 matrix; otherwise a row-major list of equal-length rows.
Eigen::MatrixXd read_matrix(const json& value, const std::string& source,
                            const std::string& field) {
  if (value.is_number()) return Eigen::MatrixXd::Constant(1, 1, value.get<double>());
  if (!value.is_array() || value.empty() || !value.front().is_array()) {
    field_error(source, field, "expected a number or a nested list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(value.size());
  const auto cols = static_cast<Eigen::Index>(value.front().size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = value[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      field_error(source, field, "rows must be lists of equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(r, c) = read_number(row[static_cast<std::size_t>(c)], source, field);
    }
  }
  return M;
}

Eigen::VectorXd read_vector(const json& value, const std::string& source,
                            const std::string& field) {
  if (value.is_number()) return Eigen::VectorXd::Constant(1, value.get<double>());
  if (!value.is_array() || value.empty()) field_error(source, field, "expected a list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = read_number(value[i], source, field);
  }
  return v;
}

bool symmetric_pd(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, M.norm())) return false;
  return Eigen::LLT<Eigen::MatrixXd>(M).info() == Eigen::Success;
}

void validate_system(const SystemModel& sys, std::vector<std::string>& violations) {
  const auto n = sys.A.rows();
  const auto m = sys.B.cols();
  if (sys.A.cols() != n) violations.push_back("A must be square");
  if (sys.A_bar.rows() != n || sys.A_bar.cols() != n) violations.push_back("A_bar must be n x n");
  if (sys.B.rows() != n) violations.push_back("B must have n rows");
  if (sys.B_bar.rows() != n || sys.B_bar.cols() != m) violations.push_back("B_bar must be n x m");
  if (sys.Q.rows() != n || sys.Q.cols() != n) {
    violations.push_back("Q must be n x n");
  } else if (!symmetric_pd(sys.Q)) {
    violations.push_back("Q must be positive definite");
  }
  if (sys.R.rows() != m || sys.R.cols() != m) {
    violations.push_back("R must be m x m");
  } else if (!symmetric_pd(sys.R)) {
    violations.push_back("R must be positive definite");
  }
}

}  // namespace

DistributedOptions ExperimentConfig::distributed_options() const {
  return DistributedOptions{shared_noise, consensus_weight, init};
}

ExperimentConfig parse_config(std::string_view text, std::string_view source_view) {
  const std::string source(source_view);
  json doc;
  try {
    doc = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
  reject_unknown_keys(doc,
                      {"version", "name", "system", "noise", "rng", "schedule", "graph",
                       "gain_mode", "consensus_weight", "rounds", "seeds", "shared_noise", "init",
                       "output_dir", "oracle", "validation"},
                      source, "");

  ExperimentConfig cfg;
  std::vector<std::string> violations;

  if (const json* v = find(doc, "version")) {
    if (read_count(*v, source, "version") != kConfigVersion) {
      violations.push_back("unsupported config version (expected " +
                           std::to_string(kConfigVersion) + ")");
    }
  }
  if (const json* v = find(doc, "name")) cfg.name = read_string(*v, source, "name");

  const json* system = find(doc, "system");
  if (system == nullptr || !system->is_object()) field_error(source, "system", "required object");
  reject_unknown_keys(*system, {"A", "A_bar", "B", "B_bar", "Q", "R"}, source, "system.");
  for (const char* key : {"A", "A_bar", "B", "B_bar", "Q", "R"}) {
    if (find(*system, key) == nullptr) field_error(source, std::string("system.") + key, "required");
  }
  cfg.system.A = read_matrix(system->at("A"), source, "system.A");
  cfg.system.A_bar = read_matrix(system->at("A_bar"), source, "system.A_bar");
  cfg.system.B = read_matrix(system->at("B"), source, "system.B");
  cfg.system.B_bar = read_matrix(system->at("B_bar"), source, "system.B_bar");
  cfg.system.Q = read_matrix(system->at("Q"), source, "system.Q");
  cfg.system.R = read_matrix(system->at("R"), source, "system.R");
  validate_system(cfg.system, violations);

  const json* noise = find(doc, "noise");
  if (noise == nullptr || !noise->is_object()) field_error(source, "noise", "required object");
  reject_unknown_keys(*noise, {"law", "mu", "sigma2"}, source, "noise.");
  if (const json* law = find(*noise, "law")) {
    if (read_string(*law, source, "noise.law") != "gaussian") {
      violations.push_back("noise.law must be \"gaussian\"");
    }
  }
  if (find(*noise, "mu") == nullptr) field_error(source, "noise.mu", "required");
  if (find(*noise, "sigma2") == nullptr) field_error(source, "noise.sigma2", "required");
  cfg.noise.mu = read_number(noise->at("mu"), source, "noise.mu");
  cfg.noise.sigma2 = read_number(noise->at("sigma2"), source, "noise.sigma2");
  if (!(cfg.noise.sigma2 >= 0.0)) violations.push_back("noise.sigma2 must be >= 0");

  if (const json* v = find(doc, "rng")) {
    if (read_string(*v, source, "rng") != kRngFamily) {
      violations.push_back(std::string("rng must be \"") + kRngFamily + "\"");
    }
  }

  if (const json* sched = find(doc, "schedule")) {
    if (!sched->is_object()) field_error(source, "schedule", "expected an object");
    reject_unknown_keys(*sched, {"exponent", "offset", "scale"}, source, "schedule.");
    if (const json* v = find(*sched, "exponent")) {
      cfg.schedule.exponent = read_number(*v, source, "schedule.exponent");
    }
    if (const json* v = find(*sched, "offset")) {
      cfg.schedule.offset = read_count(*v, source, "schedule.offset");
    }
    if (const json* v = find(*sched, "scale")) {
      cfg.schedule.scale = read_number(*v, source, "schedule.scale");
    }
  }
  try {
    cfg.schedule.validate();
  } catch (const BadSpec& e) {
    violations.push_back(e.what());
  }

  if (const json* v = find(doc, "consensus_weight"); v != nullptr && !v->is_null()) {
    cfg.consensus_weight = read_number(*v, source, "consensus_weight");
  }
  cfg.graph_descriptor = "ring:4";
  if (const json* v = find(doc, "graph")) cfg.graph_descriptor = read_string(*v, source, "graph");
  try {
    cfg.graph = build_graph(cfg.graph_descriptor);
    consensus_operator(cfg.graph, cfg.consensus_weight);
  } catch (const NotContractive& e) {
    violations.push_back(e.what());
  } catch (const Error& e) {
    violations.push_back("graph: " + std::string(e.what()));
  }

  if (const json* v = find(doc, "gain_mode")) {
    try {
      cfg.gain_mode = parse_gain_mode(read_string(*v, source, "gain_mode"));
    } catch (const BadSpec& e) {
      violations.push_back(e.what());
    }
  }
  if (const json* v = find(doc, "rounds")) cfg.rounds = read_count(*v, source, "rounds");
  if (cfg.rounds < 1) violations.push_back("rounds must be >= 1");

  if (const json* v = find(doc, "seeds")) {
    if (v->is_array()) {
      cfg.seeds.clear();
      for (const auto& s : *v) cfg.seeds.push_back(read_count(s, source, "seeds"));
    } else {
      const auto count = read_count(*v, source, "seeds");
      cfg.seeds.clear();
      for (std::uint64_t s = 0; s < count; ++s) cfg.seeds.push_back(s);
    }
  }
  if (cfg.seeds.empty()) violations.push_back("seeds must not be empty");

  if (const json* v = find(doc, "shared_noise")) {
    cfg.shared_noise = read_bool(*v, source, "shared_noise");
  }
  if (const json* v = find(doc, "init")) {
    try {
      cfg.init = parse_init_mode(read_string(*v, source, "init"));
    } catch (const BadSpec& e) {
      violations.push_back(e.what());
    }
  }
  if (const json* v = find(doc, "output_dir")) {
    cfg.output_dir = read_string(*v, source, "output_dir");
  }

  if (const json* oracle = find(doc, "oracle")) {
    if (!oracle->is_object()) field_error(source, "oracle", "expected an object");
    reject_unknown_keys(*oracle, {"tol", "max_iter"}, source, "oracle.");
    if (const json* v = find(*oracle, "tol")) cfg.oracle_tol = read_number(*v, source, "oracle.tol");
    if (const json* v = find(*oracle, "max_iter")) {
      cfg.oracle_max_iter = read_count(*v, source, "oracle.max_iter");
    }
  }
  if (!(cfg.oracle_tol > 0.0)) violations.push_back("oracle.tol must be > 0");
  if (cfg.oracle_max_iter < 1) violations.push_back("oracle.max_iter must be >= 1");

  cfg.x0 = Eigen::VectorXd::Ones(cfg.system.A.rows());
  if (const json* val = find(doc, "validation")) {
    if (!val->is_object()) field_error(source, "validation", "expected an object");
    reject_unknown_keys(*val, {"x0", "horizon", "n_runs"}, source, "validation.");
    if (const json* v = find(*val, "x0")) cfg.x0 = read_vector(*v, source, "validation.x0");
    if (const json* v = find(*val, "horizon")) {
      cfg.mc_horizon = read_count(*v, source, "validation.horizon");
    }
    if (const json* v = find(*val, "n_runs")) {
      cfg.mc_runs = read_count(*v, source, "validation.n_runs");
    }
  }
  if (cfg.x0.size() != cfg.system.A.rows()) violations.push_back("validation.x0 must have n entries");
  if (cfg.mc_horizon < 1) violations.push_back("validation.horizon must be >= 1");
  if (cfg.mc_runs < 2) violations.push_back("validation.n_runs must be >= 2");

  if (!violations.empty()) throw ValidationError(std::move(violations));

  if (cfg.gain_mode == GainMode::kMasked &&
      cfg.schedule.scale * static_cast<double>(cfg.graph.N) > 1.0) {
    spdlog::warn("{}: masked gains with schedule scale {} on {} sensors give local steps above 1;"
                 " consider scale <= {}",
                 source, cfg.schedule.scale, cfg.graph.N, 1.0 / static_cast<double>(cfg.graph.N));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto parse_one = [&](std::string_view item) {
    std::uint64_t value = 0;
    const auto* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, value);
    if (item.empty() || ec != std::errc() || ptr != end) {
      throw ParseError("malformed seed list '" + std::string(text) + "'");
    }
    return value;
  };
  std::vector<std::uint64_t> seeds;
  if (text.find(',') == std::string_view::npos) {
    const auto count = parse_one(text);
    for (std::uint64_t s = 0; s < count; ++s) seeds.push_back(s);
  } else {
    while (!text.empty()) {
      const auto comma = text.find(',');
      seeds.push_back(parse_one(text.substr(0, comma)));
      text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    }
  }
  if (seeds.empty()) throw ParseError("seed list must not be empty");
  return seeds;
}

}  // namespace distq::experiment
