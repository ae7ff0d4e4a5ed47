#include "distq/network.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "distq/errors.h"

namespace distq {

namespace {

std::size_t parse_count(std::string_view text, std::string_view descriptor) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw BadSpec("malformed topology descriptor '" + std::string(descriptor) + "'");
  }
  return value;
}

Graph parse_edge_list(std::string_view body, std::string_view descriptor) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t N = 0;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const auto item = body.substr(0, comma);
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      throw BadSpec("malformed edge '" + std::string(item) + "' in '" + std::string(descriptor) +
                    "'");
    }
    const auto a = parse_count(item.substr(0, dash), descriptor);
    const auto b = parse_count(item.substr(dash + 1), descriptor);
    if (a == 0 || b == 0) throw BadSpec("edge labels are 1-based");
    if (a == b) throw BadSpec("self-loop on vertex " + std::to_string(a));
    edges.emplace_back(a - 1, b - 1);
    N = std::max({N, a, b});
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
  }
  if (N < 2) throw BadSpec("edge list needs at least two vertices");
  return graph_from_edges(N, std::move(edges));
}

}  // namespace

std::vector<std::vector<std::size_t>> Graph::neighbors() const {
  std::vector<std::vector<std::size_t>> adj(N);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (const auto& list : neighbors()) best = std::max(best, list.size());
  return best;
}

bool Graph::connected() const {
  if (N == 0) return false;
  const auto adj = neighbors();
  std::vector<bool> seen(N, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == N;
}

Graph graph_from_edges(std::size_t N, std::vector<std::pair<std::size_t, std::size_t>> edges) {
  if (N == 0) throw BadSpec("graph needs at least one vertex");
  for (auto& [a, b] : edges) {
    if (a >= N || b >= N) throw BadSpec("edge endpoint out of range");
    if (a == b) throw BadSpec("self-loop on vertex " + std::to_string(a + 1));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g{N, std::move(edges)};
  if (!g.connected()) throw Disconnected("graph on " + std::to_string(N) + " vertices is not connected");
  return g;
}

Graph build_graph(std::string_view descriptor) {
  if (descriptor == "single") return Graph{1, {}};
  const auto colon = descriptor.find(':');
  if (colon == std::string_view::npos) {
    throw BadSpec("malformed topology descriptor '" + std::string(descriptor) + "'");
  }
  const auto kind = descriptor.substr(0, colon);
  const auto body = descriptor.substr(colon + 1);
  if (kind == "edges") return parse_edge_list(body, descriptor);

  const auto N = parse_count(body, descriptor);
  if (N < 2) throw BadSpec("topology '" + std::string(descriptor) + "' needs N >= 2");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (kind == "path" || kind == "ring") {
    for (std::size_t i = 0; i + 1 < N; ++i) edges.emplace_back(i, i + 1);
    if (kind == "ring" && N > 2) edges.emplace_back(0, N - 1);
  } else if (kind == "complete") {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) edges.emplace_back(i, j);
    }
  } else if (kind == "star") {
    for (std::size_t i = 1; i < N; ++i) edges.emplace_back(0, i);
  } else {
    throw BadSpec("unknown topology '" + std::string(kind) + "'");
  }
  return graph_from_edges(N, std::move(edges));
}

Eigen::MatrixXd laplacian(const Graph& g) {
  const auto N = static_cast<Eigen::Index>(g.N);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
  for (const auto& [a, b] : g.edges) {
    const auto i = static_cast<Eigen::Index>(a);
    const auto j = static_cast<Eigen::Index>(b);
    L(i, j) = -1.0;
    L(j, i) = -1.0;
    L(i, i) += 1.0;
    L(j, j) += 1.0;
  }
  return L;
}

ConsensusOperator consensus_operator(const Graph& g, std::optional<double> weight) {
  if (!g.connected()) throw Disconnected("consensus requires a connected graph");
  ConsensusOperator op;
  op.laplacian = laplacian(g);
  op.weight = weight.value_or(1.0 / static_cast<double>(g.max_degree() + 1));
  if (!(op.weight > 0.0) || !std::isfinite(op.weight)) {
    throw BadSpec("consensus weight must be positive");
  }
  const auto N = op.laplacian.rows();
  op.mixing = Eigen::MatrixXd::Identity(N, N) - op.weight * op.laplacian;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.laplacian, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lambda = es.eigenvalues();  // ascending; lambda(0) = 0
  op.lambda_max = lambda(N - 1);
  if (op.weight * op.lambda_max >= 2.0) throw NotContractive(op.weight, op.lambda_max);
  op.rho = 0.0;
  for (Eigen::Index i = 1; i < N; ++i) {
    op.rho = std::max(op.rho, std::abs(1.0 - op.weight * lambda(i)));
  }
  return op;
}

std::string_view to_string(GainMode mode) {
  return mode == GainMode::kUniform ? "uniform" : "masked";
}

GainMode parse_gain_mode(std::string_view text) {
  if (text == "uniform") return GainMode::kUniform;
  if (text == "masked") return GainMode::kMasked;
  throw BadSpec("unknown gain mode '" + std::string(text) + "'");
}

Eigen::MatrixXd GainAllocation::matrix(std::size_t sensor) const {
  return diagonals.at(sensor).asDiagonal();
}

Eigen::MatrixXd GainAllocation::apply(std::size_t sensor, const Eigen::MatrixXd& Y) const {
  if (mode == GainMode::kUniform) return Y;
  return diagonals.at(sensor).asDiagonal() * Y;
}

GainAllocation allocate_gains(const Graph& g, int n, int m, GainMode mode) {
  GainAllocation alloc;
  alloc.mode = mode;
  alloc.N = g.N;
  alloc.dim = static_cast<std::size_t>(n + m);
  const auto dim = static_cast<Eigen::Index>(alloc.dim);
  if (mode == GainMode::kUniform) {
    alloc.diagonals.assign(g.N, Eigen::VectorXd::Ones(dim));
    return alloc;
  }
  alloc.diagonals.assign(g.N, Eigen::VectorXd::Zero(dim));
  for (Eigen::Index c = 0; c < dim; ++c) {
    alloc.diagonals[static_cast<std::size_t>(c) % g.N](c) = static_cast<double>(g.N);
  }
  return alloc;
}

}  // namespace distq
