#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace distq {

/// Undirected, connected graph on N sensors. Vertices are 0-based
/// internally; topology descriptors use 1-based labels.
struct Graph {
  std::size_t N = 0;
  /// Unordered pairs stored with first < second, sorted, no duplicates.
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::vector<std::vector<std::size_t>> neighbors() const;
  std::size_t max_degree() const;
  bool connected() const;
};

/// Parses a topology descriptor and builds the graph:
///   "ring:N", "path:N", "complete:N", "star:N" (N >= 2),
///   "edges:1-2,2-3,..." (vertex count = largest label),
///   "single" (one sensor, no edges).
/// Throws BadSpec on malformed descriptors and Disconnected when the edge set
/// does not connect all vertices.
Graph build_graph(std::string_view descriptor);

/// Builds a graph from an explicit 0-based edge list on N vertices.
Graph graph_from_edges(std::size_t N, std::vector<std::pair<std::size_t, std::size_t>> edges);

/// Graph Laplacian L = D - Adj.
Eigen::MatrixXd laplacian(const Graph& g);

/// Mixing operator I - w L and its contraction factor on the disagreement
/// subspace.
struct ConsensusOperator {
  Eigen::MatrixXd laplacian;
  double weight = 0.0;
  Eigen::MatrixXd mixing;
  double lambda_max = 0.0;
  /// max |1 - w lambda_i| over the nonzero Laplacian eigenvalues.
  double rho = 0.0;
};

/// Default weight is 1 / (d_max + 1). Throws NotContractive when
/// w * lambda_max(L) >= 2 and BadSpec when w <= 0.
ConsensusOperator consensus_operator(const Graph& g, std::optional<double> weight = std::nullopt);

enum class GainMode { kUniform, kMasked };

std::string_view to_string(GainMode mode);
GainMode parse_gain_mode(std::string_view text);

/// Per-sensor innovation gains L_1..L_N with sum_i L_i = N I.
///
/// Every L_i is diagonal with integer entries. In masked mode coordinate c of
/// the Q-factor is owned by sensor (c mod N), which gets weight N on it; a
/// sensor may own no coordinate when N > n + m.
struct GainAllocation {
  GainMode mode = GainMode::kUniform;
  std::size_t N = 0;
  std::size_t dim = 0;
  std::vector<Eigen::VectorXd> diagonals;

  Eigen::MatrixXd matrix(std::size_t sensor) const;
  /// L_i Y.
  Eigen::MatrixXd apply(std::size_t sensor, const Eigen::MatrixXd& Y) const;
};

GainAllocation allocate_gains(const Graph& g, int n, int m, GainMode mode);

}  // namespace distq
