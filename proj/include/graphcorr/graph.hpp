#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace graphcorr {

// One directed edge.  `src` is the source vertex s(e), `dst` the range r(e).
struct Edge {
  std::string id;
  std::string src;
  std::string dst;
};

/// A finite directed graph G = (G0, G1, r, s).  Vertex and edge order is the
/// input order; every index-based API below refers to that order.  Parallel
/// edges and loops are allowed.
class DirectedGraph {
 public:
  // Validates and builds.  Throws std::invalid_argument naming the first
  // violated invariant: empty vertex set, duplicate vertex id, duplicate
  // edge id, dangling endpoint.
  static DirectedGraph validated(std::vector<std::string> vertices,
                                 std::vector<Edge> edges);

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::string& vertex(int i) const { return vertices_[i]; }
  const Edge& edge(int i) const { return edges_[i]; }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  int vertex_index(const std::string& id) const;  // -1 when absent
  int edge_index(const std::string& id) const;    // -1 when absent

  int src(int e) const { return src_[e]; }  // s(e)
  int dst(int e) const { return dst_[e]; }  // r(e)

  // Edges with s(e) = v / r(e) = v, in input order.
  const std::vector<int>& edges_from(int v) const { return out_[v]; }
  const std::vector<int>& edges_into(int v) const { return in_[v]; }

  bool operator==(const DirectedGraph& o) const;

 private:
  DirectedGraph() = default;
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  std::vector<int> src_, dst_;
  std::vector<std::vector<int>> out_, in_;
};

using GraphPtr = std::shared_ptr<const DirectedGraph>;

GraphPtr make_graph(std::vector<std::string> vertices, std::vector<Edge> edges);

// Graph isomorphism witness: beta on vertices, alpha on edges, both as
// index maps G -> F satisfying s(alpha(e)) = beta(s(e)) and
// r(alpha(e)) = beta(r(e)).
struct GraphIsoCertificate {
  std::vector<int> beta;
  std::vector<int> alpha;
};

// A bijection of a named point set onto itself.
struct VertexPermutation {
  std::vector<std::string> points;
  std::vector<int> map;  // sigma: index -> index

  static VertexPermutation identity(std::vector<std::string> points);
  static VertexPermutation from_one_line(std::vector<std::string> points,
                                         std::vector<int> images);
  VertexPermutation inverse() const;
  int size() const { return static_cast<int>(map.size()); }
};

// Replays both compatibility equations over every edge.
bool iso_certificate_valid(const DirectedGraph& g, const DirectedGraph& f,
                           const GraphIsoCertificate& cert);

// Backtracking search over vertex assignments ordered by degree signature,
// pruned by per-pair parallel edge counts.  Deterministic for fixed input
// order; parallel edges are matched individually in input order.
std::optional<GraphIsoCertificate> graph_isomorphism(const DirectedGraph& g,
                                                     const DirectedGraph& f);

// The permutation graph G_sigma: one vertex per point, one edge e_x per
// point x with s(e_x) = sigma(x) and r(e_x) = x.
DirectedGraph permutation_graph(const VertexPermutation& sigma);

// B[v][w] = #edges with r(e) = v and s(e) = w.  Entries of B^n count the
// composable paths of length n.
Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> composability_matrix(
    const DirectedGraph& g);

}  // namespace graphcorr
