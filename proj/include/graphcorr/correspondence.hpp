#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "graphcorr/algebra.hpp"

namespace graphcorr {

// Element of the graph correspondence E: one complex coefficient per edge.
// Actions: (a.x.b)(e) = a(r(e)) x(e) b(s(e)); inner product
// <x,y>_A(v) = sum_{s(e)=v} conj(x(e)) y(e).
struct CorrElement {
  GraphPtr graph;
  Eigen::VectorXcd coeffs;

  static CorrElement zero(GraphPtr g);
  static CorrElement delta(GraphPtr g, int e);
};

CorrElement corr_add(const CorrElement& x, const CorrElement& y);
CorrElement corr_scale(Cplx c, const CorrElement& x);
CorrElement bimodule_action(const AlgebraElement& a, const CorrElement& x,
                            const AlgebraElement& b);
AlgebraElement corr_inner_product(const CorrElement& x, const CorrElement& y);
double corr_norm(const CorrElement& x);

// A composable edge sequence (e1,...,en) with s(e_k) = r(e_{k+1}); a path of
// length 0 is a bare vertex.  base_vertex is s(e_n) for nonempty paths.
struct Path {
  int base_vertex = -1;
  std::vector<int> edges;

  int length() const { return static_cast<int>(edges.size()); }
  int range(const DirectedGraph& g) const {
    return edges.empty() ? base_vertex : g.dst(edges.front());
  }
  int source() const { return base_vertex; }
  bool operator==(const Path& o) const {
    return base_vertex == o.base_vertex && edges == o.edges;
  }
  bool operator<(const Path& o) const {  // lexicographic by edge sequence
    if (edges != o.edges) return edges < o.edges;
    return base_vertex < o.base_vertex;
  }
};

// All composable paths of length n, lexicographic by edge index sequence.
// n = 0 yields the vertices in input order.
std::vector<Path> path_basis(const DirectedGraph& g, int n);

// Element of E^{(x) n} in the path basis; level 0 is an AlgebraElement.
struct TensorElement {
  GraphPtr graph;
  int level = 0;
  Eigen::VectorXcd coeffs;  // over path_basis(graph, level)

  static TensorElement zero(GraphPtr g, int level);
};

TensorElement tensor_from_algebra(const AlgebraElement& a);
TensorElement expand_elementary_tensor(std::span<const CorrElement> factors);
AlgebraElement tensor_inner_product(const TensorElement& u,
                                    const TensorElement& w);

}  // namespace graphcorr
