#include "graphcorr/correspondence.hpp"

#include <stdexcept>

namespace graphcorr {

CorrElement CorrElement::zero(GraphPtr g) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(g->edge_count());
  return {std::move(g), std::move(c)};
}

CorrElement CorrElement::delta(GraphPtr g, int e) {
  CorrElement x = zero(std::move(g));
  x.coeffs(e) = 1.0;
  return x;
}

CorrElement corr_add(const CorrElement& x, const CorrElement& y) {
  require_same_graph(x.graph, y.graph);
  return {x.graph, x.coeffs + y.coeffs};
}

CorrElement corr_scale(Cplx c, const CorrElement& x) {
  return {x.graph, c * x.coeffs};
}

CorrElement bimodule_action(const AlgebraElement& a, const CorrElement& x,
                            const AlgebraElement& b) {
  require_same_graph(a.graph, x.graph);
  require_same_graph(x.graph, b.graph);
  const DirectedGraph& g = *x.graph;
  CorrElement y = CorrElement::zero(x.graph);
  for (int e = 0; e < g.edge_count(); ++e)
    y.coeffs(e) = a.coeffs(g.dst(e)) * x.coeffs(e) * b.coeffs(g.src(e));
  return y;
}

AlgebraElement corr_inner_product(const CorrElement& x, const CorrElement& y) {
  require_same_graph(x.graph, y.graph);
  const DirectedGraph& g = *x.graph;
  AlgebraElement a = AlgebraElement::zero(x.graph);
  for (int e = 0; e < g.edge_count(); ++e)
    a.coeffs(g.src(e)) += std::conj(x.coeffs(e)) * y.coeffs(e);
  return a;
}

double corr_norm(const CorrElement& x) {
  const DirectedGraph& g = *x.graph;
  double best = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    double sum = 0.0;
    for (int e : g.edges_from(v)) sum += std::norm(x.coeffs(e));
    best = std::max(best, sum);
  }
  return std::sqrt(best);
}

namespace {

void extend_paths(const DirectedGraph& g, std::vector<Path>& out,
                  std::vector<int>& prefix, int depth) {
  if (depth == 0) {
    Path p;
    p.edges = prefix;
    p.base_vertex = g.src(prefix.back());
    out.push_back(std::move(p));
    return;
  }
  // candidates must compose on the right: s(prefix.back()) = r(next);
  // edges_into(v) holds edge indices in increasing order, so appending in
  // that order keeps the whole enumeration lexicographic.
  const int v = g.src(prefix.back());
  for (int e : g.edges_into(v)) {
    prefix.push_back(e);
    extend_paths(g, out, prefix, depth - 1);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Path> path_basis(const DirectedGraph& g, int n) {
  if (n < 0) throw std::invalid_argument("negative tensor level");
  std::vector<Path> out;
  if (n == 0) {
    for (int v = 0; v < g.vertex_count(); ++v) out.push_back({v, {}});
    return out;
  }
  std::vector<int> prefix;
  for (int e = 0; e < g.edge_count(); ++e) {
    prefix.push_back(e);
    extend_paths(g, out, prefix, n - 1);
    prefix.pop_back();
  }
  return out;
}

TensorElement TensorElement::zero(GraphPtr g, int level) {
  const long dim = static_cast<long>(path_basis(*g, level).size());
  return {std::move(g), level, Eigen::VectorXcd::Zero(dim)};
}

TensorElement tensor_from_algebra(const AlgebraElement& a) {
  return {a.graph, 0, a.coeffs};
}

TensorElement expand_elementary_tensor(std::span<const CorrElement> factors) {
  if (factors.empty()) throw std::invalid_argument("empty tensor");
  GraphPtr g = factors[0].graph;
  for (const CorrElement& x : factors) require_same_graph(g, x.graph);
  const int n = static_cast<int>(factors.size());
  TensorElement t = TensorElement::zero(g, n);
  const std::vector<Path> basis = path_basis(*g, n);
  for (size_t i = 0; i < basis.size(); ++i) {
    Cplx c = 1.0;
    for (int k = 0; k < n && c != 0.0; ++k)
      c *= factors[k].coeffs(basis[i].edges[k]);
    t.coeffs(static_cast<long>(i)) = c;
  }
  return t;
}

AlgebraElement tensor_inner_product(const TensorElement& u,
                                    const TensorElement& w) {
  require_same_graph(u.graph, w.graph);
  if (u.level != w.level) throw std::invalid_argument("level mismatch");
  const DirectedGraph& g = *u.graph;
  AlgebraElement a = AlgebraElement::zero(u.graph);
  if (u.level == 0) {
    for (int v = 0; v < g.vertex_count(); ++v)
      a.coeffs(v) = std::conj(u.coeffs(v)) * w.coeffs(v);
    return a;
  }
  const std::vector<Path> basis = path_basis(g, u.level);
  // Distinct paths are orthogonal and <mu,mu> = delta_{s(mu)}.
  for (size_t i = 0; i < basis.size(); ++i)
    a.coeffs(basis[i].source()) +=
        std::conj(u.coeffs(static_cast<long>(i))) * w.coeffs(static_cast<long>(i));
  return a;
}

}  // namespace graphcorr
