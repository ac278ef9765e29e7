#include "graphcorr/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace graphcorr {

DirectedGraph DirectedGraph::validated(std::vector<std::string> vertices,
                                       std::vector<Edge> edges) {
  if (vertices.empty()) throw std::invalid_argument("empty vertex set");

  std::unordered_map<std::string, int> vidx;
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
    if (!vidx.emplace(vertices[i], i).second)
      throw std::invalid_argument("duplicate vertex id " + vertices[i]);
  }
  std::unordered_set<std::string> eids;
  for (const Edge& e : edges) {
    if (!eids.insert(e.id).second)
      throw std::invalid_argument("duplicate edge id " + e.id);
  }

  DirectedGraph g;
  g.vertices_ = std::move(vertices);
  g.edges_ = std::move(edges);
  const int n = g.vertex_count();
  g.out_.resize(n);
  g.in_.resize(n);
  for (int i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edges_[i];
    auto s = vidx.find(e.src);
    if (s == vidx.end())
      throw std::invalid_argument("dangling endpoint " + e.src);
    auto r = vidx.find(e.dst);
    if (r == vidx.end())
      throw std::invalid_argument("dangling endpoint " + e.dst);
    g.src_.push_back(s->second);
    g.dst_.push_back(r->second);
    g.out_[s->second].push_back(i);
    g.in_[r->second].push_back(i);
  }
  return g;
}

GraphPtr make_graph(std::vector<std::string> vertices, std::vector<Edge> edges) {
  return std::make_shared<const DirectedGraph>(
      DirectedGraph::validated(std::move(vertices), std::move(edges)));
}

int DirectedGraph::vertex_index(const std::string& id) const {
  for (int i = 0; i < vertex_count(); ++i)
    if (vertices_[i] == id) return i;
  return -1;
}

int DirectedGraph::edge_index(const std::string& id) const {
  for (int i = 0; i < edge_count(); ++i)
    if (edges_[i].id == id) return i;
  return -1;
}

bool DirectedGraph::operator==(const DirectedGraph& o) const {
  if (vertices_ != o.vertices_) return false;
  if (edges_.size() != o.edges_.size()) return false;
  for (size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i].id != o.edges_[i].id || edges_[i].src != o.edges_[i].src ||
        edges_[i].dst != o.edges_[i].dst)
      return false;
  }
  return true;
}

VertexPermutation VertexPermutation::identity(std::vector<std::string> points) {
  VertexPermutation p;
  p.map.resize(points.size());
  for (size_t i = 0; i < points.size(); ++i) p.map[i] = static_cast<int>(i);
  p.points = std::move(points);
  return p;
}

VertexPermutation VertexPermutation::from_one_line(
    std::vector<std::string> points, std::vector<int> images) {
  if (points.size() != images.size())
    throw std::invalid_argument("permutation size mismatch");
  std::vector<bool> seen(points.size(), false);
  for (int v : images) {
    if (v < 0 || v >= static_cast<int>(points.size()) || seen[v])
      throw std::invalid_argument("not a bijection");
    seen[v] = true;
  }
  VertexPermutation p;
  p.points = std::move(points);
  p.map = std::move(images);
  return p;
}

VertexPermutation VertexPermutation::inverse() const {
  VertexPermutation p;
  p.points = points;
  p.map.resize(map.size());
  for (size_t i = 0; i < map.size(); ++i) p.map[map[i]] = static_cast<int>(i);
  return p;
}

bool iso_certificate_valid(const DirectedGraph& g, const DirectedGraph& f,
                           const GraphIsoCertificate& cert) {
  const int n = g.vertex_count(), m = g.edge_count();
  if (f.vertex_count() != n || f.edge_count() != m) return false;
  if (static_cast<int>(cert.beta.size()) != n ||
      static_cast<int>(cert.alpha.size()) != m)
    return false;
  std::vector<bool> vhit(n, false), ehit(m, false);
  for (int b : cert.beta) {
    if (b < 0 || b >= n || vhit[b]) return false;
    vhit[b] = true;
  }
  for (int a : cert.alpha) {
    if (a < 0 || a >= m || ehit[a]) return false;
    ehit[a] = true;
  }
  for (int e = 0; e < m; ++e) {
    if (f.src(cert.alpha[e]) != cert.beta[g.src(e)]) return false;
    if (f.dst(cert.alpha[e]) != cert.beta[g.dst(e)]) return false;
  }
  return true;
}

namespace {

struct PairCounts {
  int n;
  std::vector<int> cnt;  // cnt[r * n + s] = #edges with dst=r, src=s
  explicit PairCounts(const DirectedGraph& g) : n(g.vertex_count()), cnt(n * n, 0) {
    for (int e = 0; e < g.edge_count(); ++e) ++cnt[g.dst(e) * n + g.src(e)];
  }
  int at(int r, int s) const { return cnt[r * n + s]; }
};

struct Signature {
  int indeg, outdeg, loops;
  bool operator==(const Signature&) const = default;
};

Signature signature_of(const DirectedGraph& g, int v) {
  int loops = 0;
  for (int e : g.edges_from(v))
    if (g.dst(e) == v) ++loops;
  return {static_cast<int>(g.edges_into(v).size()),
          static_cast<int>(g.edges_from(v).size()), loops};
}

struct IsoSearch {
  const DirectedGraph& g;
  const DirectedGraph& f;
  PairCounts cg, cf;
  std::vector<Signature> sg, sf;
  std::vector<int> order;    // g-vertices, most constrained first
  std::vector<int> beta;     // g-vertex -> f-vertex, -1 unassigned
  std::vector<bool> used;    // f-vertex already an image

  IsoSearch(const DirectedGraph& g_, const DirectedGraph& f_)
      : g(g_), f(f_), cg(g_), cf(f_) {
    const int n = g.vertex_count();
    for (int v = 0; v < n; ++v) sg.push_back(signature_of(g, v));
    for (int w = 0; w < n; ++w) sf.push_back(signature_of(f, w));
    order.resize(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      int da = sg[a].indeg + sg[a].outdeg;
      int db = sg[b].indeg + sg[b].outdeg;
      return da > db;
    });
    beta.assign(n, -1);
    used.assign(n, false);
  }

  bool consistent(int v, int w) const {
    if (!(sg[v] == sf[w])) return false;
    for (int u = 0; u < g.vertex_count(); ++u) {
      if (beta[u] < 0) continue;
      if (cg.at(v, u) != cf.at(w, beta[u])) return false;
      if (cg.at(u, v) != cf.at(beta[u], w)) return false;
    }
    if (cg.at(v, v) != cf.at(w, w)) return false;
    return true;
  }

  bool search(size_t k) {
    if (k == order.size()) return true;
    const int v = order[k];
    for (int w = 0; w < f.vertex_count(); ++w) {  // input order: deterministic
      if (used[w] || !consistent(v, w)) continue;
      beta[v] = w;
      used[w] = true;
      if (search(k + 1)) return true;
      beta[v] = -1;
      used[w] = false;
    }
    return false;
  }
};

}  // namespace

std::optional<GraphIsoCertificate> graph_isomorphism(const DirectedGraph& g,
                                                     const DirectedGraph& f) {
  if (g.vertex_count() != f.vertex_count() || g.edge_count() != f.edge_count())
    return std::nullopt;

  IsoSearch s(g, f);
  if (!s.search(0)) return std::nullopt;

  GraphIsoCertificate cert;
  cert.beta = s.beta;
  cert.alpha.assign(g.edge_count(), -1);
  // Match parallel classes edge by edge, both sides in input order.
  const int n = g.vertex_count();
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      std::vector<int> ge, fe;
      for (int e = 0; e < g.edge_count(); ++e)
        if (g.src(e) == u && g.dst(e) == v) ge.push_back(e);
      const int w = cert.beta[v], x = cert.beta[u];
      for (int e = 0; e < f.edge_count(); ++e)
        if (f.src(e) == x && f.dst(e) == w) fe.push_back(e);
      for (size_t i = 0; i < ge.size(); ++i) cert.alpha[ge[i]] = fe[i];
    }
  }
  return cert;
}

DirectedGraph permutation_graph(const VertexPermutation& sigma) {
  std::vector<Edge> edges;
  for (int x = 0; x < sigma.size(); ++x) {
    edges.push_back({"e_" + sigma.points[x], sigma.points[sigma.map[x]],
                     sigma.points[x]});
  }
  return DirectedGraph::validated(sigma.points, std::move(edges));
}

Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> composability_matrix(
    const DirectedGraph& g) {
  const int n = g.vertex_count();
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> b =
      Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int e = 0; e < g.edge_count(); ++e) b(g.dst(e), g.src(e)) += 1;
  return b;
}

}  // namespace graphcorr
