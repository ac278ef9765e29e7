#include "graphcorr/json_io.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace graphcorr {

Json complex_to_json(const Cplx& c) { return Json::array({c.real(), c.imag()}); }

Cplx complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json graph_to_json(const DirectedGraph& g) {
  Json edges = Json::array();
  for (const Edge& e : g.edges())
    edges.push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}});
  return {{"vertices", g.vertices()}, {"edges", edges}};
}

GraphPtr graph_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
    throw std::invalid_argument("graph JSON needs vertices and edges");
  std::vector<std::string> vertices =
      j["vertices"].get<std::vector<std::string>>();
  std::vector<Edge> edges;
  for (const Json& e : j["edges"])
    edges.push_back({e.at("id").get<std::string>(),
                     e.at("src").get<std::string>(),
                     e.at("dst").get<std::string>()});
  return make_graph(std::move(vertices), std::move(edges));
}

Json iso_to_json(const DirectedGraph& g, const DirectedGraph& f,
                 const GraphIsoCertificate& cert) {
  Json beta = Json::object(), alpha = Json::object();
  for (int v = 0; v < g.vertex_count(); ++v)
    beta[g.vertex(v)] = f.vertex(cert.beta[v]);
  for (int e = 0; e < g.edge_count(); ++e)
    alpha[g.edge(e).id] = f.edge(cert.alpha[e]).id;
  return {{"beta", beta}, {"alpha", alpha}};
}

GraphIsoCertificate iso_from_json(const DirectedGraph& g,
                                  const DirectedGraph& f, const Json& j) {
  GraphIsoCertificate cert;
  cert.beta.assign(g.vertex_count(), -1);
  cert.alpha.assign(g.edge_count(), -1);
  for (const auto& [k, v] : j.at("beta").items())
    cert.beta[g.vertex_index(k)] = f.vertex_index(v.get<std::string>());
  for (const auto& [k, v] : j.at("alpha").items())
    cert.alpha[g.edge_index(k)] = f.edge_index(v.get<std::string>());
  return cert;
}

Json corr_to_json(const CorrElement& x) {
  Json out = Json::object();
  for (int e = 0; e < x.graph->edge_count(); ++e)
    out[x.graph->edge(e).id] = complex_to_json(x.coeffs(e));
  return out;
}

CorrElement corr_from_json(const GraphPtr& g, const Json& j) {
  CorrElement x = CorrElement::zero(g);
  for (const auto& [k, v] : j.items()) {
    const int e = g->edge_index(k);
    if (e < 0) throw std::invalid_argument("unknown edge id " + k);
    x.coeffs(e) = complex_from_json(v);
  }
  return x;
}

Json algebra_to_json(const AlgebraElement& a) {
  Json out = Json::object();
  for (int v = 0; v < a.graph->vertex_count(); ++v)
    out[a.graph->vertex(v)] = complex_to_json(a.coeffs(v));
  return out;
}

AlgebraElement algebra_from_json(const GraphPtr& g, const Json& j) {
  AlgebraElement a = AlgebraElement::zero(g);
  for (const auto& [k, v] : j.items()) {
    const int idx = g->vertex_index(k);
    if (idx < 0) throw std::invalid_argument("unknown vertex id " + k);
    a.coeffs(idx) = complex_from_json(v);
  }
  return a;
}

namespace {

std::string path_key(const DirectedGraph& g, const Path& p) {
  std::string key;
  for (size_t k = 0; k < p.edges.size(); ++k) {
    if (k) key += '|';
    key += g.edge(p.edges[k]).id;
  }
  return key;
}

Path path_from_key(const DirectedGraph& g, const std::string& key) {
  Path p;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '|')) {
    const int e = g.edge_index(part);
    if (e < 0) throw std::invalid_argument("unknown edge id " + part);
    p.edges.push_back(e);
  }
  if (p.edges.empty()) throw std::invalid_argument("empty path key");
  p.base_vertex = g.src(p.edges.back());
  return p;
}

}  // namespace

Json tensor_to_json(const TensorElement& t) {
  Json coeffs = Json::object();
  if (t.level == 0) {
    for (int v = 0; v < t.graph->vertex_count(); ++v)
      if (t.coeffs(v) != Cplx(0.0))
        coeffs[t.graph->vertex(v)] = complex_to_json(t.coeffs(v));
  } else {
    const std::vector<Path> basis = path_basis(*t.graph, t.level);
    for (size_t i = 0; i < basis.size(); ++i)
      if (t.coeffs(static_cast<long>(i)) != Cplx(0.0))
        coeffs[path_key(*t.graph, basis[i])] =
            complex_to_json(t.coeffs(static_cast<long>(i)));
  }
  return {{"level", t.level}, {"coeffs", coeffs}};
}

TensorElement tensor_from_json(const GraphPtr& g, const Json& j) {
  const int level = j.at("level").get<int>();
  TensorElement t = TensorElement::zero(g, level);
  const std::vector<Path> basis = path_basis(*g, level);
  for (const auto& [k, v] : j.at("coeffs").items()) {
    if (level == 0) {
      const int idx = g->vertex_index(k);
      if (idx < 0) throw std::invalid_argument("unknown vertex id " + k);
      t.coeffs(idx) = complex_from_json(v);
      continue;
    }
    const Path p = path_from_key(*g, k);
    if (static_cast<int>(p.edges.size()) != level)
      throw std::invalid_argument("path level mismatch");
    auto it = std::lower_bound(basis.begin(), basis.end(), p);
    if (it == basis.end() || !(*it == p))
      throw std::invalid_argument("path not composable: " + k);
    t.coeffs(static_cast<long>(it - basis.begin())) = complex_from_json(v);
  }
  return t;
}

Json operator_to_json(const FockOperator& t) {
  std::vector<std::tuple<int, int, Cplx>> entries;
  for (int col = 0; col < t.mat.outerSize(); ++col)
    for (SparseCMat::InnerIterator it(t.mat, col); it; ++it)
      if (it.value() != Cplx(0.0))
        entries.emplace_back(static_cast<int>(it.row()),
                             static_cast<int>(it.col()), it.value());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b));
  });
  Json arr = Json::array();
  for (const auto& [r, c, v] : entries)
    arr.push_back(Json::array({r, c, complex_to_json(v)}));
  return {{"N", t.basis->levels()}, {"entries", arr}};
}

FockOperator operator_from_json(const GraphPtr& g, const Json& j) {
  FockBasisPtr basis = make_fock_basis(g, j.at("N").get<int>());
  std::vector<Eigen::Triplet<Cplx>> trip;
  for (const Json& e : j.at("entries"))
    trip.emplace_back(e[0].get<int>(), e[1].get<int>(),
                      complex_from_json(e[2]));
  SparseCMat m(basis->dim(), basis->dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return {std::move(basis), std::move(m)};
}

Json intertwiner_to_json(const Intertwiner& eta) {
  Json blocks = Json::object();
  const DirectedGraph& g = *eta.rep->graph;
  for (int e = 0; e < g.edge_count(); ++e) {
    Json rows = Json::array();
    for (int i = 0; i < eta.blocks[e].rows(); ++i) {
      Json row = Json::array();
      for (int k = 0; k < eta.blocks[e].cols(); ++k)
        row.push_back(complex_to_json(eta.blocks[e](i, k)));
      rows.push_back(row);
    }
    blocks[g.edge(e).id] = rows;
  }
  return {{"blocks", blocks}};
}

Intertwiner intertwiner_from_json(const RepPtr& rep, const Json& j) {
  Intertwiner eta = Intertwiner::zero(rep);
  const DirectedGraph& g = *rep->graph;
  for (const auto& [k, rows] : j.at("blocks").items()) {
    const int e = g.edge_index(k);
    if (e < 0) throw std::invalid_argument("unknown edge id " + k);
    if (static_cast<int>(rows.size()) != eta.blocks[e].rows())
      throw std::invalid_argument("block shape mismatch at " + k);
    for (int i = 0; i < eta.blocks[e].rows(); ++i) {
      if (static_cast<int>(rows[i].size()) != eta.blocks[e].cols())
        throw std::invalid_argument("block shape mismatch at " + k);
      for (int c = 0; c < eta.blocks[e].cols(); ++c)
        eta.blocks[e](i, c) = complex_from_json(rows[i][c]);
    }
  }
  return eta;
}

Json morita_certificate_to_json(const MoritaCertificate& cert) {
  const DirectedGraph& g = *cert.corr_iso.g;
  const DirectedGraph& f = *cert.corr_iso.f;
  Json omega = Json::object(), phi = Json::object();
  for (int v = 0; v < g.vertex_count(); ++v)
    omega[g.vertex(v)] = f.vertex(cert.corr_iso.beta[v]);
  for (int e = 0; e < g.edge_count(); ++e)
    phi[g.edge(e).id] = f.edge(cert.corr_iso.alpha[e]).id;
  return {{"graph_iso", iso_to_json(g, f, cert.graph_iso)},
          {"corr_iso", {{"omega", omega}, {"phi", phi}}},
          {"W_verified", cert.verified},
          {"max_residual", std::max(cert.corr_residual, cert.w_residual)}};
}

std::vector<int> parse_multiplicities(const DirectedGraph& g,
                                      const std::string& mult_text) {
  std::vector<int> mult(g.vertex_count(), 1);
  if (mult_text.empty()) return mult;
  std::stringstream ss(mult_text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad multiplicity entry: " + item);
    const std::string name = item.substr(0, eq);
    const int v = g.vertex_index(name);
    if (v < 0) throw std::invalid_argument("unknown vertex id " + name);
    const int m = std::stoi(item.substr(eq + 1));
    if (m < 1) throw std::invalid_argument("multiplicity must be >= 1");
    mult[v] = m;
  }
  return mult;
}

}  // namespace graphcorr
