#include "graphcorr/duality.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace graphcorr {

RepPtr make_representation(GraphPtr g, std::vector<int> mult) {
  if (static_cast<int>(mult.size()) != g->vertex_count())
    throw std::invalid_argument("multiplicity count mismatch");
  for (int m : mult)
    if (m < 1) throw std::invalid_argument("multiplicities must be >= 1");

  auto rep = std::make_shared<Representation>();
  rep->graph = std::move(g);
  rep->mult = std::move(mult);
  for (int v = 0; v < rep->graph->vertex_count(); ++v) {
    rep->h_offset.push_back(rep->dim_h);
    rep->dim_h += rep->mult[v];
  }
  for (int e = 0; e < rep->graph->edge_count(); ++e) {
    rep->eh_offset.push_back(rep->dim_eh);
    rep->dim_eh += rep->mult[rep->graph->src(e)];
  }
  return rep;
}

bool same_rep(const RepPtr& a, const RepPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return same_graph(a->graph, b->graph) && a->mult == b->mult;
}

void require_same_rep(const RepPtr& a, const RepPtr& b) {
  if (!same_rep(a, b)) throw std::invalid_argument("representation mismatch");
}

std::vector<std::pair<int, int>> induced_space_decomposition(
    const Representation& rep) {
  std::vector<std::pair<int, int>> out;
  for (int e = 0; e < rep.graph->edge_count(); ++e)
    out.emplace_back(e, rep.mult[rep.graph->src(e)]);
  return out;
}

Intertwiner Intertwiner::zero(RepPtr rep) {
  Intertwiner eta;
  for (int e = 0; e < rep->graph->edge_count(); ++e)
    eta.blocks.push_back(Eigen::MatrixXcd::Zero(rep->mult[rep->graph->dst(e)],
                                                rep->mult[rep->graph->src(e)]));
  eta.rep = std::move(rep);
  return eta;
}

Intertwiner Intertwiner::unit(RepPtr rep, int e, int i, int j) {
  Intertwiner eta = zero(std::move(rep));
  eta.blocks[e](i, j) = 1.0;
  return eta;
}

CommutantElement CommutantElement::zero(RepPtr rep) {
  CommutantElement c;
  for (int v = 0; v < rep->graph->vertex_count(); ++v)
    c.blocks.push_back(Eigen::MatrixXcd::Zero(rep->mult[v], rep->mult[v]));
  c.rep = std::move(rep);
  return c;
}

CommutantElement CommutantElement::identity(RepPtr rep) {
  CommutantElement c;
  for (int v = 0; v < rep->graph->vertex_count(); ++v)
    c.blocks.push_back(Eigen::MatrixXcd::Identity(rep->mult[v], rep->mult[v]));
  c.rep = std::move(rep);
  return c;
}

CommutantElement CommutantElement::unit(RepPtr rep, int v, int i, int j) {
  CommutantElement c = zero(std::move(rep));
  c.blocks[v](i, j) = 1.0;
  return c;
}

CommutantElement comm_add(const CommutantElement& a, const CommutantElement& b) {
  require_same_rep(a.rep, b.rep);
  CommutantElement c = a;
  for (size_t v = 0; v < c.blocks.size(); ++v) c.blocks[v] += b.blocks[v];
  return c;
}

CommutantElement comm_mul(const CommutantElement& a, const CommutantElement& b) {
  require_same_rep(a.rep, b.rep);
  CommutantElement c = a;
  for (size_t v = 0; v < c.blocks.size(); ++v) c.blocks[v] *= b.blocks[v];
  return c;
}

CommutantElement comm_adjoint(const CommutantElement& a) {
  CommutantElement c = a;
  for (auto& blk : c.blocks) blk = blk.adjoint().eval();
  return c;
}

double comm_max_abs(const CommutantElement& a) {
  double m = 0.0;
  for (const auto& blk : a.blocks)
    if (blk.size() > 0) m = std::max(m, blk.cwiseAbs().maxCoeff());
  return m;
}

double comm_max_abs_diff(const CommutantElement& a, const CommutantElement& b) {
  require_same_rep(a.rep, b.rep);
  double m = 0.0;
  for (size_t v = 0; v < a.blocks.size(); ++v)
    if (a.blocks[v].size() > 0)
      m = std::max(m, (a.blocks[v] - b.blocks[v]).cwiseAbs().maxCoeff());
  return m;
}

Intertwiner eta_add(const Intertwiner& a, const Intertwiner& b) {
  require_same_rep(a.rep, b.rep);
  Intertwiner c = a;
  for (size_t e = 0; e < c.blocks.size(); ++e) c.blocks[e] += b.blocks[e];
  return c;
}

Intertwiner eta_scale(Cplx c, const Intertwiner& a) {
  // Scaling eta by c scales the stored eta* blocks by conj(c).
  Intertwiner out = a;
  for (auto& blk : out.blocks) blk *= std::conj(c);
  return out;
}

double eta_max_abs_diff(const Intertwiner& a, const Intertwiner& b) {
  require_same_rep(a.rep, b.rep);
  double m = 0.0;
  for (size_t e = 0; e < a.blocks.size(); ++e)
    if (a.blocks[e].size() > 0)
      m = std::max(m, (a.blocks[e] - b.blocks[e]).cwiseAbs().maxCoeff());
  return m;
}

Eigen::MatrixXcd intertwiner_embed(const Intertwiner& eta) {
  const Representation& r = *eta.rep;
  const DirectedGraph& g = *r.graph;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(r.dim_h, r.dim_eh);
  for (int e = 0; e < g.edge_count(); ++e)
    m.block(r.h_offset[g.dst(e)], r.eh_offset[e], r.mult[g.dst(e)],
            r.mult[g.src(e)]) = eta.blocks[e];
  return m;
}

bool is_intertwiner(const Eigen::MatrixXcd& m, const Representation& rep,
                    double tol) {
  const DirectedGraph& g = *rep.graph;
  if (m.rows() != rep.dim_h || m.cols() != rep.dim_eh)
    throw std::invalid_argument("dimension mismatch");
  for (int v = 0; v < g.vertex_count(); ++v) {
    // (sigma^E o phi)(delta_v) = (+)_e [r(e)=v] I;  sigma(delta_v) = block v.
    Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
    for (int e = 0; e < g.edge_count(); ++e) {
      if (g.dst(e) != v) continue;
      lhs.middleCols(rep.eh_offset[e], rep.mult[g.src(e)]) =
          m.middleCols(rep.eh_offset[e], rep.mult[g.src(e)]);
    }
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
    rhs.middleRows(rep.h_offset[v], rep.mult[v]) =
        m.middleRows(rep.h_offset[v], rep.mult[v]);
    if ((lhs - rhs).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

std::vector<Intertwiner> intertwiner_basis(RepPtr rep) {
  std::vector<Intertwiner> out;
  const DirectedGraph& g = *rep->graph;
  for (int e = 0; e < g.edge_count(); ++e)
    for (int i = 0; i < rep->mult[g.dst(e)]; ++i)
      for (int j = 0; j < rep->mult[g.src(e)]; ++j)
        out.push_back(Intertwiner::unit(rep, e, i, j));
  return out;
}

std::pair<bool, double> ball_membership(const Intertwiner& eta) {
  const Representation& r = *eta.rep;
  const DirectedGraph& g = *r.graph;
  double top = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(r.mult[v], r.mult[v]);
    for (int e : g.edges_into(v))
      gram += eta.blocks[e] * eta.blocks[e].adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                       Eigen::EigenvaluesOnly);
    top = std::max(top, es.eigenvalues().maxCoeff());
  }
  const double norm = top <= 0.0 ? 0.0 : std::sqrt(top);
  return {norm < 1.0, norm};
}

std::vector<Intertwiner> center_basis(RepPtr rep) {
  std::vector<Intertwiner> out;
  const DirectedGraph& g = *rep->graph;
  for (int e = 0; e < g.edge_count(); ++e) {
    if (g.src(e) != g.dst(e)) continue;  // loops only
    Intertwiner eta = Intertwiner::zero(rep);
    eta.blocks[e] = Eigen::MatrixXcd::Identity(rep->mult[g.src(e)],
                                               rep->mult[g.src(e)]);
    out.push_back(std::move(eta));
  }
  return out;
}

Intertwiner act_left(const CommutantElement& a, const Intertwiner& eta) {
  require_same_rep(a.rep, eta.rep);
  const DirectedGraph& g = *eta.rep->graph;
  Intertwiner out = eta;
  // (a.eta)* = eta* (I (x) a*): column e right-multiplied by a_{s(e)}*.
  for (int e = 0; e < g.edge_count(); ++e)
    out.blocks[e] = eta.blocks[e] * a.blocks[g.src(e)].adjoint();
  return out;
}

Intertwiner act_right(const Intertwiner& eta, const CommutantElement& a) {
  require_same_rep(a.rep, eta.rep);
  const DirectedGraph& g = *eta.rep->graph;
  Intertwiner out = eta;
  // (eta a)* = a* eta*: row r(e) left-multiplied by a_{r(e)}*.
  for (int e = 0; e < g.edge_count(); ++e)
    out.blocks[e] = a.blocks[g.dst(e)].adjoint() * eta.blocks[e];
  return out;
}

Intertwiner dual_pair(const CommutantElement& a, const Intertwiner& eta,
                      const CommutantElement& b) {
  return act_right(act_left(a, eta), b);
}

CommutantElement eta_inner(const Intertwiner& eta, const Intertwiner& xi) {
  require_same_rep(eta.rep, xi.rep);
  const DirectedGraph& g = *eta.rep->graph;
  CommutantElement out = CommutantElement::zero(eta.rep);
  for (int e = 0; e < g.edge_count(); ++e)
    out.blocks[g.dst(e)] += eta.blocks[e] * xi.blocks[e].adjoint();
  return out;
}

FockHilbert::FockHilbert(FockBasisPtr fock_, RepPtr rep_)
    : fock(std::move(fock_)), rep(std::move(rep_)) {
  require_same_graph(fock->graph(), rep->graph);
  for (int i = 0; i < fock->dim(); ++i) {
    offset.push_back(dim);
    dim += rep->mult[fock->source_vertex(i)];
  }
  offset.push_back(dim);  // sentinel so empty top levels resolve cleanly
}

int FockHilbert::block_dim(int i) const {
  return rep->mult[fock->source_vertex(i)];
}

int FockHilbert::level_begin(int n) const {
  return offset[fock->level_offset(n)];
}

int FockHilbert::level_end(int n) const {
  return offset[fock->level_offset(n) + fock->level_dim(n)];
}

Eigen::VectorXcd u_map(std::span<const Intertwiner> etas,
                       const Eigen::VectorXcd& h, const FockHilbert& space) {
  const int n = static_cast<int>(etas.size());
  if (n > space.fock->levels()) throw std::invalid_argument("level exceeded");
  const Representation& r = *space.rep;
  const DirectedGraph& g = *r.graph;
  if (h.size() != r.dim_h) throw std::invalid_argument("H dimension mismatch");

  // Level-k working state: state[p] is the H_{s(mu_p)}-component at the
  // p-th level-k path.
  const FockBasis& fb = *space.fock;
  std::vector<Eigen::VectorXcd> state;
  {
    // level 0: the vertex components of h.
    const auto& paths = fb.level_paths(0);
    for (size_t p = 0; p < paths.size(); ++p) {
      const int v = paths[p].base_vertex;
      state.push_back(h.segment(r.h_offset[v], r.mult[v]));
    }
  }
  for (int k = 1; k <= n; ++k) {
    // Apply eta_{n-k+1} (the next factor from the right).
    const Intertwiner& eta = etas[n - k];
    require_same_rep(eta.rep, space.rep);
    const auto& prev = fb.level_paths(k - 1);
    const auto& next = fb.level_paths(k);
    std::vector<Eigen::VectorXcd> nstate(next.size());
    for (size_t p = 0; p < next.size(); ++p)
      nstate[p] = Eigen::VectorXcd::Zero(r.mult[next[p].source()]);
    for (size_t p = 0; p < prev.size(); ++p) {
      const Path& mu = prev[p];
      const int sv = mu.source();
      // Extend on the right by every edge e with r(e) = s(mu).
      for (int e : g.edges_into(sv)) {
        Path ext = mu;
        ext.edges.push_back(e);
        ext.base_vertex = g.src(e);
        const int gi = fb.index_of(k, ext);
        const int local = gi - fb.level_offset(k);
        // h-component of the previous state lives in H_{s(mu)} = H_{r(e)}.
        nstate[local] += eta.blocks[e].adjoint() * state[p];
      }
    }
    state = std::move(nstate);
  }
  // Flatten the level-n slice.
  Eigen::VectorXcd out =
      Eigen::VectorXcd::Zero(space.level_end(n) - space.level_begin(n));
  int pos = 0;
  for (size_t p = 0; p < state.size(); ++p) {
    out.segment(pos, state[p].size()) = state[p];
    pos += static_cast<int>(state[p].size());
  }
  return out;
}

Cplx u_preimage_inner(std::span<const Intertwiner> etas,
                      const Eigen::VectorXcd& h,
                      std::span<const Intertwiner> xis,
                      const Eigen::VectorXcd& hp) {
  if (etas.size() != xis.size()) return 0.0;
  if (etas.empty()) return h.dot(hp);  // Eigen dot conjugates the left side
  // <eta_1 (x) rest, xi_1 (x) rest'> = <rest, <eta_1,xi_1> . rest'>
  CommutantElement c = eta_inner(etas[0], xis[0]);
  if (xis.size() == 1) {
    // <h, iota(c) hp>
    Eigen::VectorXcd chp = Eigen::VectorXcd::Zero(hp.size());
    const Representation& r = *c.rep;
    for (int v = 0; v < r.graph->vertex_count(); ++v)
      chp.segment(r.h_offset[v], r.mult[v]) =
          c.blocks[v] * hp.segment(r.h_offset[v], r.mult[v]);
    return h.dot(chp);
  }
  Intertwiner acted = act_left(c, xis[1]);
  std::vector<Intertwiner> rest(xis.begin() + 1, xis.end());
  rest[0] = acted;
  return u_preimage_inner(etas.subspan(1), h, rest, hp);
}

Eigen::VectorXcd apply_right_creation(const Intertwiner& eta,
                                      const FockHilbert& space,
                                      const Eigen::VectorXcd& v) {
  const FockBasis& fb = *space.fock;
  const Representation& r = *space.rep;
  const DirectedGraph& g = *r.graph;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(space.dim);
  for (int i = 0; i < fb.dim(); ++i) {
    const int n = fb.level_of(i);
    if (n >= fb.levels()) continue;  // top level compressed to zero
    const Path& mu = fb.path_at(i);
    const auto seg = v.segment(space.offset[i], space.block_dim(i));
    if (seg.isZero(0.0)) continue;
    for (int e : g.edges_into(mu.source())) {
      Path ext = mu;
      ext.edges.push_back(e);
      ext.base_vertex = g.src(e);
      const int gi = fb.index_of(n + 1, ext);
      out.segment(space.offset[gi], space.block_dim(gi)) +=
          eta.blocks[e].adjoint() * seg;
    }
  }
  return out;
}

Eigen::VectorXcd apply_induced_creation(const CorrElement& x,
                                        const FockHilbert& space,
                                        const Eigen::VectorXcd& v) {
  const FockBasis& fb = *space.fock;
  const DirectedGraph& g = *space.rep->graph;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(space.dim);
  for (int i = 0; i < fb.dim(); ++i) {
    const int n = fb.level_of(i);
    if (n >= fb.levels()) continue;
    const Path& mu = fb.path_at(i);
    const auto seg = v.segment(space.offset[i], space.block_dim(i));
    if (seg.isZero(0.0)) continue;
    const int rv = mu.range(g);
    for (int e : g.edges_from(rv)) {
      const Cplx c = x.coeffs(e);
      if (c == Cplx(0.0)) continue;
      Path ext;
      ext.edges.push_back(e);
      ext.edges.insert(ext.edges.end(), mu.edges.begin(), mu.edges.end());
      ext.base_vertex = mu.edges.empty() ? mu.base_vertex : mu.source();
      const int gi = fb.index_of(n + 1, ext);
      out.segment(space.offset[gi], space.block_dim(gi)) += c * seg;
    }
  }
  return out;
}

double commutant_commutator_check(const Intertwiner& eta, const CorrElement& x,
                                  int levels) {
  if (levels < 2) throw std::invalid_argument("need levels >= 2");
  require_same_graph(eta.rep->graph, x.graph);
  FockHilbert space(make_fock_basis(x.graph, levels), eta.rep);
  double worst = 0.0;
  for (int i = 0; i < space.fock->dim(); ++i) {
    if (space.fock->level_of(i) > levels - 2) continue;
    for (int j = 0; j < space.block_dim(i); ++j) {
      Eigen::VectorXcd b = Eigen::VectorXcd::Zero(space.dim);
      b(space.offset[i] + j) = 1.0;
      Eigen::VectorXcd sr = apply_right_creation(
          eta, space, apply_induced_creation(x, space, b));
      Eigen::VectorXcd rs = apply_induced_creation(
          x, space, apply_right_creation(eta, space, b));
      worst = std::max(worst, (sr - rs).norm());
    }
  }
  return worst;
}

Eigen::MatrixXcd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Cplx(dist(rng), dist(rng));
  return m;
}

Intertwiner random_intertwiner(const RepPtr& rep, std::mt19937_64& rng) {
  Intertwiner eta = Intertwiner::zero(rep);
  const DirectedGraph& g = *rep->graph;
  for (int e = 0; e < g.edge_count(); ++e)
    eta.blocks[e] =
        random_matrix(rep->mult[g.dst(e)], rep->mult[g.src(e)], rng);
  return eta;
}

CommutantElement random_commutant(const RepPtr& rep, std::mt19937_64& rng) {
  CommutantElement c = CommutantElement::zero(rep);
  for (int v = 0; v < rep->graph->vertex_count(); ++v)
    c.blocks[v] = random_matrix(rep->mult[v], rep->mult[v], rng);
  return c;
}

}  // namespace graphcorr
