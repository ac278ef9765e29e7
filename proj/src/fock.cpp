#include "graphcorr/fock.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace graphcorr {

namespace {
constexpr long kMaxFockDim = 2'000'000;
}

FockBasis::FockBasis(GraphPtr g, int levels) : graph_(std::move(g)), levels_(levels) {
  if (levels < 0) throw std::invalid_argument("negative truncation level");
  long dim = 0;
  for (int n = 0; n <= levels_; ++n) {
    offset_.push_back(static_cast<int>(dim));
    paths_.push_back(path_basis(*graph_, n));
    dim += static_cast<long>(paths_.back().size());
    if (dim > kMaxFockDim) throw std::invalid_argument("truncation level too large");
  }
  dim_ = static_cast<int>(dim);
}

FockBasisPtr make_fock_basis(GraphPtr g, int levels) {
  return std::make_shared<const FockBasis>(std::move(g), levels);
}

int FockBasis::level_of(int index) const {
  for (int n = levels_; n >= 0; --n)
    if (index >= offset_[n]) return n;
  throw std::out_of_range("bad basis index");
}

const Path& FockBasis::path_at(int index) const {
  const int n = level_of(index);
  return paths_[n][index - offset_[n]];
}

int FockBasis::source_vertex(int index) const { return path_at(index).source(); }

int FockBasis::range_vertex(int index) const {
  return path_at(index).range(*graph_);
}

int FockBasis::index_of(int level, const Path& p) const {
  if (level < 0 || level > levels_) return -1;
  const auto& lv = paths_[level];
  auto it = std::lower_bound(lv.begin(), lv.end(), p);
  if (it == lv.end() || !(*it == p)) return -1;
  return offset_[level] + static_cast<int>(it - lv.begin());
}

bool fock_sparsity_ok(const FockOperator& t, double tol) {
  const FockBasis& b = *t.basis;
  for (int col = 0; col < t.mat.outerSize(); ++col) {
    for (SparseCMat::InnerIterator it(t.mat, col); it; ++it) {
      if (std::abs(it.value()) <= tol) continue;
      if (b.source_vertex(static_cast<int>(it.row())) !=
          b.source_vertex(static_cast<int>(it.col())))
        return false;
    }
  }
  return true;
}

void require_compatible(const FockOperator& a, const FockOperator& b) {
  if (!a.basis->compatible(*b.basis))
    throw std::invalid_argument("Fock basis mismatch");
}

FockOperator fock_zero(FockBasisPtr basis) {
  SparseCMat m(basis->dim(), basis->dim());
  return {std::move(basis), std::move(m)};
}

FockOperator fock_identity(FockBasisPtr basis) {
  SparseCMat m(basis->dim(), basis->dim());
  m.setIdentity();
  return {std::move(basis), std::move(m)};
}

FockOperator fock_add(const FockOperator& a, const FockOperator& b) {
  require_compatible(a, b);
  return {a.basis, a.mat + b.mat};
}

FockOperator fock_mul(const FockOperator& a, const FockOperator& b) {
  require_compatible(a, b);
  SparseCMat m = a.mat * b.mat;
  m.prune([](int, int, const Cplx& v) { return v != Cplx(0.0); });
  return {a.basis, std::move(m)};
}

FockOperator fock_scale(Cplx c, const FockOperator& a) {
  return {a.basis, SparseCMat(c * a.mat)};
}

double fock_max_abs_diff(const FockOperator& a, const FockOperator& b) {
  require_compatible(a, b);
  SparseCMat d = a.mat - b.mat;
  double m = 0.0;
  for (int col = 0; col < d.outerSize(); ++col)
    for (SparseCMat::InnerIterator it(d, col); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

FockOperator phi_infinity(const AlgebraElement& a, FockBasisPtr basis) {
  require_same_graph(a.graph, basis->graph());
  std::vector<Eigen::Triplet<Cplx>> trip;
  for (int i = 0; i < basis->dim(); ++i) {
    const Cplx c = a.coeffs(basis->range_vertex(i));
    if (c != Cplx(0.0)) trip.emplace_back(i, i, c);
  }
  SparseCMat m(basis->dim(), basis->dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return {std::move(basis), std::move(m)};
}

FockOperator phi_infinity(const AlgebraElement& a, int levels) {
  return phi_infinity(a, make_fock_basis(a.graph, levels));
}

FockOperator creation_operator(const TensorElement& xi, FockBasisPtr basis) {
  require_same_graph(xi.graph, basis->graph());
  const int n = xi.level;
  if (n < 1 || n > basis->levels())
    throw std::invalid_argument("creation level out of range");
  const DirectedGraph& g = *basis->graph();
  const std::vector<Path>& heads = path_basis(g, n);

  std::vector<Eigen::Triplet<Cplx>> trip;
  for (int k = 0; k + n <= basis->levels(); ++k) {
    const auto& cols = basis->level_paths(k);
    for (size_t ci = 0; ci < cols.size(); ++ci) {
      const Path& mu = cols[ci];
      const int col = basis->level_offset(k) + static_cast<int>(ci);
      const int rmu = mu.range(g);
      for (size_t hi = 0; hi < heads.size(); ++hi) {
        const Cplx c = xi.coeffs(static_cast<long>(hi));
        if (c == Cplx(0.0)) continue;
        const Path& head = heads[hi];
        if (g.src(head.edges.back()) != rmu) continue;  // not composable
        Path full;
        full.edges = head.edges;
        full.edges.insert(full.edges.end(), mu.edges.begin(), mu.edges.end());
        full.base_vertex = mu.source();
        const int row = basis->index_of(k + n, full);
        trip.emplace_back(row, col, c);
      }
    }
  }
  SparseCMat m(basis->dim(), basis->dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return {std::move(basis), std::move(m)};
}

FockOperator creation_operator(const CorrElement& x, FockBasisPtr basis) {
  TensorElement xi{x.graph, 1, x.coeffs};
  return creation_operator(xi, std::move(basis));
}

FockOperator creation_operator(const CorrElement& x, int levels) {
  return creation_operator(x, make_fock_basis(x.graph, levels));
}

FockOperator operator_adjoint(const FockOperator& t) {
  if (!fock_sparsity_ok(t)) throw std::invalid_argument("sparsity violation");
  return {t.basis, SparseCMat(t.mat.adjoint())};
}

FockOperator poly_operator(const AlgebraElement& a0,
                           const std::vector<TensorElement>& terms,
                           FockBasisPtr basis) {
  FockOperator acc = phi_infinity(a0, basis);
  for (const TensorElement& xi : terms)
    acc = fock_add(acc, creation_operator(xi, basis));
  return acc;
}

double operator_norm_restricted(const FockOperator& t, int max_level) {
  if (max_level < 0) return 0.0;
  max_level = std::min(max_level, t.basis->levels());
  const int cols = t.basis->level_offset(max_level) + t.basis->level_dim(max_level);
  Eigen::MatrixXcd dense = Eigen::MatrixXcd(t.mat).leftCols(cols);
  Eigen::MatrixXcd gram = dense.adjoint() * dense;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                     Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top <= 0.0 ? 0.0 : std::sqrt(top);
}

}  // namespace graphcorr
