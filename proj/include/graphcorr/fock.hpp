#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "graphcorr/correspondence.hpp"

namespace graphcorr {

using SparseCMat = Eigen::SparseMatrix<Cplx>;

/// Ordered basis of the truncated Fock space F_N(E): the concatenation of
/// path_basis(G, 0), ..., path_basis(G, N).
class FockBasis {
 public:
  FockBasis(GraphPtr g, int levels);

  const GraphPtr& graph() const { return graph_; }
  int levels() const { return levels_; }
  int dim() const { return dim_; }
  int level_offset(int n) const { return offset_[n]; }
  int level_dim(int n) const {
    return static_cast<int>(paths_[n].size());
  }
  const std::vector<Path>& level_paths(int n) const { return paths_[n]; }

  int level_of(int index) const;
  const Path& path_at(int index) const;
  // s(mu), or the vertex itself at level 0 (the right-support vertex).
  int source_vertex(int index) const;
  int range_vertex(int index) const;
  // Global index of a path at the given level; -1 when absent.
  int index_of(int level, const Path& p) const;

  bool compatible(const FockBasis& o) const {
    return levels_ == o.levels_ && same_graph(graph_, o.graph_);
  }

 private:
  GraphPtr graph_;
  int levels_;
  int dim_;
  std::vector<std::vector<Path>> paths_;
  std::vector<int> offset_;
};

using FockBasisPtr = std::shared_ptr<const FockBasis>;

FockBasisPtr make_fock_basis(GraphPtr g, int levels);

// An adjointable right-module map on F_N(E), stored sparse.  The module-map
// sparsity invariant: entry (row, col) may be nonzero only when the two
// basis paths share their source vertex.
struct FockOperator {
  FockBasisPtr basis;
  SparseCMat mat;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return mat * v; }
};

bool fock_sparsity_ok(const FockOperator& t, double tol = 0.0);
void require_compatible(const FockOperator& a, const FockOperator& b);

FockOperator fock_zero(FockBasisPtr basis);
FockOperator fock_identity(FockBasisPtr basis);
FockOperator fock_add(const FockOperator& a, const FockOperator& b);
FockOperator fock_mul(const FockOperator& a, const FockOperator& b);
FockOperator fock_scale(Cplx c, const FockOperator& a);
double fock_max_abs_diff(const FockOperator& a, const FockOperator& b);

// diag(a, phi(a), phi^(2)(a), ...): the entry at path mu is a(r(mu)).
FockOperator phi_infinity(const AlgebraElement& a, FockBasisPtr basis);
FockOperator phi_infinity(const AlgebraElement& a, int levels);

// T_x: eta -> x (x) eta, with the top level compressed to zero.
FockOperator creation_operator(const CorrElement& x, FockBasisPtr basis);
FockOperator creation_operator(const CorrElement& x, int levels);

// Level-n creation by a tensor element xi: mu -> xi (x) mu.
FockOperator creation_operator(const TensorElement& xi, FockBasisPtr basis);

// Conjugate transpose; throws when the sparsity invariant is violated.
FockOperator operator_adjoint(const FockOperator& t);

// phi_inf(a0) + sum_n T_{xi_n}; every xi level must be >= 1 and <= N.
FockOperator poly_operator(const AlgebraElement& a0,
                           const std::vector<TensorElement>& terms,
                           FockBasisPtr basis);

// Operator norm of T restricted to the columns of levels <= max_level,
// computed from a Hermitian eigensolve of the Gram matrix.
double operator_norm_restricted(const FockOperator& t, int max_level);

}  // namespace graphcorr
