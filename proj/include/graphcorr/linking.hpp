#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "graphcorr/morita.hpp"

namespace graphcorr {

// ---------------------------------------------------------------------------
// The linking algebra L = [[B, X~], [X, A]] and the correspondence
// Z = [[F, F (x) X~], [E (x) X, E]] over it, for the equivalence bimodule
// X = B-with-twisted-left-action induced by a Morita certificate between the
// graph correspondences E (graph G, algebra A) and F (graph F, algebra B).
//
// All four corners collapse onto path-type bases because X acts diagonally:
//   corner 0 = (1,1):  F              basis: F-edges / F-paths
//   corner 1 = (1,2):  F (x) X~       basis: F-edges (tag delta~_{s2(f)})
//   corner 2 = (2,1):  E (x) X        basis: G-edges (tag delta_{beta(s1(e))})
//   corner 3 = (2,2):  E              basis: G-edges / E-paths
// Conjugate-module coordinates store the coefficients of sum c_w delta~_w.
// ---------------------------------------------------------------------------

struct ZContext {
  GraphPtr g;  // bottom graph (E over A)
  GraphPtr f;  // top graph (F over B)
  std::vector<int> alpha, alpha_inv;  // G-edges <-> F-edges
  std::vector<int> beta, beta_inv;    // G-vertices <-> F-vertices
};

// Element of L.
struct LinkingElement {
  Eigen::VectorXcd b;   // over F-vertices
  Eigen::VectorXcd xt;  // over F-vertices (conjugate coordinates)
  Eigen::VectorXcd x;   // over F-vertices
  Eigen::VectorXcd a;   // over G-vertices
};

LinkingElement l_zero(const ZContext& ctx);
LinkingElement l_identity(const ZContext& ctx);
LinkingElement l_add(const LinkingElement& p, const LinkingElement& q);
LinkingElement l_scale(Cplx c, const LinkingElement& p);
LinkingElement l_mul(const ZContext& ctx, const LinkingElement& p,
                     const LinkingElement& q);
LinkingElement l_adjoint(const ZContext& ctx, const LinkingElement& p);
Cplx l_trace(const LinkingElement& p);
double l_max_abs(const LinkingElement& p);
double l_max_abs_diff(const LinkingElement& p, const LinkingElement& q);
LinkingElement random_linking(const ZContext& ctx, std::mt19937_64& rng);

// Elementary factor of a Z tensor chain.
struct ZFactor {
  int corner;  // 0..3 as above
  int index;   // F-edge for corners 0,1; G-edge for corners 2,3
};

struct ZChainTerm {
  Cplx coeff;
  std::vector<ZFactor> factors;
};
using ZChainSum = std::vector<ZChainTerm>;

// L-valued inner product of two elementary factors (level 1).
LinkingElement z_elem_inner(const ZContext& ctx, const ZFactor& z1,
                            const ZFactor& z2);
// phi_Z(lambda) applied to an elementary factor, expanded elementary.
std::vector<std::pair<Cplx, ZFactor>> phi_z_elem(const ZContext& ctx,
                                                 const LinkingElement& lambda,
                                                 const ZFactor& z);
// Right action z . lambda, expanded elementary.
std::vector<std::pair<Cplx, ZFactor>> right_act_z(const ZContext& ctx,
                                                  const ZFactor& z,
                                                  const LinkingElement& lambda);
// Recursive balanced inner product of equal-length chains.
LinkingElement chain_inner(const ZContext& ctx,
                           std::span<const ZFactor> lhs,
                           std::span<const ZFactor> rhs);

// Corner-coordinate element of Z^{(x) n} (n = level; level 0 is L itself,
// with corner 2 reindexed over G-vertices via beta).
struct ZStackElement {
  int level = 0;
  Eigen::VectorXcd ff, fx, ex, ee;
};

/// The four Fock stacks of F_N(Z) with their path bases.
struct ZFock {
  ZContext ctx;
  int levels;
  FockBasisPtr fock_f;  // paths of the top graph
  FockBasisPtr fock_e;  // paths of the bottom graph

  ZFock(ZContext c, int n);
  ZStackElement zero_stack(int level) const;
  int corner_dim(int corner, int level) const;
};

ZStackElement stack_add(const ZStackElement& p, const ZStackElement& q);
double stack_max_abs_diff(const ZStackElement& p, const ZStackElement& q);
double stack_column2_abs(const ZStackElement& p);  // corners 1 and 3
ZStackElement random_stack(const ZFock& zf, int level, std::mt19937_64& rng);

// Realize a chain sum in corner coordinates (the structural isomorphism of
// F(Z) with its 2x2 block form; the W recursion lives here).
ZStackElement realize(const ZFock& zf, const ZChainSum& chains);

// Canonical section: the chain of an (corner, level, index) basis element;
// level must be >= 1.
std::vector<ZFactor> section_chain(const ZFock& zf, int corner, int level,
                                   int index);

// phi_infinity(lambda) applied to a basis element of the given corner/level.
ZStackElement apply_phi_inf(const ZFock& zf, const LinkingElement& lambda,
                            int corner, int level, int index);

// T_xi applied to a basis element (xi given in corner coordinates, level m).
ZStackElement apply_creation(const ZFock& zf, const ZStackElement& xi,
                             int corner, int level, int index);

// The left action phi_Z(lambda) on a corner element of any level.
ZStackElement z_left_action(const ZFock& zf, const LinkingElement& lambda,
                            const ZStackElement& z);

// T_xi applied to a whole corner element (linear extension of
// apply_creation over the input's basis).
ZStackElement apply_creation_stack(const ZFock& zf, const ZStackElement& xi,
                                   const ZStackElement& z);

// Multiplicativity and adjoint compatibility of phi_Z on elementary factors.
double z_left_action_residual(const ZFock& zf, int trials,
                              std::mt19937_64& rng);

struct BuildZReport {
  ZContext ctx;
  double gram_min_eig = 0.0;
  int gram_rank = 0;
  int expected_rank = 0;
  bool psd = false;
};

// Assembles Z from a verified certificate and checks the level-1 Gram.
BuildZReport build_z(const MoritaCertificate& cert);

struct ZFockDims {
  // ranks[level][corner] from chain Grams; expected path counts alongside.
  std::vector<std::array<int, 4>> ranks;
  std::vector<std::array<int, 4>> expected;
  bool ok = true;
};

ZFockDims z_fock_decomposition(const ZFock& zf, int max_level);

struct CornerReport {
  double creation_p = 0.0;  // p T_xi p  vs  T_{h1}
  double creation_q = 0.0;  // q T_xi q  vs  T_{k2} (x) I
  double diag_p = 0.0;      // p phi(lambda) p  vs  phi(b)
  double diag_q = 0.0;      // q phi(lambda) q  vs  phi(a) (x) I
  double max_dev() const {
    return std::max(std::max(creation_p, creation_q),
                    std::max(diag_p, diag_q));
  }
};

// Evaluates the four corner identities on one F-side and one E-side basis
// input (levels chosen so xi.level + input level <= N).
CornerReport corner_compression(const ZFock& zf, const ZStackElement& xi,
                                const LinkingElement& lambda, int f_level,
                                int f_index, int e_level, int e_index);

// Column-2 leakage of phi_Z(lambda) and T_xi images of first-column
// elements, over seeded random trials on safe levels.
double z_invariance_residual(const ZFock& zf, int trials,
                             std::mt19937_64& rng);

struct LinkingReport {
  BuildZReport build;
  ZFockDims dims;
  double corner_residual_max = 0.0;
  double invariance_residual = 0.0;
  double action_residual = 0.0;
  bool pass = false;
};

LinkingReport run_linking(const GraphPtr& g, const GraphPtr& f, int levels,
                          int trials, std::uint64_t seed);

// The identity certificate of a graph with itself (beta = alpha = id).
MoritaCertificate identity_certificate(const GraphPtr& g);

}  // namespace graphcorr
