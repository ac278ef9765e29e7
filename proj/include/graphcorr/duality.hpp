#pragma once

#include <memory>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "graphcorr/fock.hpp"

namespace graphcorr {

/// A faithful normal representation of A = C(G0), determined up to unitary
/// equivalence by the multiplicity m_v >= 1 of each vertex.  H = (+)_v C^{m_v}
/// and the induced space E (x)_sigma H decomposes as (+)_e H_{s(e)}.
struct Representation {
  GraphPtr graph;
  std::vector<int> mult;

  int dim_h = 0;
  int dim_eh = 0;
  std::vector<int> h_offset;   // per vertex
  std::vector<int> eh_offset;  // per edge
};

using RepPtr = std::shared_ptr<const Representation>;

RepPtr make_representation(GraphPtr g, std::vector<int> mult);
bool same_rep(const RepPtr& a, const RepPtr& b);
void require_same_rep(const RepPtr& a, const RepPtr& b);

// (edge, dim H_{s(e)}) pairs describing E (x)_sigma H.
std::vector<std::pair<int, int>> induced_space_decomposition(
    const Representation& rep);

// An element eta* of (E^sigma)*, stored by its only nonzero blocks:
// T_e in B(H_{s(e)}, H_{r(e)}), one per edge.  All module operations below
// act on the underlying eta = (eta*)* per the dual-correspondence structure;
// the stored data therefore transforms conjugate-linearly.
struct Intertwiner {
  RepPtr rep;
  std::vector<Eigen::MatrixXcd> blocks;

  static Intertwiner zero(RepPtr rep);
  // Matrix unit at edge e, entry (i, j).
  static Intertwiner unit(RepPtr rep, int e, int i, int j);
};

// Block-diagonal element of sigma(A)' = (+)_v B(H_v).
struct CommutantElement {
  RepPtr rep;
  std::vector<Eigen::MatrixXcd> blocks;

  static CommutantElement zero(RepPtr rep);
  static CommutantElement identity(RepPtr rep);
  static CommutantElement unit(RepPtr rep, int v, int i, int j);
};

CommutantElement comm_add(const CommutantElement& a, const CommutantElement& b);
CommutantElement comm_mul(const CommutantElement& a, const CommutantElement& b);
CommutantElement comm_adjoint(const CommutantElement& a);
double comm_max_abs(const CommutantElement& a);
double comm_max_abs_diff(const CommutantElement& a, const CommutantElement& b);

Intertwiner eta_add(const Intertwiner& a, const Intertwiner& b);
Intertwiner eta_scale(Cplx c, const Intertwiner& a);  // c * eta
double eta_max_abs_diff(const Intertwiner& a, const Intertwiner& b);

// Full matrix of eta*: (+)_e H_{s(e)} -> (+)_v H_v.
Eigen::MatrixXcd intertwiner_embed(const Intertwiner& eta);

// True iff M (sigma^E o phi)(delta_v) = sigma(delta_v) M for every vertex.
bool is_intertwiner(const Eigen::MatrixXcd& m, const Representation& rep,
                    double tol = kTightTol);

// Matrix-unit basis of (E^sigma)*; dimension sum_e m_{r(e)} m_{s(e)}.
std::vector<Intertwiner> intertwiner_basis(RepPtr rep);

// Per-vertex Gram G_v = sum_{r(e)=v} T_e T_e*; returns (inside, norm) with
// norm = sqrt(max_v lambda_max(G_v)) and inside <=> norm < 1.
std::pair<bool, double> ball_membership(const Intertwiner& eta);

// One element per loop edge: the identity block on that loop.
std::vector<Intertwiner> center_basis(RepPtr rep);

// a . eta = (I_E (x) a) eta  and  eta . a = eta a   (actions on eta itself).
Intertwiner act_left(const CommutantElement& a, const Intertwiner& eta);
Intertwiner act_right(const Intertwiner& eta, const CommutantElement& a);
Intertwiner dual_pair(const CommutantElement& a, const Intertwiner& eta,
                      const CommutantElement& b);
// <eta, xi> = eta* xi, conjugate-linear in eta.
CommutantElement eta_inner(const Intertwiner& eta, const Intertwiner& xi);

/// The Hilbert space F_N(E) (x)_sigma H: one H_{s(mu)} block per Fock basis
/// path.  Used by the U map and the commutant checks.
struct FockHilbert {
  FockBasisPtr fock;
  RepPtr rep;
  std::vector<int> offset;  // per Fock basis element
  int dim = 0;

  FockHilbert(FockBasisPtr fock_, RepPtr rep_);
  int block_dim(int fock_index) const;
  int level_begin(int n) const;  // coordinate offset of a whole level
  int level_end(int n) const;
};

// U(eta_1 (x) ... (x) eta_n (x) h): returns the level-n slice coordinates in
// the path (x) H basis.  n = 0 returns h.
Eigen::VectorXcd u_map(std::span<const Intertwiner> etas,
                       const Eigen::VectorXcd& h, const FockHilbert& space);

// <eta_1 (x) ... (x) h, xi_1 (x) ... (x) h'> computed by the inductive
// balanced formula; the independent counterpart of the Hilbert inner product
// of the u_map images.
Cplx u_preimage_inner(std::span<const Intertwiner> etas,
                      const Eigen::VectorXcd& h,
                      std::span<const Intertwiner> xis,
                      const Eigen::VectorXcd& hp);

// Right creation by eta on F_N(E) (x) H (the U-conjugated creation operator
// of E^sigma): mu (x) h -> sum_{r(e)=s(mu)} (mu.e) (x) T_e* h.
Eigen::VectorXcd apply_right_creation(const Intertwiner& eta,
                                      const FockHilbert& space,
                                      const Eigen::VectorXcd& v);

// T_x (x) I_H on F_N(E) (x) H.
Eigen::VectorXcd apply_induced_creation(const CorrElement& x,
                                        const FockHilbert& space,
                                        const Eigen::VectorXcd& v);

// max over basis vectors of levels <= N-2 of |(SR - RS) b| where
// S = right creation by eta and R = T_x (x) I.
double commutant_commutator_check(const Intertwiner& eta, const CorrElement& x,
                                  int levels);

// Random helpers shared by the verification suites.
Eigen::MatrixXcd random_matrix(int rows, int cols, std::mt19937_64& rng);
Intertwiner random_intertwiner(const RepPtr& rep, std::mt19937_64& rng);
CommutantElement random_commutant(const RepPtr& rep, std::mt19937_64& rng);

}  // namespace graphcorr
