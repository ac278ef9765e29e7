#pragma once

#include <optional>
#include <random>
#include <vector>

#include "graphcorr/duality.hpp"

namespace graphcorr {

// ---------------------------------------------------------------------------
// The sigma(A)'-tau(A)' equivalence bimodule X = (+)_q B(K_q, H_q) built from
// two faithful representations of the same vertex algebra.  Elements carry
// one m^sigma_q x m^tau_q block per vertex.
// ---------------------------------------------------------------------------

struct XElement {
  RepPtr sigma;  // left side
  RepPtr tau;    // right side
  std::vector<Eigen::MatrixXcd> blocks;

  static XElement zero(RepPtr sigma, RepPtr tau);
  // Matrix unit at vertex q, entry (i, j).
  static XElement unit(RepPtr sigma, RepPtr tau, int q, int i, int j);
};

XElement x_add(const XElement& a, const XElement& b);
XElement x_scale(Cplx c, const XElement& a);
double x_max_abs_diff(const XElement& a, const XElement& b);
XElement random_x(const RepPtr& sigma, const RepPtr& tau, std::mt19937_64& rng);

// <x,y>_{tau(A)'} = (+)_q x_q* y_q     (right inner product)
CommutantElement x_inner_right(const XElement& x, const XElement& y);
// _{sigma(A)'}<x,y> = (+)_q x_q y_q*   (left inner product)
CommutantElement x_inner_left(const XElement& x, const XElement& y);
// c . x . d with c in sigma(A)', d in tau(A)'.
XElement x_act(const CommutantElement& c, const XElement& x,
               const CommutantElement& d);

// m_A(x (x) y~) = _{sigma(A)'}<x,y> and m_B(x~ (x) y) = <x,y>_{tau(A)'}.
CommutantElement pairing_mA(const XElement& x, const XElement& y);
CommutantElement pairing_mB(const XElement& x, const XElement& y);

// Residual of the inner-product preservation identities of m_A/m_B over
// seeded random samples (both evaluation routes compared).
double verify_pairings(const RepPtr& sigma, const RepPtr& tau, int samples,
                       std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Permutation bimodules A_sigma: the vertex algebra with right action and
// right inner product twisted by a permutation.  Elements are coefficient
// vectors over the point set.
// ---------------------------------------------------------------------------

struct PermutationBimodule {
  VertexPermutation sigma;
  int size() const { return sigma.size(); }
};

// The four structure maps of A_sigma.
Eigen::VectorXcd a_sigma_right_act(const PermutationBimodule& m,
                                   const Eigen::VectorXcd& e,
                                   const Eigen::VectorXcd& b);
Eigen::VectorXcd a_sigma_left_act(const PermutationBimodule& m,
                                  const Eigen::VectorXcd& b,
                                  const Eigen::VectorXcd& e);
Eigen::VectorXcd a_sigma_inner_right(const PermutationBimodule& m,
                                     const Eigen::VectorXcd& e,
                                     const Eigen::VectorXcd& f);
Eigen::VectorXcd a_sigma_inner_left(const PermutationBimodule& m,
                                    const Eigen::VectorXcd& e,
                                    const Eigen::VectorXcd& f);

// A_sigma (x)_A A_tau collapses onto the basis delta_x (x) delta_{sigma(x)};
// the result carries the structure of A_{tau o sigma}.
PermutationBimodule bimodule_tensor(const PermutationBimodule& x,
                                    const PermutationBimodule& y);

// The explicit (omega, psi, pi): A_sigma (x) A_tau -> A with
// omega(a) = a_{sigma^-1}, psi(z (x) w) = sum_x z_x w_{sigma(x)}
// delta_{sigma(x)}, pi(a) = a_tau.  Returns the max residual over the
// exhaustive basis checks plus `samples` random tuples (0 when exact).
double a_sigma_collapse_iso(const VertexPermutation& sigma,
                            const VertexPermutation& tau, int samples,
                            std::mt19937_64& rng);

// Inverse law: m_A-style collapse A_sigma (x) A_sigma~ -> A, exhaustive
// basis verification.
double a_sigma_inverse_law(const VertexPermutation& sigma);

// The conjugation pair (pi, phi): A_sigma~ (x) E (x) A_sigma -> E with
// phi(a~ (x) x (x) b) = a* . x . b and pi(c) = c_sigma; verifies the twisted
// bimodule and inner-product identities on all basis triples plus `samples`
// random tuples.
double conjugation_iso(const GraphPtr& g, const VertexPermutation& sigma,
                       int samples, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// The dual-correspondence isomorphism phi: X~ (x) E^sigma (x) X -> E^tau,
// phi(x~ (x) eta (x) y) = (I_E (x) x*) eta y.
// ---------------------------------------------------------------------------

struct DualMoritaReport {
  double bimodule_residual = 0.0;
  double inner_residual = 0.0;
  int image_rank = 0;
  int expected_rank = 0;
  bool ok() const {
    return bimodule_residual <= kTol && inner_residual <= kTol &&
           image_rank == expected_rank;
  }
};

Intertwiner dual_morita_apply(const XElement& x, const Intertwiner& eta,
                              const XElement& y);

DualMoritaReport dual_morita_iso(const RepPtr& sigma, const RepPtr& tau,
                                 int samples, std::mt19937_64& rng);

// E^sigma (x) X = X (x) E^tau through the m_A-insertion chain: inner products
// of mapped spanning pairs compared against the originals.
double dual_morita_chain_residual(const RepPtr& sigma, const RepPtr& tau,
                                  int samples, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Morita decision for graph correspondences.
// ---------------------------------------------------------------------------

// The correspondence isomorphism (omega, phi) induced by a graph isomorphism:
// omega(delta_v) = delta_{beta(v)}, phi(delta_e) = delta_{alpha(e)}.
struct CorrespondenceIso {
  GraphPtr g;  // domain graph (correspondence E over A)
  GraphPtr f;  // codomain graph (correspondence D over B)
  std::vector<int> beta;
  std::vector<int> alpha;
};

// Exhaustive basis verification of the psi-property and inner-product
// preservation for a CorrespondenceIso; returns the max residual.
double verify_correspondence_iso(const CorrespondenceIso& iso);

struct MoritaCertificate {
  GraphIsoCertificate graph_iso;
  CorrespondenceIso corr_iso;
  // W: X (x) F -> E (x) X over the collapsed path-type bases (one basis
  // vector per edge on each side): W maps the F-edge slot f to the G-edge
  // slot alpha^-1(f).
  Eigen::MatrixXcd chain_w;
  double corr_residual = 0.0;
  double w_residual = 0.0;
  bool verified = false;
};

// Residual of W's inner-product and bimodule compatibility over seeded
// random samples.
double verify_chain_w(const CorrespondenceIso& iso, int samples,
                      std::mt19937_64& rng);

std::optional<MoritaCertificate> morita_decide(const GraphPtr& g,
                                               const GraphPtr& f,
                                               std::uint64_t seed = 0,
                                               int samples = 100);

// Numeric rank of a Hermitian PSD Gram matrix (eigenvalues above kRankTol).
int gram_rank(const Eigen::MatrixXcd& gram);

}  // namespace graphcorr
