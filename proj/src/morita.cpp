#include "graphcorr/morita.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace graphcorr {

XElement XElement::zero(RepPtr sigma, RepPtr tau) {
  require_same_graph(sigma->graph, tau->graph);
  XElement x;
  for (int q = 0; q < sigma->graph->vertex_count(); ++q)
    x.blocks.push_back(Eigen::MatrixXcd::Zero(sigma->mult[q], tau->mult[q]));
  x.sigma = std::move(sigma);
  x.tau = std::move(tau);
  return x;
}

XElement XElement::unit(RepPtr sigma, RepPtr tau, int q, int i, int j) {
  XElement x = zero(std::move(sigma), std::move(tau));
  x.blocks[q](i, j) = 1.0;
  return x;
}

XElement x_add(const XElement& a, const XElement& b) {
  XElement c = a;
  for (size_t q = 0; q < c.blocks.size(); ++q) c.blocks[q] += b.blocks[q];
  return c;
}

XElement x_scale(Cplx s, const XElement& a) {
  XElement c = a;
  for (auto& blk : c.blocks) blk *= s;
  return c;
}

double x_max_abs_diff(const XElement& a, const XElement& b) {
  double m = 0.0;
  for (size_t q = 0; q < a.blocks.size(); ++q)
    if (a.blocks[q].size() > 0)
      m = std::max(m, (a.blocks[q] - b.blocks[q]).cwiseAbs().maxCoeff());
  return m;
}

XElement random_x(const RepPtr& sigma, const RepPtr& tau, std::mt19937_64& rng) {
  XElement x = XElement::zero(sigma, tau);
  for (int q = 0; q < sigma->graph->vertex_count(); ++q)
    x.blocks[q] = random_matrix(sigma->mult[q], tau->mult[q], rng);
  return x;
}

CommutantElement x_inner_right(const XElement& x, const XElement& y) {
  CommutantElement c = CommutantElement::zero(x.tau);
  for (size_t q = 0; q < x.blocks.size(); ++q)
    c.blocks[q] = x.blocks[q].adjoint() * y.blocks[q];
  return c;
}

CommutantElement x_inner_left(const XElement& x, const XElement& y) {
  CommutantElement c = CommutantElement::zero(x.sigma);
  for (size_t q = 0; q < x.blocks.size(); ++q)
    c.blocks[q] = x.blocks[q] * y.blocks[q].adjoint();
  return c;
}

XElement x_act(const CommutantElement& c, const XElement& x,
               const CommutantElement& d) {
  require_same_rep(c.rep, x.sigma);
  require_same_rep(d.rep, x.tau);
  XElement out = x;
  for (size_t q = 0; q < x.blocks.size(); ++q)
    out.blocks[q] = c.blocks[q] * x.blocks[q] * d.blocks[q];
  return out;
}

CommutantElement pairing_mA(const XElement& x, const XElement& y) {
  return x_inner_left(x, y);
}

CommutantElement pairing_mB(const XElement& x, const XElement& y) {
  return x_inner_right(x, y);
}

double verify_pairings(const RepPtr& sigma, const RepPtr& tau, int samples,
                       std::mt19937_64& rng) {
  double worst = 0.0;
  const int n = sigma->graph->vertex_count();

  // Exhaustive unit-block checks while the domain basis stays small.
  std::vector<XElement> units;
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < sigma->mult[q]; ++i)
      for (int j = 0; j < tau->mult[q]; ++j)
        units.push_back(XElement::unit(sigma, tau, q, i, j));
  if (units.size() * units.size() <= 200) {
    for (const XElement& x1 : units)
      for (const XElement& y1 : units)
        for (const XElement& x2 : units)
          for (const XElement& y2 : units) {
            CommutantElement direct = comm_mul(
                comm_adjoint(pairing_mA(x1, y1)), pairing_mA(x2, y2));
            CommutantElement c = x_inner_right(x1, x2);
            XElement y2c = y2;
            for (int q = 0; q < n; ++q)
              y2c.blocks[q] = y2.blocks[q] * c.blocks[q].adjoint();
            worst = std::max(
                worst, comm_max_abs_diff(direct, x_inner_left(y1, y2c)));
          }
  }

  for (int t = 0; t < samples; ++t) {
    XElement x1 = random_x(sigma, tau, rng), y1 = random_x(sigma, tau, rng);
    XElement x2 = random_x(sigma, tau, rng), y2 = random_x(sigma, tau, rng);

    // Right inner products: <m_A(x1 (x) y1~), m_A(x2 (x) y2~)> both routes.
    CommutantElement m1 = pairing_mA(x1, y1), m2 = pairing_mA(x2, y2);
    CommutantElement direct = comm_mul(comm_adjoint(m1), m2);
    CommutantElement c = x_inner_right(x1, x2);  // <x1,x2>_{tau(A)'}
    // c . y2~ = (y2 . c*)~ : stored blocks y2_q c_q^H
    XElement y2c = y2;
    for (int q = 0; q < n; ++q) y2c.blocks[q] = y2.blocks[q] * c.blocks[q].adjoint();
    CommutantElement chain = x_inner_left(y1, y2c);  // <y1~, .>_{sigma(A)'}
    worst = std::max(worst, comm_max_abs_diff(direct, chain));

    // Left inner products.
    CommutantElement directL = comm_mul(m1, comm_adjoint(m2));
    CommutantElement d = x_inner_right(y1, y2);  // _tau<y1~,y2~> = <y1,y2>_tau
    XElement x1d = x1;
    for (int q = 0; q < n; ++q) x1d.blocks[q] = x1.blocks[q] * d.blocks[q];
    CommutantElement chainL = x_inner_left(x1d, x2);
    worst = std::max(worst, comm_max_abs_diff(directL, chainL));

    // Bimodule property of m_A over sigma(A)'.
    CommutantElement a = random_commutant(sigma, rng);
    CommutantElement b = random_commutant(sigma, rng);
    XElement ax = x1;
    for (int q = 0; q < n; ++q) ax.blocks[q] = a.blocks[q] * x1.blocks[q];
    XElement by = y1;  // y1~ . b = (b* . y1)~
    for (int q = 0; q < n; ++q) by.blocks[q] = b.blocks[q].adjoint() * y1.blocks[q];
    CommutantElement lhs = pairing_mA(ax, by);
    CommutantElement rhs = comm_mul(comm_mul(a, m1), b);
    worst = std::max(worst, comm_max_abs_diff(lhs, rhs));

    // Bimodule property of m_B over tau(A)'.
    CommutantElement ct = random_commutant(tau, rng);
    CommutantElement dt = random_commutant(tau, rng);
    XElement xc = x1;  // c . x1~ = (x1 . c*)~
    for (int q = 0; q < n; ++q) xc.blocks[q] = x1.blocks[q] * ct.blocks[q].adjoint();
    XElement yd = y1;
    for (int q = 0; q < n; ++q) yd.blocks[q] = y1.blocks[q] * dt.blocks[q];
    CommutantElement lhsB = pairing_mB(xc, yd);
    CommutantElement rhsB = comm_mul(comm_mul(ct, pairing_mB(x1, y1)), dt);
    worst = std::max(worst, comm_max_abs_diff(lhsB, rhsB));

    // Compatibility _sigma<x,y> . z = x . <y,z>_tau of X itself.
    XElement z = random_x(sigma, tau, rng);
    CommutantElement li = x_inner_left(x1, y1);
    XElement lz = z;
    for (int q = 0; q < n; ++q) lz.blocks[q] = li.blocks[q] * z.blocks[q];
    CommutantElement ri = x_inner_right(y1, z);
    XElement xr = x1;
    for (int q = 0; q < n; ++q) xr.blocks[q] = x1.blocks[q] * ri.blocks[q];
    worst = std::max(worst, x_max_abs_diff(lz, xr));
  }
  return worst;
}

// --------------------------- permutation bimodules -------------------------

Eigen::VectorXcd a_sigma_right_act(const PermutationBimodule& m,
                                   const Eigen::VectorXcd& e,
                                   const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(e.size());
  for (int x = 0; x < e.size(); ++x) out(x) = e(x) * b(m.sigma.map[x]);
  return out;
}

Eigen::VectorXcd a_sigma_left_act(const PermutationBimodule& m,
                                  const Eigen::VectorXcd& b,
                                  const Eigen::VectorXcd& e) {
  (void)m;
  return b.cwiseProduct(e);
}

Eigen::VectorXcd a_sigma_inner_right(const PermutationBimodule& m,
                                     const Eigen::VectorXcd& e,
                                     const Eigen::VectorXcd& f) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(e.size());
  for (int x = 0; x < e.size(); ++x)
    out(m.sigma.map[x]) += std::conj(e(x)) * f(x);
  return out;
}

Eigen::VectorXcd a_sigma_inner_left(const PermutationBimodule& m,
                                    const Eigen::VectorXcd& e,
                                    const Eigen::VectorXcd& f) {
  (void)m;
  Eigen::VectorXcd out(e.size());
  for (int x = 0; x < e.size(); ++x) out(x) = e(x) * std::conj(f(x));
  return out;
}

PermutationBimodule bimodule_tensor(const PermutationBimodule& x,
                                    const PermutationBimodule& y) {
  if (x.sigma.points != y.sigma.points)
    throw std::invalid_argument("point set mismatch");
  // Balanced basis delta_x (x) delta_{sigma(x)}; the induced structure is
  // that of A_{tau o sigma}.
  std::vector<int> comp(x.size());
  for (int i = 0; i < x.size(); ++i) comp[i] = y.sigma.map[x.sigma.map[i]];
  return {VertexPermutation::from_one_line(x.sigma.points, std::move(comp))};
}

namespace {

Eigen::VectorXcd perm_pullback(const std::vector<int>& perm,
                               const Eigen::VectorXcd& a) {
  // (a_perm)(x) = a(perm(x))
  Eigen::VectorXcd out(a.size());
  for (int x = 0; x < a.size(); ++x) out(x) = a(perm[x]);
  return out;
}

// Inner products of A_sigma (x) A_tau on elementary tensors, via the
// balancing formula.
Eigen::VectorXcd st_inner_right(const PermutationBimodule& ms,
                                const PermutationBimodule& mt,
                                const Eigen::VectorXcd& z1,
                                const Eigen::VectorXcd& w1,
                                const Eigen::VectorXcd& z2,
                                const Eigen::VectorXcd& w2) {
  // <z1 (x) w1, z2 (x) w2>_A = <w1, <z1,z2>_{A_sigma} . w2>_{A_tau}
  Eigen::VectorXcd mid = a_sigma_inner_right(ms, z1, z2);
  Eigen::VectorXcd act = a_sigma_left_act(mt, mid, w2);
  return a_sigma_inner_right(mt, w1, act);
}

Eigen::VectorXcd st_inner_left(const PermutationBimodule& ms,
                               const PermutationBimodule& mt,
                               const Eigen::VectorXcd& z1,
                               const Eigen::VectorXcd& w1,
                               const Eigen::VectorXcd& z2,
                               const Eigen::VectorXcd& w2) {
  // _A<z1 (x) w1, z2 (x) w2> = _A<z1 . _A<w1,w2>, z2>
  Eigen::VectorXcd mid = a_sigma_inner_left(mt, w1, w2);
  Eigen::VectorXcd act = a_sigma_right_act(ms, z1, mid);
  return a_sigma_inner_left(ms, act, z2);
}

Eigen::VectorXcd collapse_psi(const VertexPermutation& sigma,
                              const Eigen::VectorXcd& z,
                              const Eigen::VectorXcd& w) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(z.size());
  for (int x = 0; x < z.size(); ++x)
    out(sigma.map[x]) += z(x) * w(sigma.map[x]);
  return out;
}

Eigen::VectorXcd unit_vec(int n, int i) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  v(i) = 1.0;
  return v;
}

Eigen::VectorXcd random_vec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = Cplx(dist(rng), dist(rng));
  return v;
}

}  // namespace

double a_sigma_collapse_iso(const VertexPermutation& sigma,
                            const VertexPermutation& tau, int samples,
                            std::mt19937_64& rng) {
  const int n = sigma.size();
  if (tau.size() != n) throw std::invalid_argument("point set mismatch");
  PermutationBimodule ms{sigma}, mt{tau};
  const VertexPermutation sinv = sigma.inverse();
  const auto omega = [&](const Eigen::VectorXcd& a) {
    return perm_pullback(sinv.map, a);
  };
  const auto pi = [&](const Eigen::VectorXcd& a) {
    return perm_pullback(tau.map, a);
  };

  double worst = 0.0;
  const auto check_pair = [&](const Eigen::VectorXcd& z1,
                              const Eigen::VectorXcd& w1,
                              const Eigen::VectorXcd& z2,
                              const Eigen::VectorXcd& w2) {
    Eigen::VectorXcd p1 = collapse_psi(sigma, z1, w1);
    Eigen::VectorXcd p2 = collapse_psi(sigma, z2, w2);
    // <psi(s), psi(t)>_A = pi(<s,t>)
    Eigen::VectorXcd lhs = p1.conjugate().cwiseProduct(p2);
    Eigen::VectorXcd rhs = pi(st_inner_right(ms, mt, z1, w1, z2, w2));
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    // _A<psi(s), psi(t)> = omega(_A<s,t>)
    Eigen::VectorXcd lhsL = p1.cwiseProduct(p2.conjugate());
    Eigen::VectorXcd rhsL = omega(st_inner_left(ms, mt, z1, w1, z2, w2));
    worst = std::max(worst, (lhsL - rhsL).cwiseAbs().maxCoeff());
  };
  const auto check_bimodule = [&](const Eigen::VectorXcd& a,
                                  const Eigen::VectorXcd& z,
                                  const Eigen::VectorXcd& w,
                                  const Eigen::VectorXcd& b) {
    // psi(a . (z (x) w) . b) = omega(a) psi(z (x) w) pi(b)
    Eigen::VectorXcd az = a_sigma_left_act(ms, a, z);
    Eigen::VectorXcd wb = a_sigma_right_act(mt, w, b);
    Eigen::VectorXcd lhs = collapse_psi(sigma, az, wb);
    Eigen::VectorXcd rhs =
        omega(a).cwiseProduct(collapse_psi(sigma, z, w)).cwiseProduct(pi(b));
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  };

  // Exhaustive over basis pairs.
  for (int x1 = 0; x1 < n; ++x1)
    for (int y1 = 0; y1 < n; ++y1)
      for (int x2 = 0; x2 < n; ++x2)
        for (int y2 = 0; y2 < n; ++y2)
          check_pair(unit_vec(n, x1), unit_vec(n, y1), unit_vec(n, x2),
                     unit_vec(n, y2));
  for (int u = 0; u < n; ++u)
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int w = 0; w < n; ++w)
          check_bimodule(unit_vec(n, u), unit_vec(n, x), unit_vec(n, y),
                         unit_vec(n, w));
  for (int t = 0; t < samples; ++t) {
    check_pair(random_vec(n, rng), random_vec(n, rng), random_vec(n, rng),
               random_vec(n, rng));
    check_bimodule(random_vec(n, rng), random_vec(n, rng), random_vec(n, rng),
                   random_vec(n, rng));
  }
  return worst;
}

double a_sigma_inverse_law(const VertexPermutation& sigma) {
  // A_sigma (x) A_sigma~ -> A by m_A: on the balanced basis
  // t_x = delta_x (x) delta_x~ the map is t_x -> delta_x; check it matches
  // _A<.,.> and intertwines the actions.
  const int n = sigma.size();
  PermutationBimodule ms{sigma};
  double worst = 0.0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      // m_A(delta_x (x) delta_y~) = _A<delta_x, delta_y>
      Eigen::VectorXcd m =
          a_sigma_inner_left(ms, unit_vec(n, x), unit_vec(n, y));
      Eigen::VectorXcd expect = Eigen::VectorXcd::Zero(n);
      if (x == y) expect(x) = 1.0;
      worst = std::max(worst, (m - expect).cwiseAbs().maxCoeff());
    }
  }
  // Inner product preservation: <m_A(s), m_A(t)>_A = <s,t>_{X (x) X~} where
  // <t_x, t_y> = [x=y] delta_x (computed through the balancing formula).
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      Eigen::VectorXcd lhs =
          unit_vec(n, x).conjugate().cwiseProduct(unit_vec(n, y));
      // <t_x,t_y>_A = <dx~, <dx,dy>_{A_sigma} . dy~>: the A_sigma~ right
      // inner product is the left one of A_sigma.
      Eigen::VectorXcd mid =
          a_sigma_inner_right(ms, unit_vec(n, x), unit_vec(n, y));
      // mid acts on dy~ through the conjugate (right action of A on
      // A_sigma~ is the twisted action through sigma with a star);
      // on deltas: dy~ . a = conj(a(sigma(y)))... for a = mid real 0/1 this
      // is mid(sigma(y)) dy~.
      Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
      if (x == y) rhs(x) = mid(sigma.map[y]);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double conjugation_iso(const GraphPtr& g, const VertexPermutation& sigma,
                       int samples, std::mt19937_64& rng) {
  const int n = g->vertex_count();
  const int m = g->edge_count();
  if (sigma.size() != n) throw std::invalid_argument("point set mismatch");
  PermutationBimodule ms{sigma};

  const auto pi = [&](const AlgebraElement& a) {
    AlgebraElement out = a;
    out.coeffs = perm_pullback(sigma.map, a.coeffs);
    return out;
  };
  const auto phi = [&](const Eigen::VectorXcd& a, const CorrElement& x,
                       const Eigen::VectorXcd& b) {
    // phi(a~ (x) x (x) b) = a* . x . b with E's own actions.
    AlgebraElement astar{g, a.conjugate()};
    AlgebraElement bel{g, b};
    return bimodule_action(astar, x, bel);
  };
  // Domain inner product along the balanced chain.
  const auto dom_inner = [&](const Eigen::VectorXcd& a, const CorrElement& x,
                             const Eigen::VectorXcd& b,
                             const Eigen::VectorXcd& c, const CorrElement& y,
                             const Eigen::VectorXcd& d) {
    // <a~, c~> in A_sigma~ = _A<a,c> of A_sigma
    Eigen::VectorXcd first = a_sigma_inner_left(ms, a, c);
    // left action on y in E, then <x, .>_E
    AlgebraElement firstA{g, first};
    CorrElement fy = bimodule_action(firstA, y, AlgebraElement::one(g));
    AlgebraElement mid = corr_inner_product(x, fy);
    // left action on d in A_sigma (plain), then <b, .>_{A_sigma}
    Eigen::VectorXcd md = mid.coeffs.cwiseProduct(d);
    return a_sigma_inner_right(ms, b, md);
  };

  double worst = 0.0;
  const auto check_inner = [&](const Eigen::VectorXcd& a, const CorrElement& x,
                               const Eigen::VectorXcd& b,
                               const Eigen::VectorXcd& c, const CorrElement& y,
                               const Eigen::VectorXcd& d) {
    AlgebraElement lhs = corr_inner_product(phi(a, x, b), phi(c, y, d));
    Eigen::VectorXcd rhs = perm_pullback(sigma.map, dom_inner(a, x, b, c, y, d));
    worst = std::max(worst, (lhs.coeffs - rhs).cwiseAbs().maxCoeff());
  };
  const auto check_bimodule = [&](const AlgebraElement& alpha,
                                  const Eigen::VectorXcd& a,
                                  const CorrElement& x,
                                  const Eigen::VectorXcd& b,
                                  const AlgebraElement& beta) {
    // alpha . (a~ (x) x (x) b) . beta = (a . alpha*)~ (x) x (x) (b . beta)
    Eigen::VectorXcd aa(n);
    for (int v = 0; v < n; ++v)
      aa(v) = a(v) * std::conj(alpha.coeffs(sigma.map[v]));
    Eigen::VectorXcd bb = a_sigma_right_act(ms, b, beta.coeffs);
    CorrElement lhs = phi(aa, x, bb);
    CorrElement rhs = bimodule_action(pi(alpha), phi(a, x, b), pi(beta));
    worst = std::max(worst, (lhs.coeffs - rhs.coeffs).cwiseAbs().maxCoeff());
  };

  // Exhaustive over basis triples.
  for (int a = 0; a < n; ++a)
    for (int e = 0; e < m; ++e)
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c)
          for (int f = 0; f < m; ++f)
            for (int d = 0; d < n; ++d)
              check_inner(unit_vec(n, a), CorrElement::delta(g, e),
                          unit_vec(n, b), unit_vec(n, c),
                          CorrElement::delta(g, f), unit_vec(n, d));
        for (int u = 0; u < n; ++u)
          for (int w = 0; w < n; ++w)
            check_bimodule(AlgebraElement::delta(g, u), unit_vec(n, a),
                           CorrElement::delta(g, e), unit_vec(n, b),
                           AlgebraElement::delta(g, w));
      }
  for (int t = 0; t < samples && m > 0; ++t) {
    CorrElement x{g, random_vec(m, rng)}, y{g, random_vec(m, rng)};
    check_inner(random_vec(n, rng), x, random_vec(n, rng), random_vec(n, rng),
                y, random_vec(n, rng));
    check_bimodule(AlgebraElement{g, random_vec(n, rng)}, random_vec(n, rng),
                   x, random_vec(n, rng), AlgebraElement{g, random_vec(n, rng)});
  }
  return worst;
}

// --------------------------- dual Morita isomorphism -----------------------

Intertwiner dual_morita_apply(const XElement& x, const Intertwiner& eta,
                              const XElement& y) {
  require_same_rep(x.sigma, eta.rep);
  require_same_rep(x.sigma, y.sigma);
  const DirectedGraph& g = *eta.rep->graph;
  Intertwiner out = Intertwiner::zero(y.tau);
  for (int e = 0; e < g.edge_count(); ++e)
    out.blocks[e] =
        y.blocks[g.dst(e)].adjoint() * eta.blocks[e] * x.blocks[g.src(e)];
  return out;
}

DualMoritaReport dual_morita_iso(const RepPtr& sigma, const RepPtr& tau,
                                 int samples, std::mt19937_64& rng) {
  DualMoritaReport rep;
  const DirectedGraph& g = *sigma->graph;
  const int n = g.vertex_count();

  for (int t = 0; t < samples; ++t) {
    XElement x1 = random_x(sigma, tau, rng), y1 = random_x(sigma, tau, rng);
    XElement x2 = random_x(sigma, tau, rng), y2 = random_x(sigma, tau, rng);
    Intertwiner e1 = random_intertwiner(sigma, rng);
    Intertwiner e2 = random_intertwiner(sigma, rng);

    // Bimodule property over tau(A)'.
    CommutantElement a = random_commutant(tau, rng);
    CommutantElement b = random_commutant(tau, rng);
    XElement ax = x1;  // a . x1~ = (x1 . a*)~
    for (int q = 0; q < n; ++q) ax.blocks[q] = x1.blocks[q] * a.blocks[q].adjoint();
    XElement yb = y1;
    for (int q = 0; q < n; ++q) yb.blocks[q] = y1.blocks[q] * b.blocks[q];
    Intertwiner lhs = dual_morita_apply(ax, e1, yb);
    Intertwiner rhs = dual_pair(a, dual_morita_apply(x1, e1, y1), b);
    rep.bimodule_residual =
        std::max(rep.bimodule_residual, eta_max_abs_diff(lhs, rhs));

    // Inner product preservation.
    CommutantElement direct = eta_inner(dual_morita_apply(x1, e1, y1),
                                        dual_morita_apply(x2, e2, y2));
    CommutantElement c1 = x_inner_left(x1, x2);  // <x1~, x2~>_{sigma(A)'}
    Intertwiner e2c = act_left(c1, e2);
    CommutantElement c2 = eta_inner(e1, e2c);
    XElement y2c = y2;
    for (int q = 0; q < n; ++q) y2c.blocks[q] = c2.blocks[q] * y2.blocks[q];
    CommutantElement chain = x_inner_right(y1, y2c);
    rep.inner_residual =
        std::max(rep.inner_residual, comm_max_abs_diff(direct, chain));
  }

  // Surjectivity: images of all basis triples span E^tau.
  rep.expected_rank = 0;
  for (int e = 0; e < g.edge_count(); ++e)
    rep.expected_rank += tau->mult[g.dst(e)] * tau->mult[g.src(e)];
  std::vector<XElement> xb, yb;
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < sigma->mult[q]; ++i)
      for (int j = 0; j < tau->mult[q]; ++j)
        xb.push_back(XElement::unit(sigma, tau, q, i, j));
  yb = xb;
  std::vector<Intertwiner> eb = intertwiner_basis(sigma);

  // Exhaustive inner-product preservation over basis triples while the
  // domain basis stays small.
  const std::size_t triples = xb.size() * eb.size() * yb.size();
  if (triples > 0 && triples <= 200) {
    std::vector<std::tuple<const XElement*, const Intertwiner*, const XElement*>>
        basis3;
    for (const XElement& x : xb)
      for (const Intertwiner& eta : eb)
        for (const XElement& y : yb) basis3.emplace_back(&x, &eta, &y);
    for (const auto& [x1, e1, y1] : basis3)
      for (const auto& [x2, e2, y2] : basis3) {
        CommutantElement direct = eta_inner(dual_morita_apply(*x1, *e1, *y1),
                                            dual_morita_apply(*x2, *e2, *y2));
        CommutantElement c1 = x_inner_left(*x1, *x2);
        Intertwiner e2c = act_left(c1, *e2);
        CommutantElement c2 = eta_inner(*e1, e2c);
        XElement y2c = *y2;
        for (int q = 0; q < n; ++q) y2c.blocks[q] = c2.blocks[q] * y2->blocks[q];
        CommutantElement chain = x_inner_right(*y1, y2c);
        rep.inner_residual =
            std::max(rep.inner_residual, comm_max_abs_diff(direct, chain));
      }
  }
  const int flat = [&] {
    int d = 0;
    for (int e = 0; e < g.edge_count(); ++e)
      d += tau->mult[g.dst(e)] * tau->mult[g.src(e)];
    return d;
  }();
  Eigen::MatrixXcd images(flat, static_cast<long>(xb.size()) * yb.size() * eb.size());
  long col = 0;
  for (const XElement& x : xb)
    for (const Intertwiner& eta : eb)
      for (const XElement& y : yb) {
        Intertwiner im = dual_morita_apply(x, eta, y);
        long pos = 0;
        for (int e = 0; e < g.edge_count(); ++e)
          for (int i = 0; i < im.blocks[e].rows(); ++i)
            for (int j = 0; j < im.blocks[e].cols(); ++j)
              images(pos++, col) = im.blocks[e](i, j);
        ++col;
      }
  rep.image_rank = gram_rank(images * images.adjoint());
  return rep;
}

double dual_morita_chain_residual(const RepPtr& sigma, const RepPtr& tau,
                                  int samples, std::mt19937_64& rng) {
  // Phi: E^sigma (x) X -> X (x) E^tau through the m_A insertion
  // eta (x) y -> sum_i x_i (x) phi(x_i~ (x) eta (x) y) with
  // sum_i x_i x_i* = I (columns of matrix units).
  const DirectedGraph& g = *sigma->graph;
  const int n = g.vertex_count();
  std::vector<XElement> units;  // x_i with sum x_i x_i* = I
  for (int q = 0; q < n; ++q)
    for (int k = 0; k < sigma->mult[q]; ++k)
      units.push_back(XElement::unit(sigma, tau, q, k, 0));
  // sum_i x_i x_i* = (+)_q sum_k E_{k0} E_{k0}* = (+)_q I  requires
  // m^tau >= 1 which holds; entry (k,k) via column 0.

  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    Intertwiner eta1 = random_intertwiner(sigma, rng);
    Intertwiner eta2 = random_intertwiner(sigma, rng);
    XElement yy1 = random_x(sigma, tau, rng), yy2 = random_x(sigma, tau, rng);

    // <eta1 (x) y1, eta2 (x) y2>_{tau(A)'} = <y1, <eta1,eta2> . y2>
    CommutantElement c = eta_inner(eta1, eta2);
    XElement cy = yy2;
    for (int q = 0; q < n; ++q) cy.blocks[q] = c.blocks[q] * yy2.blocks[q];
    CommutantElement want = x_inner_right(yy1, cy);

    // Mapped: sum_{i,j} <x_i (x) phi_i, x_j (x) phi_j>
    //       = sum_{i,j} <phi_i, <x_i,x_j>_tau . phi_j>
    CommutantElement got = CommutantElement::zero(tau);
    std::vector<Intertwiner> im1, im2;
    for (const XElement& u : units) {
      im1.push_back(dual_morita_apply(u, eta1, yy1));
      im2.push_back(dual_morita_apply(u, eta2, yy2));
    }
    for (size_t i = 0; i < units.size(); ++i)
      for (size_t j = 0; j < units.size(); ++j) {
        CommutantElement xij = x_inner_right(units[i], units[j]);
        Intertwiner acted = act_left(xij, im2[j]);
        got = comm_add(got, eta_inner(im1[i], acted));
      }
    worst = std::max(worst, comm_max_abs_diff(want, got));
  }
  return worst;
}

// --------------------------- the Morita decision ---------------------------

double verify_correspondence_iso(const CorrespondenceIso& iso) {
  const DirectedGraph& g = *iso.g;
  double worst = 0.0;
  // psi-property on all basis triples.
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int e = 0; e < g.edge_count(); ++e)
      for (int w = 0; w < g.vertex_count(); ++w) {
        CorrElement lhs = bimodule_action(AlgebraElement::delta(iso.g, v),
                                          CorrElement::delta(iso.g, e),
                                          AlgebraElement::delta(iso.g, w));
        // phi(lhs) in D
        CorrElement phl = CorrElement::zero(iso.f);
        for (int k = 0; k < g.edge_count(); ++k)
          phl.coeffs(iso.alpha[k]) = lhs.coeffs(k);
        CorrElement rhs = bimodule_action(
            AlgebraElement::delta(iso.f, iso.beta[v]),
            CorrElement::delta(iso.f, iso.alpha[e]),
            AlgebraElement::delta(iso.f, iso.beta[w]));
        worst = std::max(worst, (phl.coeffs - rhs.coeffs).cwiseAbs().maxCoeff());
      }
  // Inner product preservation on all basis pairs.
  for (int e = 0; e < g.edge_count(); ++e)
    for (int k = 0; k < g.edge_count(); ++k) {
      AlgebraElement ip = corr_inner_product(CorrElement::delta(iso.g, e),
                                             CorrElement::delta(iso.g, k));
      AlgebraElement lhs = AlgebraElement::zero(iso.f);
      for (int v = 0; v < g.vertex_count(); ++v)
        lhs.coeffs(iso.beta[v]) = ip.coeffs(v);
      AlgebraElement rhs =
          corr_inner_product(CorrElement::delta(iso.f, iso.alpha[e]),
                             CorrElement::delta(iso.f, iso.alpha[k]));
      worst = std::max(worst, (lhs.coeffs - rhs.coeffs).cwiseAbs().maxCoeff());
    }
  return worst;
}

double verify_chain_w(const CorrespondenceIso& iso, int samples,
                      std::mt19937_64& rng) {
  const DirectedGraph& g = *iso.g;
  const DirectedGraph& f = *iso.f;
  const int m = g.edge_count();
  if (m == 0) return 0.0;  // X (x) F and E (x) X are both zero
  std::vector<int> alpha_inv(m);
  for (int e = 0; e < m; ++e) alpha_inv[iso.alpha[e]] = e;
  std::vector<int> beta_inv(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) beta_inv[iso.beta[v]] = v;

  // X (x) F basis: one slot per F-edge (delta_{r2(ff)} (x) delta_ff);
  // E (x) X basis: one slot per G-edge (delta_e (x) delta_{beta(s1(e))}).
  const auto w_apply = [&](const Eigen::VectorXcd& u) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(m);
    for (int ff = 0; ff < m; ++ff) out(alpha_inv[ff]) += u(ff);
    return out;
  };
  const auto inner_xf = [&](const Eigen::VectorXcd& u,
                            const Eigen::VectorXcd& v) {
    // B-valued: sum_ff conj(u_ff) v_ff delta_{s2(ff)}
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(f.vertex_count());
    for (int ff = 0; ff < m; ++ff) out(f.src(ff)) += std::conj(u(ff)) * v(ff);
    return out;
  };
  const auto inner_ex = [&](const Eigen::VectorXcd& u,
                            const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(f.vertex_count());
    for (int e = 0; e < m; ++e)
      out(iso.beta[g.src(e)]) += std::conj(u(e)) * v(e);
    return out;
  };

  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    Eigen::VectorXcd u = random_vec(m, rng), v = random_vec(m, rng);
    Eigen::VectorXcd a = random_vec(g.vertex_count(), rng);  // element of A
    Eigen::VectorXcd b = random_vec(f.vertex_count(), rng);  // element of B

    // Inner product preservation.
    worst = std::max(worst, (inner_xf(u, v) - inner_ex(w_apply(u), w_apply(v)))
                                .cwiseAbs()
                                .maxCoeff());

    // Bimodule actions: a . t_ff . b = a(beta^-1(r2(ff))) b(s2(ff)) t_ff,
    //                   a . u_e . b  = a(r1(e)) b(beta(s1(e))) u_e.
    Eigen::VectorXcd au(m);
    for (int ff = 0; ff < m; ++ff)
      au(ff) = a(beta_inv[f.dst(ff)]) * u(ff) * b(f.src(ff));
    Eigen::VectorXcd wau = w_apply(au);
    Eigen::VectorXcd awu(m);
    Eigen::VectorXcd wu = w_apply(u);
    for (int e = 0; e < m; ++e)
      awu(e) = a(g.dst(e)) * wu(e) * b(iso.beta[g.src(e)]);
    worst = std::max(worst, (wau - awu).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::optional<MoritaCertificate> morita_decide(const GraphPtr& g,
                                               const GraphPtr& f,
                                               std::uint64_t seed,
                                               int samples) {
  std::optional<GraphIsoCertificate> iso = graph_isomorphism(*g, *f);
  if (!iso) return std::nullopt;

  MoritaCertificate cert;
  cert.graph_iso = *iso;
  cert.corr_iso = {g, f, iso->beta, iso->alpha};
  cert.corr_residual = verify_correspondence_iso(cert.corr_iso);

  const int m = g->edge_count();
  cert.chain_w = Eigen::MatrixXcd::Zero(m, m);
  for (int e = 0; e < m; ++e) cert.chain_w(e, iso->alpha[e]) = 1.0;

  std::mt19937_64 rng(seed);
  cert.w_residual = verify_chain_w(cert.corr_iso, samples, rng);
  cert.verified = cert.corr_residual == 0.0 && cert.w_residual <= kTol;
  if (!cert.verified)
    throw std::runtime_error("certificate verification failed");
  return cert;
}

int gram_rank(const Eigen::MatrixXcd& gram) {
  if (gram.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                     Eigen::EigenvaluesOnly);
  int rank = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > kRankTol) ++rank;
  return rank;
}

}  // namespace graphcorr
