#include "graphcorr/verify.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include <Eigen/QR>

namespace graphcorr {

int intertwiner_nullspace_dim(const Representation& rep) {
  const DirectedGraph& g = *rep.graph;
  const int kH = rep.dim_h, kEH = rep.dim_eh;
  const int unknowns = kH * kEH;
  if (unknowns == 0) return 0;
  Eigen::MatrixXd sys =
      Eigen::MatrixXd::Zero(g.vertex_count() * unknowns, unknowns);
  // Unknown (p, q) -> column p * kEH + q.  Constraint rows stack
  // M D_v - S_v M entrywise per vertex.
  std::vector<int> col_range(kEH);  // r(e) of the edge owning column q
  for (int e = 0; e < g.edge_count(); ++e)
    for (int q = rep.eh_offset[e];
         q < rep.eh_offset[e] + rep.mult[g.src(e)]; ++q)
      col_range[q] = g.dst(e);
  std::vector<int> row_vertex(kH);
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int p = rep.h_offset[v]; p < rep.h_offset[v] + rep.mult[v]; ++p)
      row_vertex[p] = v;
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int p = 0; p < kH; ++p)
      for (int q = 0; q < kEH; ++q) {
        const double d = (col_range[q] == v ? 1.0 : 0.0) -
                         (row_vertex[p] == v ? 1.0 : 0.0);
        sys(v * unknowns + p * kEH + q, p * kEH + q) = d;
      }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys);
  qr.setThreshold(0.5);
  return unknowns - static_cast<int>(qr.rank());
}

namespace {

void permutations(int n, std::vector<std::vector<int>>& out) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
}

}  // namespace

bool isomorphic_by_enumeration(const DirectedGraph& g, const DirectedGraph& f) {
  if (g.vertex_count() != f.vertex_count() || g.edge_count() != f.edge_count())
    return false;
  std::vector<std::vector<int>> betas;
  permutations(g.vertex_count(), betas);
  const auto cg = composability_matrix(g);
  const auto cf = composability_matrix(f);
  for (const auto& beta : betas) {
    bool ok = true;
    for (int v = 0; ok && v < g.vertex_count(); ++v)
      for (int w = 0; ok && w < g.vertex_count(); ++w)
        if (cg(v, w) != cf(beta[v], beta[w])) ok = false;
    if (!ok) continue;
    // Equal parallel-class counts for every vertex pair: an edge bijection
    // exists, assembled class by class.
    return true;
  }
  return false;
}

namespace {

using Clock = std::chrono::steady_clock;

struct SuiteTimer {
  Clock::time_point start = Clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(Clock::now() - start)
        .count();
  }
};

Eigen::VectorXcd random_cvec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = Cplx(dist(rng), dist(rng));
  return v;
}

std::vector<int> default_mult(const DirectedGraph& g,
                              const VerifyOptions& opts) {
  if (!opts.mult.empty()) return opts.mult;
  return std::vector<int>(g.vertex_count(), 1);
}

VerifyReport graph_suite(const GraphPtr& g, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.suite = "graph";
  rep.seed = opts.seed;
  SuiteTimer timer;
  double self_iso = 1.0;
  auto cert = graph_isomorphism(*g, *g);
  if (cert && iso_certificate_valid(*g, *g, *cert)) self_iso = 0.0;
  rep.residuals["self_isomorphism"] = self_iso;

  // Path counts of length n match the entry sum of B^n.
  double count_dev = 0.0;
  auto b = composability_matrix(*g);
  decltype(b) bn = b;
  for (int n = 1; n <= std::min(opts.level, 4); ++n) {
    const long expect = bn.sum();
    const long got = static_cast<long>(path_basis(*g, n).size());
    count_dev = std::max(count_dev, static_cast<double>(std::abs(expect - got)));
    bn = (bn * b).eval();
  }
  rep.residuals["path_counts"] = count_dev;
  rep.instances = 1 + std::min(opts.level, 4);
  rep.pass = self_iso == 0.0 && count_dev == 0.0;
  rep.wall_ms = timer.ms();
  return rep;
}

VerifyReport correspondence_suite(const GraphPtr& g, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.suite = "correspondence";
  rep.seed = opts.seed;
  SuiteTimer timer;
  std::mt19937_64 rng(opts.seed);
  const int m = g->edge_count(), n = g->vertex_count();
  double ortho = 0.0, balance = 0.0, norm_dev = 0.0, dual_eval = 0.0;

  // Path-basis orthogonality at levels <= min(level, 4).
  for (int lvl = 1; lvl <= std::min(opts.level, 4); ++lvl) {
    const auto basis = path_basis(*g, lvl);
    if (basis.size() > 300) break;  // enumeration guard
    for (size_t i = 0; i < basis.size(); ++i) {
      TensorElement u = TensorElement::zero(g, lvl);
      u.coeffs(static_cast<long>(i)) = 1.0;
      for (size_t j = 0; j < basis.size(); ++j) {
        TensorElement w = TensorElement::zero(g, lvl);
        w.coeffs(static_cast<long>(j)) = 1.0;
        AlgebraElement ip = tensor_inner_product(u, w);
        AlgebraElement expect = AlgebraElement::zero(g);
        if (i == j) expect.coeffs(basis[i].source()) = 1.0;
        ortho = std::max(ortho,
                         (ip.coeffs - expect.coeffs).cwiseAbs().maxCoeff());
      }
    }
    rep.instances += static_cast<int>(basis.size() * basis.size());
  }

  for (int t = 0; t < opts.trials; ++t) {
    if (m == 0) break;
    CorrElement x{g, random_cvec(m, rng)}, y{g, random_cvec(m, rng)};
    AlgebraElement a{g, random_cvec(n, rng)};
    // Balancing: expand(x.a (x) y) = expand(x (x) a.y).
    CorrElement xa = bimodule_action(AlgebraElement::one(g), x, a);
    CorrElement ay = bimodule_action(a, y, AlgebraElement::one(g));
    std::vector<CorrElement> left{xa, y}, right{x, ay};
    TensorElement tl = expand_elementary_tensor(left);
    TensorElement tr = expand_elementary_tensor(right);
    balance = std::max(balance, (tl.coeffs - tr.coeffs).cwiseAbs().maxCoeff());
    // Norm identity: corr_norm(x)^2 = alg_norm(<x,x>).
    const double lhs = corr_norm(x) * corr_norm(x);
    const double rhs = alg_norm(corr_inner_product(x, x));
    norm_dev = std::max(norm_dev, std::abs(lhs - rhs));
    // Dual evaluation of the inductive inner product on pairs.
    std::vector<CorrElement> u{x, y}, w{y, x};
    AlgebraElement direct = tensor_inner_product(expand_elementary_tensor(u),
                                                 expand_elementary_tensor(w));
    // <x (x) y, y (x) x> = <y, phi(<x,y>) x>
    AlgebraElement mid = corr_inner_product(x, y);
    AlgebraElement recursive = corr_inner_product(
        y, bimodule_action(mid, x, AlgebraElement::one(g)));
    dual_eval = std::max(
        dual_eval, (direct.coeffs - recursive.coeffs).cwiseAbs().maxCoeff());
    ++rep.instances;
  }
  rep.residuals["path_orthogonality"] = ortho;
  rep.residuals["balancing"] = balance;
  rep.residuals["norm_identity"] = norm_dev;
  rep.residuals["inner_dual_evaluation"] = dual_eval;
  rep.pass = ortho == 0.0 && balance <= opts.tol && norm_dev <= opts.tol &&
             dual_eval <= opts.tol;
  rep.wall_ms = timer.ms();
  return rep;
}

VerifyReport fock_suite(const GraphPtr& g, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.suite = "fock";
  rep.seed = opts.seed;
  SuiteTimer timer;
  std::mt19937_64 rng(opts.seed);
  const int m = g->edge_count(), n = g->vertex_count();
  FockBasisPtr basis = make_fock_basis(g, opts.level);
  double covariance = 0.0, sparsity = 0.0, norm_dev = 0.0;
  for (int t = 0; t < opts.trials && m > 0; ++t) {
    CorrElement x{g, random_cvec(m, rng)};
    AlgebraElement a{g, random_cvec(n, rng)};
    FockOperator tx = creation_operator(x, basis);
    FockOperator pa = phi_infinity(a, basis);
    // T_{x.a} = T_x phi(a) and T_{a.x} = phi(a) T_x.
    FockOperator txa = creation_operator(
        bimodule_action(AlgebraElement::one(g), x, a), basis);
    FockOperator tax = creation_operator(
        bimodule_action(a, x, AlgebraElement::one(g)), basis);
    covariance =
        std::max(covariance, fock_max_abs_diff(txa, fock_mul(tx, pa)));
    covariance =
        std::max(covariance, fock_max_abs_diff(tax, fock_mul(pa, tx)));
    // Sparsity pattern closed under products and adjoints.
    if (!fock_sparsity_ok(fock_mul(tx, operator_adjoint(tx))))
      sparsity = 1.0;
    if (!fock_sparsity_ok(fock_add(tx, operator_adjoint(pa)))) sparsity = 1.0;
    // Norm: equality on single-vertex graphs, <= otherwise.
    const double tnorm = operator_norm_restricted(tx, opts.level - 1);
    const double xnorm = corr_norm(x);
    if (n == 1)
      norm_dev = std::max(norm_dev, std::abs(tnorm - xnorm));
    else
      norm_dev = std::max(norm_dev, std::max(0.0, tnorm - xnorm));
    ++rep.instances;
  }
  rep.residuals["creation_covariance"] = covariance;
  rep.residuals["sparsity_closure"] = sparsity;
  rep.residuals["norm_bound"] = norm_dev;
  rep.pass = covariance <= opts.tol && sparsity == 0.0 && norm_dev <= opts.tol;
  rep.wall_ms = timer.ms();
  return rep;
}

VerifyReport duality_suite(const GraphPtr& g, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.suite = "duality";
  rep.seed = opts.seed;
  SuiteTimer timer;
  std::mt19937_64 rng(opts.seed);
  RepPtr sigma = make_representation(g, default_mult(*g, opts));

  // Intertwiner dimension against the brute-force nullspace oracle.
  const int dim = static_cast<int>(intertwiner_basis(sigma).size());
  const int oracle = intertwiner_nullspace_dim(*sigma);
  rep.residuals["intertwiner_dimension"] =
      static_cast<double>(std::abs(dim - oracle));

  // Every basis element embeds to an actual intertwiner.
  double member = 0.0;
  for (const Intertwiner& eta : intertwiner_basis(sigma))
    if (!is_intertwiner(intertwiner_embed(eta), *sigma)) member = 1.0;
  rep.residuals["basis_membership"] = member;

  // Ball norm scaling and center commutation.
  double scaling = 0.0, center_comm = 0.0;
  for (int t = 0; t < opts.trials; ++t) {
    Intertwiner eta = random_intertwiner(sigma, rng);
    const double norm = ball_membership(eta).second;
    std::uniform_real_distribution<double> sdist(0.0, 2.0);
    const double s = sdist(rng);
    const double snorm = ball_membership(eta_scale(s, eta)).second;
    scaling = std::max(scaling, std::abs(snorm - s * norm));
  }
  for (const Intertwiner& z : center_basis(sigma)) {
    for (int v = 0; v < g->vertex_count(); ++v)
      for (int i = 0; i < sigma->mult[v]; ++i)
        for (int j = 0; j < sigma->mult[v]; ++j) {
          CommutantElement a = CommutantElement::unit(sigma, v, i, j);
          center_comm = std::max(
              center_comm, eta_max_abs_diff(act_left(a, z), act_right(z, a)));
        }
  }
  rep.residuals["ball_scaling"] = scaling;
  rep.residuals["center_commutation"] = center_comm;

  // dual_pairing compatibility: <a.eta, xi> = <eta, a*.xi>.
  double pairing = 0.0;
  for (int t = 0; t < opts.trials; ++t) {
    Intertwiner eta = random_intertwiner(sigma, rng);
    Intertwiner xi = random_intertwiner(sigma, rng);
    CommutantElement a = random_commutant(sigma, rng);
    pairing = std::max(
        pairing, comm_max_abs_diff(eta_inner(act_left(a, eta), xi),
                                   eta_inner(eta, act_left(comm_adjoint(a), xi))));
  }
  rep.residuals["pairing_compatibility"] = pairing;

  // U map: level-wise isometry and spanning, then the commutator check.
  double isometry = 0.0;
  double span_dev = 0.0;
  double commutator = 0.0;
  const int max_n = std::min(3, opts.level);
  FockHilbert space(make_fock_basis(g, std::max(2, max_n)), sigma);
  const std::vector<Intertwiner> eb = intertwiner_basis(sigma);
  if (!eb.empty()) {
    for (int lvl = 1; lvl <= max_n; ++lvl) {
      // Spanning: images of basis chains (incremental) span E^{(x)lvl} (x) H.
      const int want = space.level_end(lvl) - space.level_begin(lvl);
      std::vector<Eigen::VectorXcd> span;
      for (int v = 0; v < space.rep->dim_h; ++v) {
        Eigen::VectorXcd h = Eigen::VectorXcd::Zero(space.rep->dim_h);
        h(v) = 1.0;
        span.push_back(h);
      }
      for (int k = 1; k <= lvl; ++k) {
        std::vector<Eigen::VectorXcd> next;
        for (const Intertwiner& eta : eb)
          for (const Eigen::VectorXcd& prev : span) {
            // lift to full space coordinates at level k-1 and extend
            Eigen::VectorXcd full = Eigen::VectorXcd::Zero(space.dim);
            full.segment(space.level_begin(k - 1), prev.size()) = prev;
            Eigen::VectorXcd ext = apply_right_creation(eta, space, full);
            next.push_back(
                ext.segment(space.level_begin(k), space.level_end(k) -
                                                      space.level_begin(k)));
          }
        int rank = 0;
        span.clear();
        if (!next.empty() && next.front().size() > 0) {
          // Reduce to a basis of the span to keep sizes bounded.
          Eigen::MatrixXcd mat(next.front().size(),
                               static_cast<long>(next.size()));
          for (size_t c = 0; c < next.size(); ++c) mat.col(c) = next[c];
          Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(mat);
          qr.setThreshold(kRankTol);
          rank = static_cast<int>(qr.rank());
          Eigen::MatrixXcd q = qr.householderQ();
          for (int c = 0; c < rank; ++c) span.push_back(q.col(c));
        }
        if (k == lvl)
          span_dev = std::max(span_dev, static_cast<double>(want - rank));
      }
      ++rep.instances;
    }
    // Isometry on random chains.
    for (int t = 0; t < opts.trials; ++t) {
      std::uniform_int_distribution<int> nd(1, max_n);
      const int lvl = nd(rng);
      std::vector<Intertwiner> etas, xis;
      for (int k = 0; k < lvl; ++k) {
        etas.push_back(random_intertwiner(sigma, rng));
        xis.push_back(random_intertwiner(sigma, rng));
      }
      Eigen::VectorXcd h = random_cvec(sigma->dim_h, rng);
      Eigen::VectorXcd hp = random_cvec(sigma->dim_h, rng);
      Eigen::VectorXcd img1 = u_map(etas, h, space);
      Eigen::VectorXcd img2 = u_map(xis, hp, space);
      const Cplx hilbert = img1.dot(img2);
      const Cplx balanced = u_preimage_inner(etas, h, xis, hp);
      isometry = std::max(isometry, std::abs(hilbert - balanced));
    }
    // Commutator of the U-conjugated creation with induced creation.
    for (int t = 0; t < opts.trials; ++t) {
      Intertwiner eta = random_intertwiner(sigma, rng);
      CorrElement x{g, random_cvec(g->edge_count(), rng)};
      commutator = std::max(commutator,
                            commutant_commutator_check(eta, x, std::max(2, max_n)));
    }
  }
  rep.residuals["u_isometry"] = isometry;
  rep.residuals["u_span"] = span_dev;
  rep.residuals["commutant_commutator"] = commutator;

  rep.pass = rep.residuals["intertwiner_dimension"] == 0.0 && member == 0.0 &&
             scaling <= opts.tol && center_comm == 0.0 && pairing <= opts.tol &&
             isometry <= opts.tol && span_dev == 0.0 && commutator <= opts.tol;
  rep.wall_ms = timer.ms();
  return rep;
}

VerifyReport morita_suite(const GraphPtr& g, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.suite = "morita";
  rep.seed = opts.seed;
  SuiteTimer timer;
  std::mt19937_64 rng(opts.seed);
  const int n = g->vertex_count();
  std::vector<int> mult = default_mult(*g, opts);
  RepPtr sigma = make_representation(g, mult);
  std::vector<int> mult2 = mult;
  for (int v = 0; v < n; ++v) mult2[v] = (v % 2) + 1 + mult[v] - 1;
  RepPtr tau = make_representation(g, mult2);

  rep.residuals["pairings"] = verify_pairings(sigma, tau, opts.trials, rng);
  DualMoritaReport dm = dual_morita_iso(sigma, tau, opts.trials, rng);
  rep.residuals["dual_morita_bimodule"] = dm.bimodule_residual;
  rep.residuals["dual_morita_inner"] = dm.inner_residual;
  rep.residuals["dual_morita_rank"] =
      static_cast<double>(std::abs(dm.image_rank - dm.expected_rank));
  rep.residuals["dual_morita_chain"] =
      dual_morita_chain_residual(sigma, tau, std::max(1, opts.trials / 4), rng);

  // Permutation bimodule group law over all sigma, tau in S_n (n <= 3),
  // random pairs otherwise.
  double collapse = 0.0;
  std::vector<std::vector<int>> perms;
  permutations(std::min(n, 3), perms);
  std::vector<std::string> pts;
  for (int i = 0; i < std::min(n, 3); ++i) pts.push_back(g->vertex(i));
  for (const auto& p : perms)
    for (const auto& q : perms)
      collapse = std::max(
          collapse,
          a_sigma_collapse_iso(VertexPermutation::from_one_line(pts, p),
                               VertexPermutation::from_one_line(pts, q), 2,
                               rng));
  rep.residuals["a_sigma_collapse"] = collapse;

  double inverse = 0.0, conj = 0.0;
  std::vector<std::string> all_pts;
  for (int i = 0; i < n; ++i) all_pts.push_back(g->vertex(i));
  std::vector<int> rot(n);
  for (int i = 0; i < n; ++i) rot[i] = (i + 1) % n;
  VertexPermutation rotation = VertexPermutation::from_one_line(all_pts, rot);
  inverse = std::max(inverse, a_sigma_inverse_law(rotation));
  conj = std::max(conj, conjugation_iso(g, rotation, opts.trials, rng));
  rep.residuals["a_sigma_inverse"] = inverse;
  rep.residuals["conjugation_iso"] = conj;

  // morita_decide on the graph against itself: must produce a certificate.
  double decide = 1.0;
  if (auto cert = morita_decide(g, g, opts.seed))
    if (cert->verified) decide = 0.0;
  rep.residuals["self_decision"] = decide;

  rep.instances = opts.trials;
  rep.pass = true;
  for (const auto& [key, value] : rep.residuals)
    if (value > opts.tol) rep.pass = false;
  rep.wall_ms = timer.ms();
  return rep;
}

VerifyReport linking_suite(const GraphPtr& g, const VerifyOptions& opts) {
  VerifyReport rep;
  rep.suite = "linking";
  rep.seed = opts.seed;
  SuiteTimer timer;
  const int level = std::min(opts.level, 3);
  LinkingReport lr = run_linking(g, g, level, opts.trials, opts.seed);
  rep.residuals["gram_psd"] = lr.build.psd ? 0.0 : 1.0;
  rep.residuals["fock_dims"] = lr.dims.ok ? 0.0 : 1.0;
  rep.residuals["corner_identities"] = lr.corner_residual_max;
  rep.residuals["invariance"] = lr.invariance_residual;
  rep.residuals["left_action"] = lr.action_residual;
  rep.instances = opts.trials;
  rep.pass = lr.pass;
  rep.wall_ms = timer.ms();
  return rep;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{
      "graph", "correspondence", "fock", "duality", "morita", "linking"};
  return names;
}

VerifyReport run_suite(const std::string& name, const GraphPtr& g,
                       const VerifyOptions& opts) {
  if (name == "graph") return graph_suite(g, opts);
  if (name == "correspondence") return correspondence_suite(g, opts);
  if (name == "fock") return fock_suite(g, opts);
  if (name == "duality") return duality_suite(g, opts);
  if (name == "morita") return morita_suite(g, opts);
  if (name == "linking") return linking_suite(g, opts);
  throw std::invalid_argument("unknown suite " + name);
}

std::vector<VerifyReport> run_all_suites(const GraphPtr& g,
                                         const VerifyOptions& opts) {
  std::vector<VerifyReport> out;
  for (const std::string& name : suite_names())
    out.push_back(run_suite(name, g, opts));
  return out;
}

}  // namespace graphcorr
