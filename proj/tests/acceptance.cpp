// Acceptance suite: runs every contract criterion end to end and prints one
// PASS/FAIL line per criterion.  Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "graphcorr/json_io.hpp"
#include "graphcorr/verify.hpp"

using namespace graphcorr;
using Clock = std::chrono::steady_clock;

namespace {

Eigen::VectorXcd random_cvec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = Cplx(dist(rng), dist(rng));
  return v;
}

GraphPtr loop() { return make_graph({"v"}, {{"e", "v", "v"}}); }

GraphPtr two_loops() {
  return make_graph({"v"}, {{"e1", "v", "v"}, {"e2", "v", "v"}});
}

GraphPtr two_cycle(const char* tag = "v", int shift = 0) {
  std::vector<std::string> vs{std::string(tag) + "1", std::string(tag) + "2"};
  std::vector<Edge> es;
  for (int i = 0; i < 2; ++i) {
    const int a = (i + shift) % 2, b = (i + shift + 1) % 2;
    es.push_back({std::string(tag) + "e" + std::to_string(i), vs[a], vs[b]});
  }
  return make_graph(vs, es);
}

GraphPtr three_cycle(const char* tag, int shift) {
  std::vector<std::string> vs;
  for (int i = 0; i < 3; ++i)
    vs.push_back(std::string(tag) + std::to_string(i + 1));
  std::vector<Edge> es;
  for (int i = 0; i < 3; ++i) {
    const int a = (i + shift) % 3, b = (i + shift + 1) % 3;
    es.push_back({std::string(tag) + "e" + std::to_string(i), vs[a], vs[b]});
  }
  return make_graph(vs, es);
}

GraphPtr random_graph(std::mt19937_64& rng, int max_v, int max_e, int min_v = 1) {
  std::uniform_int_distribution<int> nv(min_v, max_v);
  const int n = nv(rng);
  std::uniform_int_distribution<int> ne(0, max_e);
  const int m = ne(rng);
  std::vector<std::string> vs;
  for (int i = 0; i < n; ++i) vs.push_back("v" + std::to_string(i));
  std::vector<Edge> es;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int i = 0; i < m; ++i)
    es.push_back({"e" + std::to_string(i), vs[pick(rng)], vs[pick(rng)]});
  return make_graph(vs, es);
}

GraphPtr relabel(const DirectedGraph& g, std::mt19937_64& rng) {
  std::vector<int> vperm(g.vertex_count()), eperm(g.edge_count());
  std::iota(vperm.begin(), vperm.end(), 0);
  std::iota(eperm.begin(), eperm.end(), 0);
  std::shuffle(vperm.begin(), vperm.end(), rng);
  std::shuffle(eperm.begin(), eperm.end(), rng);
  std::vector<std::string> vs(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v)
    vs[vperm[v]] = "w" + std::to_string(vperm[v]);
  std::vector<Edge> es(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e)
    es[eperm[e]] = {"f" + std::to_string(eperm[e]), vs[vperm[g.src(e)]],
                    vs[vperm[g.dst(e)]]};
  return make_graph(vs, es);
}

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// 1. Intertwiner characterization on an enumerated corpus.
Criterion criterion1() {
  Criterion c{.name = "1 intertwiner dimension vs brute-force nullspace"};
  std::mt19937_64 rng(1001);
  std::vector<std::pair<GraphPtr, std::vector<int>>> corpus;
  const auto add_patterns = [&](const GraphPtr& g) {
    const int n = g->vertex_count();
    std::vector<std::vector<int>> patterns{std::vector<int>(n, 1),
                                           std::vector<int>(n, 2),
                                           std::vector<int>(n, 3)};
    std::vector<int> alt(n), rnd(n);
    std::uniform_int_distribution<int> md(1, 3);
    for (int v = 0; v < n; ++v) {
      alt[v] = (v % 3) + 1;
      rnd[v] = md(rng);
    }
    patterns.push_back(alt);
    patterns.push_back(rnd);
    for (auto& p : patterns) corpus.emplace_back(g, p);
  };
  add_patterns(loop());
  add_patterns(two_loops());
  add_patterns(two_cycle());
  add_patterns(three_cycle("v", 0));
  for (int t = 0; t < 38; ++t) add_patterns(random_graph(rng, 5, 8));
  int checked = 0, mismatches = 0;
  for (const auto& [g, mult] : corpus) {
    RepPtr rep = make_representation(g, mult);
    const int dim = static_cast<int>(intertwiner_basis(rep).size());
    const int oracle = intertwiner_nullspace_dim(*rep);
    if (dim != oracle) ++mismatches;
    ++checked;
  }
  c.pass = mismatches == 0 && checked >= 200;
  c.detail = std::to_string(checked) + " instances, " +
             std::to_string(mismatches) + " mismatches";
  return c;
}

// 2. Morita decision against exhaustive bijection enumeration.
Criterion criterion2() {
  Criterion c{.name = "2 morita decision vs exhaustive enumeration"};
  std::mt19937_64 rng(2002);
  int pairs = 0, disagreements = 0, positives = 0;
  double worst_w = 0.0;
  bool cert_ok = true;
  for (int t = 0; t < 100; ++t) {
    GraphPtr g = random_graph(rng, 5, 6);
    GraphPtr f = (t % 2 == 0) ? relabel(*g, rng) : random_graph(rng, 5, 6);
    const bool expect = isomorphic_by_enumeration(*g, *f);
    auto cert = morita_decide(g, f, 31 + t, 100);
    if (cert.has_value() != expect) ++disagreements;
    if (cert) {
      ++positives;
      if (!cert->verified || cert->corr_residual != 0.0) cert_ok = false;
      worst_w = std::max(worst_w, cert->w_residual);
    }
    ++pairs;
  }
  c.pass = disagreements == 0 && cert_ok && worst_w <= 1e-10 && positives >= 30;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d pairs, %d disagreements, %d certificates, max W residual %.2e",
                pairs, disagreements, positives, worst_w);
  c.detail = buf;
  return c;
}

// 3. The four explicit isomorphisms.
Criterion criterion3() {
  Criterion c{.name = "3 explicit isomorphisms (m_A, phi, collapse, conjugation)"};
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  // m_A / m_B pairings on two representation pairs.
  for (auto [ms, mt] : {std::pair<std::vector<int>, std::vector<int>>{
                            {2, 1}, {1, 3}},
                        {{1, 1}, {2, 2}}}) {
    RepPtr sigma = make_representation(two_cycle(), ms);
    RepPtr tau = make_representation(two_cycle(), mt);
    worst = std::max(worst, verify_pairings(sigma, tau, 100, rng));
  }
  // Dual-correspondence phi.
  bool rank_ok = true;
  for (auto [ms, mt] : {std::pair<std::vector<int>, std::vector<int>>{
                            {1, 2}, {2, 1}},
                        {{2, 2}, {1, 3}}}) {
    RepPtr sigma = make_representation(two_cycle(), ms);
    RepPtr tau = make_representation(two_cycle(), mt);
    DualMoritaReport rep = dual_morita_iso(sigma, tau, 100, rng);
    worst = std::max(worst, std::max(rep.bimodule_residual, rep.inner_residual));
    if (rep.image_rank != rep.expected_rank) rank_ok = false;
    worst = std::max(worst, dual_morita_chain_residual(sigma, tau, 25, rng));
  }
  // (omega, psi, pi) collapse with random samples.
  std::vector<std::string> pts{"1", "2", "3", "4"};
  worst = std::max(worst, a_sigma_collapse_iso(
                              VertexPermutation::from_one_line(pts, {1, 2, 3, 0}),
                              VertexPermutation::from_one_line(pts, {3, 2, 1, 0}),
                              100, rng));
  // (pi, phi) conjugation on the 2-cycle and 3-cycle.
  worst = std::max(worst, conjugation_iso(two_cycle(),
                                          VertexPermutation::from_one_line(
                                              {"v1", "v2"}, {1, 0}),
                                          100, rng));
  worst = std::max(
      worst, conjugation_iso(three_cycle("v", 0),
                             VertexPermutation::from_one_line(
                                 {"v1", "v2", "v3"}, {1, 2, 0}),
                             100, rng));
  c.pass = worst <= 1e-10 && rank_ok;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max residual %.2e, ranks %s", worst,
                rank_ok ? "exact" : "WRONG");
  c.detail = buf;
  return c;
}

// 4. Unit ball on the single loop.
Criterion criterion4() {
  Criterion c{.name = "4 unit ball reproduces the open disc"};
  RepPtr rep = make_representation(loop(), {1});
  Intertwiner eta = Intertwiner::zero(rep);
  eta.blocks[0](0, 0) = 0.999;
  auto [in1, n1] = ball_membership(eta);
  eta.blocks[0](0, 0) = 1.0;
  auto [in2, n2] = ball_membership(eta);
  c.pass = in1 && !in2 && std::abs(n1 - 0.999) <= 1e-12 &&
           std::abs(n2 - 1.0) <= 1e-12;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "|0.999| -> %.15f in=%d, |1.0| -> %.15f in=%d",
                n1, in1, n2, in2);
  c.detail = buf;
  return c;
}

// 5. Corner identities of the linking correspondence.
Criterion criterion5() {
  Criterion c{.name = "5 linking corner identities and Fock dimensions"};
  std::mt19937_64 rng(5005);
  double worst = 0.0;
  bool dims_ok = true;
  const auto run_case = [&](const MoritaCertificate& cert) {
    ZFock zf(build_z(cert).ctx, 3);
    ZFockDims dims = z_fock_decomposition(zf, 3);
    if (!dims.ok) dims_ok = false;
    for (int t = 0; t < 50; ++t) {
      std::uniform_int_distribution<int> md(1, 2);
      const int m = md(rng);
      std::uniform_int_distribution<int> ld(0, 3 - m);
      const int lf = ld(rng), le = ld(rng);
      std::uniform_int_distribution<int> fi(0, zf.corner_dim(0, lf) - 1);
      std::uniform_int_distribution<int> ei(0, zf.corner_dim(2, le) - 1);
      ZStackElement xi = random_stack(zf, m, rng);
      LinkingElement lam = random_linking(zf.ctx, rng);
      worst = std::max(
          worst,
          corner_compression(zf, xi, lam, lf, fi(rng), le, ei(rng)).max_dev());
    }
  };
  run_case(identity_certificate(loop()));
  run_case(identity_certificate(two_cycle()));
  auto cert2 = morita_decide(two_cycle("v", 0), two_cycle("w", 1), 5);
  auto cert3 = morita_decide(three_cycle("v", 0), three_cycle("w", 1), 5);
  if (!cert2 || !cert3) {
    c.detail = "permutation certificates missing";
    return c;
  }
  run_case(*cert2);
  run_case(*cert3);
  c.pass = worst <= 1e-12 && dims_ok;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max corner deviation %.2e, dims %s", worst,
                dims_ok ? "exact" : "WRONG");
  c.detail = buf;
  return c;
}

// 6. U map isometry, spanning, and the commutant commutator.
Criterion criterion6() {
  Criterion c{.name = "6 U-map isometry/span and commutant commutator"};
  std::mt19937_64 rng(6006);
  double iso_worst = 0.0, comm_worst = 0.0;
  bool span_ok = true;
  std::vector<std::pair<GraphPtr, std::vector<int>>> cases{
      {loop(), {2}},
      {two_loops(), {2}},
      {two_cycle(), {2, 1}},
      {three_cycle("v", 0), {2, 1, 2}},
      {make_graph({"a", "b", "c", "d"},
                  {{"e1", "a", "b"},
                   {"e2", "b", "c"},
                   {"e3", "c", "d"},
                   {"e4", "d", "a"},
                   {"e5", "a", "a"}}),
       {1, 2, 1, 2}},
  };
  for (const auto& [g, mult] : cases) {
    RepPtr rep = make_representation(g, mult);
    FockHilbert space(make_fock_basis(g, 3), rep);
    const std::vector<Intertwiner> eb = intertwiner_basis(rep);
    // Spanning by levels.
    std::vector<Eigen::VectorXcd> span;
    for (int v = 0; v < rep->dim_h; ++v) {
      Eigen::VectorXcd h = Eigen::VectorXcd::Zero(rep->dim_h);
      h(v) = 1.0;
      span.push_back(h);
    }
    for (int k = 1; k <= 3; ++k) {
      std::vector<Eigen::VectorXcd> next;
      for (const Intertwiner& eta : eb)
        for (const Eigen::VectorXcd& prev : span) {
          Eigen::VectorXcd full = Eigen::VectorXcd::Zero(space.dim);
          full.segment(space.level_begin(k - 1), prev.size()) = prev;
          Eigen::VectorXcd ext = apply_right_creation(eta, space, full);
          next.push_back(ext.segment(
              space.level_begin(k), space.level_end(k) - space.level_begin(k)));
        }
      const int want = space.level_end(k) - space.level_begin(k);
      if (next.empty() || next.front().size() == 0) {
        if (want != 0) span_ok = false;
        span.clear();
        continue;
      }
      Eigen::MatrixXcd mat(next.front().size(), static_cast<long>(next.size()));
      for (size_t col = 0; col < next.size(); ++col) mat.col(col) = next[col];
      Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(mat);
      qr.setThreshold(kRankTol);
      if (static_cast<int>(qr.rank()) != want) span_ok = false;
      span.clear();
      Eigen::MatrixXcd q = qr.householderQ();
      for (int col = 0; col < static_cast<int>(qr.rank()); ++col)
        span.push_back(q.col(col));
    }
    // Isometry on random chains.
    for (int t = 0; t < 20; ++t) {
      std::uniform_int_distribution<int> nd(1, 3);
      const int n = nd(rng);
      std::vector<Intertwiner> etas, xis;
      for (int k = 0; k < n; ++k) {
        etas.push_back(random_intertwiner(rep, rng));
        xis.push_back(random_intertwiner(rep, rng));
      }
      Eigen::VectorXcd h = random_cvec(rep->dim_h, rng);
      Eigen::VectorXcd hp = random_cvec(rep->dim_h, rng);
      const Cplx lhs = u_map(etas, h, space).dot(u_map(xis, hp, space));
      const Cplx rhs = u_preimage_inner(etas, h, xis, hp);
      iso_worst = std::max(iso_worst, std::abs(lhs - rhs));
    }
    // Commutator on >= 20 seeded pairs per graph.
    for (int t = 0; t < 20; ++t) {
      Intertwiner eta = random_intertwiner(rep, rng);
      CorrElement x{g, random_cvec(g->edge_count(), rng)};
      comm_worst = std::max(comm_worst, commutant_commutator_check(eta, x, 3));
    }
  }
  c.pass = span_ok && iso_worst <= 1e-10 && comm_worst <= 1e-10;
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "span %s, isometry residual %.2e, commutator %.2e",
                span_ok ? "exact" : "WRONG", iso_worst, comm_worst);
  c.detail = buf;
  return c;
}

// 7. The P group over S3, exhaustively and exactly.
Criterion criterion7() {
  Criterion c{.name = "7 P group: collapse isomorphisms over all of S3 x S3"};
  std::vector<std::string> pts{"1", "2", "3"};
  std::vector<int> p{0, 1, 2};
  std::vector<std::vector<int>> s3;
  do {
    s3.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  int pairs = 0;
  double worst = 0.0;
  std::mt19937_64 rng(7007);
  for (const auto& sp : s3)
    for (const auto& tp : s3) {
      worst = std::max(
          worst, a_sigma_collapse_iso(VertexPermutation::from_one_line(pts, sp),
                                      VertexPermutation::from_one_line(pts, tp),
                                      0, rng));
      ++pairs;
    }
  c.pass = pairs == 36 && worst == 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d pairs, max residual %.1e", pairs, worst);
  c.detail = buf;
  return c;
}

// 8. Full verification over the bundled corpus.
Criterion criterion8() {
  Criterion c{.name = "8 verify --suite all over the bundled corpus"};
  std::vector<std::pair<GraphPtr, std::vector<int>>> corpus{
      {loop(), {}},
      {two_loops(), {2}},
      {two_cycle(), {2, 1}},
      {three_cycle("v", 0), {1, 2, 1}},
      {make_graph({"a", "b"},
                  {{"e1", "a", "b"}, {"e2", "a", "b"}, {"e3", "b", "a"}}),
       {2, 2}},
      {make_graph({"a", "b", "c"},
                  {{"e1", "a", "b"},
                   {"e2", "b", "c"},
                   {"e3", "c", "a"},
                   {"e4", "a", "a"},
                   {"e5", "a", "b"}}),
       {2, 1, 1}},
  };
  int failures = 0, suites = 0;
  for (const auto& [g, mult] : corpus) {
    VerifyOptions opts;
    opts.seed = 17;
    opts.trials = 20;
    opts.level = 3;
    opts.mult = mult;
    for (const VerifyReport& rep : run_all_suites(g, opts)) {
      ++suites;
      if (!rep.pass) ++failures;
    }
  }
  c.pass = failures == 0;
  c.detail = std::to_string(suites) + " suite runs, " +
             std::to_string(failures) + " failures";
  return c;
}

}  // namespace

int main() {
  std::vector<Criterion (*)()> criteria{criterion1, criterion2, criterion3,
                                        criterion4, criterion5, criterion6,
                                        criterion7, criterion8};
  bool all = true;
  const auto t0 = Clock::now();
  for (auto* fn : criteria) {
    const auto start = Clock::now();
    Criterion c = fn();
    c.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("%s criterion %s [%s] (%.2fs)\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.detail.c_str(), c.seconds);
    all = all && c.pass;
  }
  const double total = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s acceptance suite (%.2fs total)\n", all ? "PASS" : "FAIL",
              total);
  // Criterion 8 runs inside the acceptance binary; the five-minute budget
  // covers the whole suite.
  if (total > 300.0) {
    std::printf("FAIL runtime budget exceeded\n");
    return 1;
  }
  return all ? 0 : 1;
}
