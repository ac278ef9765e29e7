#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "graphcorr/graph.hpp"
#include "graphcorr/correspondence.hpp"
#include "graphcorr/verify.hpp"

using namespace graphcorr;

namespace {

GraphPtr loop() { return make_graph({"v"}, {{"e", "v", "v"}}); }

GraphPtr two_loops() {
  return make_graph({"v"}, {{"e1", "v", "v"}, {"e2", "v", "v"}});
}

GraphPtr two_cycle() {
  return make_graph({"v1", "v2"}, {{"e1", "v1", "v2"}, {"e2", "v2", "v1"}});
}

GraphPtr three_cycle(const std::string& tag = "v", int shift = 0) {
  // vertices tag1..tag3, edges chained with an index shift on the labels
  std::vector<std::string> vs;
  for (int i = 0; i < 3; ++i) vs.push_back(tag + std::to_string(i + 1));
  std::vector<Edge> es;
  for (int i = 0; i < 3; ++i) {
    const int a = (i + shift) % 3, b = (i + shift + 1) % 3;
    es.push_back({"f" + std::to_string(i + 1), vs[a], vs[b]});
  }
  return make_graph(vs, es);
}

// Brute-force oracle: enumerate every (beta, alpha) bijection pair.
bool iso_by_full_enumeration(const DirectedGraph& g, const DirectedGraph& f) {
  if (g.vertex_count() != f.vertex_count() || g.edge_count() != f.edge_count())
    return false;
  std::vector<int> beta(g.vertex_count());
  std::iota(beta.begin(), beta.end(), 0);
  do {
    std::vector<int> alpha(g.edge_count());
    std::iota(alpha.begin(), alpha.end(), 0);
    do {
      bool ok = true;
      for (int e = 0; ok && e < g.edge_count(); ++e) {
        if (f.src(alpha[e]) != beta[g.src(e)]) ok = false;
        if (ok && f.dst(alpha[e]) != beta[g.dst(e)]) ok = false;
      }
      if (ok) return true;
    } while (std::next_permutation(alpha.begin(), alpha.end()));
  } while (std::next_permutation(beta.begin(), beta.end()));
  return false;
}

GraphPtr random_graph(std::mt19937_64& rng, int max_v, int max_e) {
  std::uniform_int_distribution<int> nv(1, max_v);
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
  std::vector<std::string> out_vs;
  for (int v = 0; v < g.vertex_count(); ++v) out_vs.push_back(vs[v]);
  return make_graph(out_vs, es);
}

}  // namespace

TEST_CASE("validation accepts the smallest valid graph") {
  GraphPtr g = loop();
  CHECK(g->vertex_count() == 1);
  CHECK(g->edge_count() == 1);
  CHECK(g->src(0) == 0);
  CHECK(g->dst(0) == 0);
}

TEST_CASE("validation names the first violated invariant") {
  CHECK_THROWS_WITH_AS(DirectedGraph::validated({"v"}, {{"e", "v", "w"}}),
                       "dangling endpoint w", std::invalid_argument);
  CHECK_THROWS_WITH_AS(DirectedGraph::validated({"v", "v"}, {}),
                       "duplicate vertex id v", std::invalid_argument);
  CHECK_THROWS_WITH_AS(DirectedGraph::validated({}, {}), "empty vertex set",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      DirectedGraph::validated({"v"}, {{"e", "v", "v"}, {"e", "v", "v"}}),
      "duplicate edge id e", std::invalid_argument);
}

TEST_CASE("single loop vs single loop yields the identity certificate") {
  GraphPtr g = loop();
  auto cert = graph_isomorphism(*g, *g);
  REQUIRE(cert);
  CHECK(cert->beta == std::vector<int>{0});
  CHECK(cert->alpha == std::vector<int>{0});
  CHECK(iso_certificate_valid(*g, *g, *cert));
}

TEST_CASE("rotated 3-cycles are isomorphic exactly through cyclic shifts") {
  GraphPtr g = three_cycle("v", 0);
  GraphPtr f = three_cycle("v", 1);
  // Oracle: the full 3! x 3! enumeration finds an isomorphism, and the
  // valid vertex bijections are exactly the three rotations.
  CHECK(iso_by_full_enumeration(*g, *f));
  std::vector<std::vector<int>> valid_betas;
  std::vector<int> beta{0, 1, 2};
  do {
    // a beta extends to a full certificate iff it maps the cycle to the
    // cycle; test by counting matched arcs
    bool ok = true;
    for (int e = 0; e < 3 && ok; ++e) {
      bool found = false;
      for (int k = 0; k < 3; ++k)
        if (f->src(k) == beta[g->src(e)] && f->dst(k) == beta[g->dst(e)])
          found = true;
      ok = found;
    }
    if (ok) valid_betas.push_back(beta);
  } while (std::next_permutation(beta.begin(), beta.end()));
  CHECK(valid_betas.size() == 3);
  for (const auto& b : valid_betas) {
    // every valid beta is a rotation: v -> v + k mod 3
    const int k = b[0];
    for (int v = 0; v < 3; ++v) CHECK(b[v] == (v + k) % 3);
  }
  auto cert = graph_isomorphism(*g, *f);
  REQUIRE(cert);
  CHECK(iso_certificate_valid(*g, *f, *cert));
}

TEST_CASE("2-cycle and two disjoint loops are not isomorphic") {
  GraphPtr g = two_cycle();
  GraphPtr f = make_graph({"w1", "w2"}, {{"f1", "w1", "w1"}, {"f2", "w2", "w2"}});
  CHECK_FALSE(iso_by_full_enumeration(*g, *f));
  CHECK_FALSE(graph_isomorphism(*g, *f).has_value());
}

TEST_CASE("permutation graphs realize r(e_x) = x, s(e_x) = sigma(x)") {
  SUBCASE("identity on one point gives a loop") {
    DirectedGraph g = permutation_graph(VertexPermutation::identity({"v"}));
    CHECK(g.edge_count() == 1);
    CHECK(g.src(0) == 0);
    CHECK(g.dst(0) == 0);
  }
  SUBCASE("transposition gives the 2-cycle") {
    DirectedGraph g = permutation_graph(
        VertexPermutation::from_one_line({"1", "2"}, {1, 0}));
    CHECK(g.edge_count() == 2);
    for (int e = 0; e < 2; ++e) CHECK(g.src(e) != g.dst(e));
    CHECK(graph_isomorphism(g, *two_cycle()).has_value());
  }
  SUBCASE("3-cycle permutation gives the directed 3-cycle") {
    DirectedGraph g = permutation_graph(
        VertexPermutation::from_one_line({"1", "2", "3"}, {1, 2, 0}));
    // evaluate the definition vertex by vertex
    for (int x = 0; x < 3; ++x) {
      CHECK(g.dst(x) == x);
      CHECK(g.src(x) == (x + 1) % 3);
    }
    CHECK(graph_isomorphism(g, *three_cycle()).has_value());
  }
}

TEST_CASE("composability matrix counts composable paths") {
  SUBCASE("single loop") {
    auto b = composability_matrix(*loop());
    CHECK(b(0, 0) == 1);
  }
  SUBCASE("two loops: B = [2], B^3 = [8]") {
    auto b = composability_matrix(*two_loops());
    CHECK(b(0, 0) == 2);
    auto b3 = (b * b * b).eval();
    CHECK(b3(0, 0) == 8);
    // oracle: enumerate all length-3 loop words
    CHECK(path_basis(*two_loops(), 3).size() == 8);
  }
  SUBCASE("2-cycle: B = [[0,1],[1,0]], B^2 = I") {
    auto b = composability_matrix(*two_cycle());
    CHECK(b(0, 0) == 0);
    CHECK(b(0, 1) == 1);
    CHECK(b(1, 0) == 1);
    CHECK(b(1, 1) == 0);
    auto b2 = (b * b).eval();
    CHECK(b2(0, 0) == 1);
    CHECK(b2(0, 1) == 0);
  }
}

TEST_CASE("path counts of any length equal the entry sum of B^n") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    GraphPtr g = random_graph(rng, 4, 6);
    auto b = composability_matrix(*g);
    decltype(b) bn = b;
    for (int n = 1; n <= 3; ++n) {
      CHECK(static_cast<long>(path_basis(*g, n).size()) == bn.sum());
      bn = (bn * b).eval();
    }
  }
}

TEST_CASE("search agrees with brute-force enumeration on small graphs") {
  std::mt19937_64 rng(7);
  int positives = 0;
  for (int t = 0; t < 60; ++t) {
    GraphPtr g = random_graph(rng, 4, 4);
    GraphPtr f = (t % 2 == 0) ? relabel(*g, rng) : random_graph(rng, 4, 4);
    const bool expect = iso_by_full_enumeration(*g, *f);
    auto cert = graph_isomorphism(*g, *f);
    CHECK(cert.has_value() == expect);
    if (cert) {
      CHECK(iso_certificate_valid(*g, *f, *cert));
      ++positives;
    }
  }
  CHECK(positives >= 20);  // the corpus exercises both outcomes
}

TEST_CASE("self-isomorphism always produces a valid certificate") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 25; ++t) {
    GraphPtr g = random_graph(rng, 5, 8);
    auto cert = graph_isomorphism(*g, *g);
    REQUIRE(cert);
    CHECK(iso_certificate_valid(*g, *g, *cert));
  }
}

TEST_CASE("parallel edges are matched individually") {
  GraphPtr g = make_graph({"a", "b"}, {{"e1", "a", "b"},
                                       {"e2", "a", "b"},
                                       {"e3", "b", "a"}});
  std::mt19937_64 rng(5);
  GraphPtr f = relabel(*g, rng);
  auto cert = graph_isomorphism(*g, *f);
  REQUIRE(cert);
  CHECK(iso_certificate_valid(*g, *f, *cert));
  // alpha is a bijection even within the parallel class
  std::vector<int> seen;
  for (int a : cert->alpha) seen.push_back(a);
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<int>{0, 1, 2});
}

TEST_CASE("search agrees with vertex-bijection enumeration up to 5v/8e") {
  // The enumeration oracle walks every vertex bijection and matches parallel
  // classes exactly; it lives in the verification module.
  std::mt19937_64 rng(57);
  for (int t = 0; t < 40; ++t) {
    GraphPtr g = random_graph(rng, 5, 8);
    GraphPtr f = (t % 2 == 0) ? relabel(*g, rng) : random_graph(rng, 5, 8);
    CHECK(graph_isomorphism(*g, *f).has_value() ==
          isomorphic_by_enumeration(*g, *f));
  }
}

TEST_CASE("determinism: repeated runs give identical certificates") {
  std::mt19937_64 rng(99);
  GraphPtr g = random_graph(rng, 5, 7);
  GraphPtr f = relabel(*g, rng);
  auto c1 = graph_isomorphism(*g, *f);
  auto c2 = graph_isomorphism(*g, *f);
  REQUIRE(c1);
  REQUIRE(c2);
  CHECK(c1->beta == c2->beta);
  CHECK(c1->alpha == c2->alpha);
}
