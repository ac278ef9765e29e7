#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/SVD>

#include "graphcorr/duality.hpp"

using namespace graphcorr;

namespace {

GraphPtr loop() { return make_graph({"v"}, {{"e", "v", "v"}}); }

GraphPtr two_loops() {
  return make_graph({"v"}, {{"e1", "v", "v"}, {"e2", "v", "v"}});
}

GraphPtr two_cycle() {
  return make_graph({"v1", "v2"}, {{"e1", "v1", "v2"}, {"e2", "v2", "v1"}});
}

Eigen::VectorXcd random_cvec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = Cplx(dist(rng), dist(rng));
  return v;
}

// Test-side oracle: nullity of the intertwining system assembled column by
// column from unit matrices, via SVD.
int nullspace_oracle(const Representation& rep) {
  const DirectedGraph& g = *rep.graph;
  const int kH = rep.dim_h, kEH = rep.dim_eh;
  const int unknowns = kH * kEH;
  Eigen::MatrixXd sys(g.vertex_count() * unknowns, unknowns);
  int col = 0;
  for (int p = 0; p < kH; ++p)
    for (int q = 0; q < kEH; ++q, ++col) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(kH, kEH);
      m(p, q) = 1.0;
      int row = 0;
      for (int v = 0; v < g.vertex_count(); ++v) {
        // M D_v - S_v M
        Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Zero(kH, kEH);
        for (int e = 0; e < g.edge_count(); ++e)
          if (g.dst(e) == v)
            lhs.middleCols(rep.eh_offset[e], rep.mult[g.src(e)]) =
                m.middleCols(rep.eh_offset[e], rep.mult[g.src(e)]);
        lhs.middleRows(rep.h_offset[v], rep.mult[v]) -=
            m.middleRows(rep.h_offset[v], rep.mult[v]);
        for (int i = 0; i < kH; ++i)
          for (int j = 0; j < kEH; ++j) sys(row++, col) = lhs(i, j).real();
      }
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9) ++rank;
  return unknowns - rank;
}

}  // namespace

TEST_CASE("induced space decomposition") {
  SUBCASE("single loop, m=1") {
    RepPtr rep = make_representation(loop(), {1});
    auto dec = induced_space_decomposition(*rep);
    REQUIRE(dec.size() == 1);
    CHECK(dec[0].second == 1);
    CHECK(rep->dim_eh == 1);
  }
  SUBCASE("2-cycle, m=(2,3): total 5") {
    RepPtr rep = make_representation(two_cycle(), {2, 3});
    CHECK(rep->dim_eh == 5);
  }
  SUBCASE("two loops, m=2: total 4") {
    RepPtr rep = make_representation(two_loops(), {2});
    CHECK(rep->dim_eh == 4);
  }
  SUBCASE("multiplicities below one are rejected") {
    CHECK_THROWS_AS(make_representation(loop(), {0}), std::invalid_argument);
  }
}

TEST_CASE("is_intertwiner") {
  SUBCASE("zero is always an intertwiner") {
    RepPtr rep = make_representation(two_cycle(), {2, 3});
    CHECK(is_intertwiner(Eigen::MatrixXcd::Zero(rep->dim_h, rep->dim_eh), *rep));
  }
  SUBCASE("scalar representation accepts every 1x1 matrix") {
    RepPtr rep = make_representation(loop(), {1});
    Eigen::MatrixXcd m(1, 1);
    m(0, 0) = Cplx(0.3, -0.7);
    CHECK(is_intertwiner(m, *rep));
  }
  SUBCASE("entry pairing an edge with the wrong range vertex fails") {
    RepPtr rep = make_representation(two_cycle(), {1, 1});
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    // column of e1 (r(e1) = v2) against the row of v1
    m(0, 0) = 1.0;
    CHECK_FALSE(is_intertwiner(m, *rep));
  }
}

TEST_CASE("intertwiner basis dimension matches the nullspace oracle") {
  SUBCASE("single loop m=1: dimension 1") {
    RepPtr rep = make_representation(loop(), {1});
    CHECK(intertwiner_basis(rep).size() == 1);
    CHECK(nullspace_oracle(*rep) == 1);
  }
  SUBCASE("single loop m=2: dimension 4") {
    RepPtr rep = make_representation(loop(), {2});
    CHECK(intertwiner_basis(rep).size() == 4);
    CHECK(nullspace_oracle(*rep) == 4);
  }
  SUBCASE("2-cycle m=(2,3): dimension 12") {
    RepPtr rep = make_representation(two_cycle(), {2, 3});
    CHECK(intertwiner_basis(rep).size() == 12);
    CHECK(nullspace_oracle(*rep) == 12);
  }
  SUBCASE("random small graphs") {
    std::mt19937_64 rng(31);
    GraphPtr g = make_graph({"a", "b", "c"}, {{"e1", "a", "b"},
                                              {"e2", "b", "c"},
                                              {"e3", "c", "a"},
                                              {"e4", "a", "a"}});
    for (std::vector<int> mult : {std::vector<int>{1, 2, 1},
                                  std::vector<int>{2, 2, 2},
                                  std::vector<int>{3, 1, 2}}) {
      RepPtr rep = make_representation(g, mult);
      CHECK(static_cast<int>(intertwiner_basis(rep).size()) ==
            nullspace_oracle(*rep));
      for (const Intertwiner& eta : intertwiner_basis(rep))
        CHECK(is_intertwiner(intertwiner_embed(eta), *rep));
    }
    (void)rng;
  }
}

TEST_CASE("ball membership") {
  SUBCASE("zero is inside with norm 0") {
    RepPtr rep = make_representation(two_cycle(), {2, 3});
    auto [inside, norm] = ball_membership(Intertwiner::zero(rep));
    CHECK(inside);
    CHECK(norm == 0.0);
  }
  SUBCASE("single loop m=1 recovers the open unit disc") {
    RepPtr rep = make_representation(loop(), {1});
    Intertwiner eta = Intertwiner::zero(rep);
    eta.blocks[0](0, 0) = Cplx(0.999, 0.0);
    auto [in1, n1] = ball_membership(eta);
    CHECK(in1);
    CHECK(std::abs(n1 - 0.999) <= 1e-12);
    eta.blocks[0](0, 0) = Cplx(1.0, 0.0);
    auto [in2, n2] = ball_membership(eta);
    CHECK_FALSE(in2);
    CHECK(std::abs(n2 - 1.0) <= 1e-12);
  }
  SUBCASE("single loop m=2 with half the identity") {
    RepPtr rep = make_representation(loop(), {2});
    Intertwiner eta = Intertwiner::zero(rep);
    eta.blocks[0] = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
    auto [inside, norm] = ball_membership(eta);
    CHECK(inside);
    CHECK(std::abs(norm - 0.5) <= 1e-12);
  }
  SUBCASE("norm scales linearly") {
    std::mt19937_64 rng(41);
    RepPtr rep = make_representation(two_cycle(), {2, 1});
    for (int t = 0; t < 20; ++t) {
      Intertwiner eta = random_intertwiner(rep, rng);
      const double base = ball_membership(eta).second;
      const double scaled = ball_membership(eta_scale(0.25, eta)).second;
      CHECK(std::abs(scaled - 0.25 * base) <= 1e-12);
    }
  }
}

TEST_CASE("center basis") {
  SUBCASE("2-cycle has an empty center") {
    CHECK(center_basis(make_representation(two_cycle(), {1, 2})).empty());
  }
  SUBCASE("two loops give dimension 2 for any multiplicity") {
    CHECK(center_basis(make_representation(two_loops(), {3})).size() == 2);
  }
  SUBCASE("single loop m=3: the identity block") {
    auto basis = center_basis(make_representation(loop(), {3}));
    REQUIRE(basis.size() == 1);
    CHECK((basis[0].blocks[0] - Eigen::MatrixXcd::Identity(3, 3)).norm() == 0.0);
  }
  SUBCASE("oracle: a.eta = eta.a cuts the intertwiner space to the loops") {
    // Solve the commutation system over intertwiner-basis coordinates.
    GraphPtr g = make_graph({"a", "b"}, {{"e1", "a", "a"},
                                         {"e2", "a", "b"},
                                         {"e3", "b", "b"}});
    RepPtr rep = make_representation(g, {2, 2});
    auto basis = intertwiner_basis(rep);
    std::vector<CommutantElement> units;
    for (int v = 0; v < 2; ++v)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          units.push_back(CommutantElement::unit(rep, v, i, j));
    const int dim = static_cast<int>(basis.size());
    Eigen::MatrixXcd sys(static_cast<long>(units.size()) * dim, dim);
    for (int c = 0; c < dim; ++c) {
      long row = 0;
      for (const CommutantElement& a : units) {
        Intertwiner diff = eta_add(
            act_left(a, basis[c]), eta_scale(-1.0, act_right(basis[c], a)));
        for (const auto& blk : diff.blocks)
          for (int i = 0; i < blk.rows(); ++i)
            for (int j = 0; j < blk.cols(); ++j) sys(row++, c) = blk(i, j);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-9) ++rank;
    CHECK(dim - rank == static_cast<int>(center_basis(rep).size()));
    CHECK(center_basis(rep).size() == 2);  // two loops in the graph
  }
  SUBCASE("center elements commute with all commutant units") {
    RepPtr rep = make_representation(two_loops(), {2});
    for (const Intertwiner& z : center_basis(rep))
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          CommutantElement a = CommutantElement::unit(rep, 0, i, j);
          CHECK(eta_max_abs_diff(act_left(a, z), act_right(z, a)) == 0.0);
        }
  }
}

TEST_CASE("dual pairing and inner product") {
  RepPtr rep = make_representation(loop(), {1});
  SUBCASE("identity acts as identity") {
    std::mt19937_64 rng(3);
    Intertwiner eta = random_intertwiner(rep, rng);
    CommutantElement one = CommutantElement::identity(rep);
    CHECK(eta_max_abs_diff(dual_pair(one, eta, one), eta) == 0.0);
  }
  SUBCASE("<eta, eta> = |z|^2 at the vertex") {
    Intertwiner eta = Intertwiner::zero(rep);
    eta.blocks[0](0, 0) = Cplx(0.5, 0.5);
    CommutantElement ip = eta_inner(eta, eta);
    CHECK(std::abs(ip.blocks[0](0, 0) - Cplx(0.5, 0.0)) <= 1e-15);
  }
  SUBCASE("bimodule compatibility on random samples") {
    std::mt19937_64 rng(13);
    RepPtr big = make_representation(two_cycle(), {2, 3});
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      Intertwiner eta = random_intertwiner(big, rng);
      Intertwiner xi = random_intertwiner(big, rng);
      CommutantElement a = random_commutant(big, rng);
      worst = std::max(
          worst,
          comm_max_abs_diff(eta_inner(act_left(a, eta), xi),
                            eta_inner(eta, act_left(comm_adjoint(a), xi))));
      // right module: <eta . a, xi> = a* <eta, xi>
      worst = std::max(
          worst, comm_max_abs_diff(eta_inner(act_right(eta, a), xi),
                                   comm_mul(comm_adjoint(a), eta_inner(eta, xi))));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("block actions agree with full-matrix algebra on embeddings") {
  // Independent route: embed eta* as a matrix M and realize the actions as
  // (a.eta)* = M (I (x) a*) and (eta.a)* = a* M, with (I (x) a) assembled
  // from the s(e) blocks of the induced-space decomposition.
  std::mt19937_64 rng(27);
  GraphPtr g = make_graph({"a", "b"}, {{"e1", "a", "b"},
                                       {"e2", "b", "a"},
                                       {"e3", "a", "a"}});
  RepPtr rep = make_representation(g, {2, 3});
  const auto induced = [&](const CommutantElement& a) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(rep->dim_eh, rep->dim_eh);
    for (int e = 0; e < g->edge_count(); ++e) {
      const int sv = g->src(e);
      d.block(rep->eh_offset[e], rep->eh_offset[e], rep->mult[sv],
              rep->mult[sv]) = a.blocks[sv];
    }
    return d;
  };
  const auto sigma_of = [&](const CommutantElement& a) {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(rep->dim_h, rep->dim_h);
    for (int v = 0; v < g->vertex_count(); ++v)
      s.block(rep->h_offset[v], rep->h_offset[v], rep->mult[v], rep->mult[v]) =
          a.blocks[v];
    return s;
  };
  for (int t = 0; t < 25; ++t) {
    Intertwiner eta = random_intertwiner(rep, rng);
    CommutantElement a = random_commutant(rep, rng);
    Eigen::MatrixXcd m = intertwiner_embed(eta);
    CHECK((intertwiner_embed(act_left(a, eta)) - m * induced(a).adjoint())
              .cwiseAbs()
              .maxCoeff() <= 1e-13);
    CHECK((intertwiner_embed(act_right(eta, a)) - sigma_of(a).adjoint() * m)
              .cwiseAbs()
              .maxCoeff() <= 1e-13);
    // <eta, xi> embeds as M_eta M_xi* restricted to its diagonal blocks.
    Intertwiner xi = random_intertwiner(rep, rng);
    Eigen::MatrixXcd prod = m * intertwiner_embed(xi).adjoint();
    CHECK((sigma_of(eta_inner(eta, xi)) - prod).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("u_map") {
  SUBCASE("n=0 returns h unchanged") {
    RepPtr rep = make_representation(two_cycle(), {2, 1});
    FockHilbert space(make_fock_basis(rep->graph, 2), rep);
    Eigen::VectorXcd h(3);
    h << Cplx(1, 2), Cplx(3, 4), Cplx(5, 6);
    Eigen::VectorXcd out = u_map({}, h, space);
    CHECK((out - h).norm() == 0.0);
  }
  SUBCASE("n=1 applies the adjoint blocks") {
    RepPtr rep = make_representation(loop(), {1});
    FockHilbert space(make_fock_basis(rep->graph, 2), rep);
    Intertwiner eta = Intertwiner::zero(rep);
    eta.blocks[0](0, 0) = Cplx(0, 2);
    Eigen::VectorXcd h(1);
    h << Cplx(1, 0);
    std::vector<Intertwiner> etas{eta};
    Eigen::VectorXcd out = u_map(etas, h, space);
    REQUIRE(out.size() == 1);
    CHECK(out(0) == Cplx(0, -2));  // conj(z)
  }
  SUBCASE("single loop, m=1, T_e = z, n=2: coefficient conj(z)^2") {
    RepPtr rep = make_representation(loop(), {1});
    FockHilbert space(make_fock_basis(rep->graph, 2), rep);
    const Cplx z(0.4, 0.3);
    Intertwiner eta = Intertwiner::zero(rep);
    eta.blocks[0](0, 0) = z;
    Eigen::VectorXcd h(1);
    h << Cplx(1, 0);
    std::vector<Intertwiner> etas{eta, eta};
    Eigen::VectorXcd out = u_map(etas, h, space);
    REQUIRE(out.size() == 1);
    CHECK(std::abs(out(0) - std::conj(z) * std::conj(z)) <= 1e-15);
  }
  SUBCASE("level exceeding the truncation throws") {
    RepPtr rep = make_representation(loop(), {1});
    FockHilbert space(make_fock_basis(rep->graph, 1), rep);
    std::vector<Intertwiner> etas(2, Intertwiner::zero(rep));
    Eigen::VectorXcd h(1);
    h << Cplx(1, 0);
    CHECK_THROWS_AS(u_map(etas, h, space), std::invalid_argument);
  }
}

TEST_CASE("u_map isometry against the balanced inner product") {
  std::mt19937_64 rng(19);
  GraphPtr g = make_graph({"a", "b"}, {{"e1", "a", "b"},
                                       {"e2", "b", "a"},
                                       {"e3", "a", "a"}});
  RepPtr rep = make_representation(g, {2, 1});
  FockHilbert space(make_fock_basis(g, 3), rep);
  double worst = 0.0;
  for (int t = 0; t < 60; ++t) {
    const int n = 1 + (t % 3);
    std::vector<Intertwiner> etas, xis;
    for (int k = 0; k < n; ++k) {
      etas.push_back(random_intertwiner(rep, rng));
      xis.push_back(random_intertwiner(rep, rng));
    }
    Eigen::VectorXcd h = random_cvec(rep->dim_h, rng);
    Eigen::VectorXcd hp = random_cvec(rep->dim_h, rng);
    const Cplx lhs = u_map(etas, h, space).dot(u_map(xis, hp, space));
    const Cplx rhs = u_preimage_inner(etas, h, xis, hp);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("representation mismatch is rejected") {
  RepPtr r1 = make_representation(two_cycle(), {1, 1});
  RepPtr r2 = make_representation(two_cycle(), {2, 1});
  CHECK_THROWS_AS(eta_inner(Intertwiner::zero(r1), Intertwiner::zero(r2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(act_left(CommutantElement::identity(r2),
                           Intertwiner::zero(r1)),
                  std::invalid_argument);
}

TEST_CASE("commutant commutator vanishes on safe levels") {
  SUBCASE("zero inputs") {
    RepPtr rep = make_representation(loop(), {1});
    CHECK(commutant_commutator_check(Intertwiner::zero(rep),
                                     CorrElement::zero(rep->graph), 3) == 0.0);
  }
  SUBCASE("single loop weighted shifts commute") {
    RepPtr rep = make_representation(loop(), {1});
    Intertwiner eta = Intertwiner::zero(rep);
    eta.blocks[0](0, 0) = Cplx(0.3, -0.8);
    CorrElement x = corr_scale(Cplx(1.5, 0.5), CorrElement::delta(rep->graph, 0));
    CHECK(commutant_commutator_check(eta, x, 4) <= 1e-15);
  }
  SUBCASE("random 3-vertex graph, m <= 2, N = 3, 20 pairs") {
    std::mt19937_64 rng(77);
    GraphPtr g = make_graph({"a", "b", "c"}, {{"e1", "a", "b"},
                                              {"e2", "b", "c"},
                                              {"e3", "c", "a"},
                                              {"e4", "b", "a"}});
    RepPtr rep = make_representation(g, {2, 1, 2});
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Intertwiner eta = random_intertwiner(rep, rng);
      CorrElement x{g, random_cvec(4, rng)};
      worst = std::max(worst, commutant_commutator_check(eta, x, 3));
    }
    CHECK(worst <= 1e-10);
  }
}
