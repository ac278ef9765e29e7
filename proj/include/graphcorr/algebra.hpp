#pragma once

#include <Eigen/Dense>

#include "graphcorr/common.hpp"
#include "graphcorr/graph.hpp"

namespace graphcorr {

// Element of A = C(G0): one complex coefficient per vertex.  A is the
// diagonal algebra; products are pointwise and the delta functions are
// mutually orthogonal projections summing to the identity.
struct AlgebraElement {
  GraphPtr graph;
  Eigen::VectorXcd coeffs;

  static AlgebraElement zero(GraphPtr g);
  static AlgebraElement one(GraphPtr g);
  static AlgebraElement delta(GraphPtr g, int v);
};

bool same_graph(const GraphPtr& a, const GraphPtr& b);
void require_same_graph(const GraphPtr& a, const GraphPtr& b);

AlgebraElement alg_mul(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement alg_add(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement alg_scale(Cplx c, const AlgebraElement& a);
AlgebraElement alg_adjoint(const AlgebraElement& a);
double alg_norm(const AlgebraElement& a);

}  // namespace graphcorr
