#include "graphcorr/algebra.hpp"

#include <stdexcept>

namespace graphcorr {

bool same_graph(const GraphPtr& a, const GraphPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void require_same_graph(const GraphPtr& a, const GraphPtr& b) {
  if (!same_graph(a, b)) throw std::invalid_argument("graph mismatch");
}

AlgebraElement AlgebraElement::zero(GraphPtr g) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(g->vertex_count());
  return {std::move(g), std::move(c)};
}

AlgebraElement AlgebraElement::one(GraphPtr g) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Ones(g->vertex_count());
  return {std::move(g), std::move(c)};
}

AlgebraElement AlgebraElement::delta(GraphPtr g, int v) {
  AlgebraElement a = zero(std::move(g));
  a.coeffs(v) = 1.0;
  return a;
}

AlgebraElement alg_mul(const AlgebraElement& a, const AlgebraElement& b) {
  require_same_graph(a.graph, b.graph);
  return {a.graph, a.coeffs.cwiseProduct(b.coeffs)};
}

AlgebraElement alg_add(const AlgebraElement& a, const AlgebraElement& b) {
  require_same_graph(a.graph, b.graph);
  return {a.graph, a.coeffs + b.coeffs};
}

AlgebraElement alg_scale(Cplx c, const AlgebraElement& a) {
  return {a.graph, c * a.coeffs};
}

AlgebraElement alg_adjoint(const AlgebraElement& a) {
  return {a.graph, a.coeffs.conjugate()};
}

double alg_norm(const AlgebraElement& a) {
  return a.coeffs.size() == 0 ? 0.0 : a.coeffs.cwiseAbs().maxCoeff();
}

}  // namespace graphcorr
