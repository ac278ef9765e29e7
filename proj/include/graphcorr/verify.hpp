#pragma once

#include <map>
#include <string>
#include <vector>

#include "graphcorr/linking.hpp"

namespace graphcorr {

struct VerifyOptions {
  int level = 3;
  int trials = 20;
  std::uint64_t seed = 0;
  double tol = kTol;
  std::vector<int> mult;  // empty: all multiplicities 1
};

struct VerifyReport {
  std::string suite;
  int instances = 0;
  std::map<std::string, double> residuals;
  bool pass = false;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;  // informational only; kept out of stdout payloads
};

// Independent oracle: dimension of the solution space of the intertwining
// system { M (sigma^E o phi)(delta_v) = sigma(delta_v) M  for all v },
// computed by generic rank of the assembled linear system.
int intertwiner_nullspace_dim(const Representation& rep);

// Exhaustive (beta, alpha) bijection-pair search; tractable only for small
// graphs.  Used as the decision oracle.
bool isomorphic_by_enumeration(const DirectedGraph& g, const DirectedGraph& f);

// Individual suites.  Names: graph, correspondence, fock, duality, morita,
// linking.
VerifyReport run_suite(const std::string& name, const GraphPtr& g,
                       const VerifyOptions& opts);
std::vector<VerifyReport> run_all_suites(const GraphPtr& g,
                                         const VerifyOptions& opts);
const std::vector<std::string>& suite_names();

}  // namespace graphcorr
