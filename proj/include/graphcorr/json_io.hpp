#pragma once

#include <string>

#include <json.hpp>

#include "graphcorr/linking.hpp"

namespace graphcorr {

using Json = nlohmann::json;

// Complex numbers serialize as [re, im] everywhere.
Json complex_to_json(const Cplx& c);
Cplx complex_from_json(const Json& j);

// {"vertices": [...], "edges": [{"id","src","dst"}, ...]}
Json graph_to_json(const DirectedGraph& g);
GraphPtr graph_from_json(const Json& j);

// {"beta": {...}, "alpha": {...}}
Json iso_to_json(const DirectedGraph& g, const DirectedGraph& f,
                 const GraphIsoCertificate& cert);
GraphIsoCertificate iso_from_json(const DirectedGraph& g,
                                  const DirectedGraph& f, const Json& j);

// {"edge_id": [re,im], ...}
Json corr_to_json(const CorrElement& x);
CorrElement corr_from_json(const GraphPtr& g, const Json& j);

// {"vertex_id": [re,im], ...}
Json algebra_to_json(const AlgebraElement& a);
AlgebraElement algebra_from_json(const GraphPtr& g, const Json& j);

// {"level": n, "coeffs": {"e1|e2": [re,im], ...}}
Json tensor_to_json(const TensorElement& t);
TensorElement tensor_from_json(const GraphPtr& g, const Json& j);

// {"N": n, "entries": [[row, col, [re,im]], ...]} sorted by (row, col).
Json operator_to_json(const FockOperator& t);
FockOperator operator_from_json(const GraphPtr& g, const Json& j);

// {"blocks": {"e1": [[[re,im],...], ...], ...}}
Json intertwiner_to_json(const Intertwiner& eta);
Intertwiner intertwiner_from_json(const RepPtr& rep, const Json& j);

Json morita_certificate_to_json(const MoritaCertificate& cert);

// --mult style string "v1=2,v2=1"; unlisted vertices default to 1.
std::vector<int> parse_multiplicities(const DirectedGraph& g,
                                      const std::string& mult_text);

}  // namespace graphcorr
