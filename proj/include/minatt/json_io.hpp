#pragma once

#include "json.hpp"
#include "minatt/diag_seq.hpp"
#include "minatt/gap.hpp"
#include "minatt/operator.hpp"
#include "minatt/perturbation.hpp"
#include "minatt/spectral.hpp"

namespace minatt {

using Json = nlohmann::json;

// Scalars are plain numbers when real, [re, im] otherwise.
Json scalar_to_json(Scalar z);
Scalar scalar_from_json(const Json& j);

// {"dim": null | n, "entries": [[index, re, im], ...]}; {"basis": k} is accepted on input.
Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j);

// {"kind": "converges_to" | "periodic" | "finite_range" | "declared_accumulation", ...}
Json tail_to_json(const TailSpec& t);
TailSpec tail_from_json(const Json& j);

// Leaves: {"generator": key, "tail": {...}}. Maps: {"map": name, "of": seq, ...}.
// Sums: {"add": [lhs, rhs]}. Shorthand on input: generator plus optional
// "scale", "shift" and "overrides": [[index, value], ...].
// Throws DomainError for sequences built from custom callables.
Json seq_to_json(const DiagSeq& s);
DiagSeq seq_from_json(const Json& j);

// {"variant": "matrix" | "diagonal" | "sum", ...}
Json operator_to_json(const OperatorRep& op);
OperatorRep operator_from_json(const Json& j);

Json to_json(const AttainmentCertificate& c);
Json to_json(const SpectrumReport& r);
Json to_json(const GapResult& g);
Json to_json(const Check& c);
Json to_json(const PerturbationResult& r);

}  // namespace minatt
