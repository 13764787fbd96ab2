#include "minatt/json_io.hpp"

#include <cmath>
#include <string>

#include "minatt/errors.hpp"
#include "overloaded.hpp"

namespace minatt {

namespace {

using detail::Overloaded;

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw DomainError(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw DomainError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw DomainError(std::string(what) + " must be a number");
  return j.get<double>();
}

std::size_t index_from(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 1) throw DomainError(std::string(what) + " must be an integer >= 1");
  return j.get<std::size_t>();
}

std::vector<Scalar> scalars(const Json& j) {
  if (!j.is_array()) throw DomainError("expected an array of scalars");
  std::vector<Scalar> out;
  for (const auto& x : j) out.push_back(scalar_from_json(x));
  return out;
}

Json scalars_to_json(const std::vector<Scalar>& v) {
  Json out = Json::array();
  for (auto z : v) out.push_back(scalar_to_json(z));
  return out;
}

struct MapName {
  SeqMap map;
  const char* name;
};

constexpr MapName kMapNames[] = {
    {SeqMap::Affine, "affine"}, {SeqMap::Conj, "conj"},     {SeqMap::Abs, "abs"},          {SeqMap::Phase, "phase"},
    {SeqMap::Sqrt, "sqrt"},     {SeqMap::Defect, "defect"}, {SeqMap::Override, "override"},
};

const char* map_name(SeqMap m) {
  for (const auto& e : kMapNames)
    if (e.map == m) return e.name;
  return "?";
}

Json node_to_json(const DiagSeq::Node& n) {
  const auto* node = &n;
  using Kind = DiagSeq::Node::Kind;
  switch (node->kind) {
    case Kind::Leaf:
      if (!node->registered) throw DomainError("sequence '" + node->label + "' is not from the registry");
      return {{"generator", node->label}, {"tail", tail_to_json(node->declared)}};
    case Kind::Sum:
      return {{"add", Json::array({node_to_json(*node->lhs), node_to_json(*node->rhs)})}};
    case Kind::Map: {
      Json out = {{"map", map_name(node->map)}};
      if (node->map == SeqMap::Affine) {
        out["scale"] = scalar_to_json(node->a);
        out["shift"] = scalar_to_json(node->b);
      } else if (node->map == SeqMap::Override) {
        out["index"] = node->index;
        out["value"] = scalar_to_json(node->a);
      }
      out["of"] = node_to_json(*node->lhs);
      return out;
    }
  }
  return nullptr;
}

Matrix matrix_from_json(const Json& j) {
  const Json& data = field(j, "data");
  if (!data.is_array() || data.empty()) throw DomainError("matrix data must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(data.size());
  if (!data[0].is_array() || data[0].empty()) throw DomainError("matrix rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(data[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = data[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DomainError("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scalar_from_json(row[static_cast<std::size_t>(c)]);
  }
  if (j.contains("rows") && j["rows"] != rows) throw DomainError("'rows' disagrees with data");
  if (j.contains("cols") && j["cols"] != cols) throw DomainError("'cols' disagrees with data");
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(scalar_to_json(m(r, c)));
    data.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

std::variant<MatrixOp, DiagonalOp> base_from_json(const Json& j) {
  const std::string variant = field(j, "variant").get<std::string>();
  if (variant == "matrix") return MatrixOp{matrix_from_json(j)};
  if (variant == "diagonal") return DiagonalOp{seq_from_json(j.contains("seq") ? j["seq"] : j)};
  if (variant == "sum") throw DomainError("the base of a sum cannot itself be a sum");
  throw DomainError("unknown operator variant '" + variant + "'");
}

OperatorRep parse_operator(const Json& j) {
  const std::string variant = field(j, "variant").get<std::string>();
  if (variant != "sum") {
    auto base = base_from_json(j);
    if (auto* m = std::get_if<MatrixOp>(&base)) return OperatorRep::matrix(std::move(m->data));
    return OperatorRep::diagonal(std::get<DiagonalOp>(base).seq);
  }
  auto base = base_from_json(field(j, "base"));
  Scalar shift = j.contains("shift") ? scalar_from_json(j["shift"]) : Scalar(0.0);
  std::vector<RankOneTerm> terms;
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) throw DomainError("'terms' must be an array");
    for (const auto& t : j["terms"]) {
      terms.push_back(RankOneTerm::make(scalar_from_json(field(t, "coeff")), vec_from_json(field(t, "left")),
                                        vec_from_json(field(t, "right"))));
    }
  }
  return OperatorRep::sum(std::move(base), shift, std::move(terms));
}

}  // namespace

Json scalar_to_json(Scalar z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

Scalar scalar_from_json(const Json& j) {
  if (j.is_number()) return checked(Scalar(j.get<double>()));
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return checked(Scalar(j[0].get<double>(), j[1].get<double>()));
  throw DomainError("scalar must be a number or [re, im]");
}

Json vec_to_json(const Vec& v) {
  Json entries = Json::array();
  for (const auto& e : v.entries()) entries.push_back(Json::array({e.index, e.value.real(), e.value.imag()}));
  Json out = {{"entries", std::move(entries)}};
  out["dim"] = v.dim() ? Json(*v.dim()) : Json(nullptr);
  return out;
}

Vec vec_from_json(const Json& j) {
  std::optional<std::size_t> dim;
  if (j.contains("dim") && !j["dim"].is_null()) dim = index_from(j["dim"], "dim");
  if (j.contains("basis")) return Vec::basis(index_from(j["basis"], "basis"), dim);
  const Json& entries = field(j, "entries");
  if (!entries.is_array()) throw DomainError("'entries' must be an array");
  std::vector<Vec::Entry> out;
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3) throw DomainError("vector entries are [index, re(, im)]");
    const double im = e.size() == 3 ? number(e[2], "imaginary part") : 0.0;
    out.push_back({index_from(e[0], "entry index"), checked(Scalar(number(e[1], "real part"), im))});
  }
  return Vec(std::move(out), dim);
}

Json tail_to_json(const TailSpec& t) {
  return std::visit(Overloaded{
                        [](const ConvergesTo& c) -> Json {
                          return {{"kind", "converges_to"}, {"limit", scalar_to_json(c.limit)}};
                        },
                        [](const Periodic& p) -> Json {
                          return {{"kind", "periodic"}, {"values", scalars_to_json(p.values)}};
                        },
                        [](const FiniteRange& f) -> Json {
                          return {{"kind", "finite_range"}, {"values", scalars_to_json(f.values)}};
                        },
                        [](const DeclaredAccumulation& d) -> Json {
                          return {{"kind", "declared_accumulation"},
                                  {"points", scalars_to_json(d.points)},
                                  {"divergesToInfinity", d.diverges_to_infinity}};
                        },
                    },
                    t);
}

TailSpec tail_from_json(const Json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "converges_to") return validated(ConvergesTo{scalar_from_json(field(j, "limit"))});
  if (kind == "periodic") return validated(Periodic{scalars(field(j, "values"))});
  if (kind == "finite_range") return validated(FiniteRange{scalars(field(j, "values"))});
  if (kind == "declared_accumulation") {
    DeclaredAccumulation d;
    if (j.contains("points")) d.points = scalars(j["points"]);
    d.diverges_to_infinity = j.value("divergesToInfinity", false);
    return validated(std::move(d));
  }
  throw DomainError("unknown tail kind '" + kind + "'");
}

Json seq_to_json(const DiagSeq& s) { return node_to_json(s.node()); }

DiagSeq seq_from_json(const Json& j) {
  if (!j.is_object()) throw DomainError("sequence must be an object");
  if (j.contains("add")) {
    const Json& parts = j["add"];
    if (!parts.is_array() || parts.size() < 2) throw DomainError("'add' needs at least two sequences");
    DiagSeq out = seq_from_json(parts[0]);
    for (std::size_t k = 1; k < parts.size(); ++k) out = out.plus(seq_from_json(parts[k]));
    return out;
  }
  if (j.contains("map")) {
    const std::string name = j["map"].get<std::string>();
    const DiagSeq of = seq_from_json(field(j, "of"));
    if (name == "affine") {
      return of.affine(j.contains("scale") ? scalar_from_json(j["scale"]) : Scalar(1.0),
                       j.contains("shift") ? scalar_from_json(j["shift"]) : Scalar(0.0));
    }
    if (name == "conj") return of.conj();
    if (name == "abs") return of.abs();
    if (name == "phase") return of.phase();
    if (name == "sqrt") return of.sqrt();
    if (name == "defect") return of.defect();
    if (name == "override")
      return of.with_override(index_from(field(j, "index"), "override index"), scalar_from_json(field(j, "value")));
    throw DomainError("unknown sequence map '" + name + "'");
  }
  const Json& gen = field(j, "generator");
  if (!gen.is_string()) throw DomainError("'generator' must be a registry key");
  DiagSeq out = j.contains("tail") ? DiagSeq::from_registry(gen.get<std::string>(), tail_from_json(j["tail"]))
                                   : DiagSeq::from_registry(gen.get<std::string>());
  if (j.contains("scale") || j.contains("shift")) {
    out = out.affine(j.contains("scale") ? scalar_from_json(j["scale"]) : Scalar(1.0),
                     j.contains("shift") ? scalar_from_json(j["shift"]) : Scalar(0.0));
  }
  if (j.contains("overrides")) {
    if (!j["overrides"].is_array()) throw DomainError("'overrides' must be an array of [index, value]");
    for (const auto& o : j["overrides"]) {
      if (!o.is_array() || o.size() != 2) throw DomainError("override entries are [index, value]");
      out = out.with_override(index_from(o[0], "override index"), scalar_from_json(o[1]));
    }
  }
  return out;
}

Json operator_to_json(const OperatorRep& op) {
  auto base_json = [](const std::variant<MatrixOp, DiagonalOp>& base) {
    return std::visit(Overloaded{
                          [](const MatrixOp& m) {
                            Json out = matrix_to_json(m.data);
                            out["variant"] = "matrix";
                            return out;
                          },
                          [](const DiagonalOp& d) { return Json{{"variant", "diagonal"}, {"seq", seq_to_json(d.seq)}}; },
                      },
                      base);
  };
  return std::visit(Overloaded{
                        [&](const MatrixOp& m) { return base_json(m); },
                        [&](const DiagonalOp& d) { return base_json(d); },
                        [&](const SumOp& s) {
                          Json terms = Json::array();
                          for (const auto& t : s.terms) {
                            terms.push_back({{"coeff", scalar_to_json(t.coeff)},
                                             {"left", vec_to_json(t.left)},
                                             {"right", vec_to_json(t.right)}});
                          }
                          return Json{{"variant", "sum"},
                                      {"base", base_json(s.base)},
                                      {"shift", scalar_to_json(s.shift)},
                                      {"terms", std::move(terms)}};
                        },
                    },
                    op.variant());
}

OperatorRep operator_from_json(const Json& j) {
  try {
    return parse_operator(j);
  } catch (const Json::exception& e) {
    throw DomainError(std::string("malformed operator: ") + e.what());
  }
}

Json to_json(const AttainmentCertificate& c) {
  Json out = {{"value", c.value}, {"attained", c.attained}, {"residual", c.residual}};
  out["witness"] = c.witness ? vec_to_json(*c.witness) : Json(nullptr);
  out["witnessIndex"] = c.witness_index ? Json(*c.witness_index) : Json(nullptr);
  return out;
}

Json to_json(const SpectrumReport& r) {
  Json discrete = Json::array();
  for (const auto& e : r.discrete) discrete.push_back({{"value", e.value}, {"multiplicity", e.multiplicity}});
  return {{"discrete", std::move(discrete)},
          {"essential", {{"points", r.essential.points}, {"unbounded", r.essential.unbounded}}},
          {"detected", r.detected},
          {"truncationN", r.truncation}};
}

Json to_json(const GapResult& g) {
  Json out = {{"route", to_string(g.route)}, {"value", g.value}, {"tailBound", g.tail_bound}};
  out["truncationN"] = g.truncation ? Json(*g.truncation) : Json(nullptr);
  out["crossCheck"] = g.cross_check ? Json(*g.cross_check) : Json(nullptr);
  return out;
}

Json to_json(const Check& c) {
  return {{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"bound", c.bound}, {"detail", c.detail}};
}

Json to_json(const PerturbationResult& r) {
  Json checks = Json::array();
  for (const auto& c : r.certification) checks.push_back(to_json(c));
  Json out = {{"caseTag", to_string(r.case_tag)},
              {"epsilon", r.epsilon},
              {"perturbation", operator_to_json(r.perturbation)},
              {"witness", to_json(r.witness)},
              {"normS", r.norm_s},
              {"gapBound", r.gap_bound},
              {"certification", std::move(checks)}};
  out["innerCase"] = r.inner_case ? Json(to_string(*r.inner_case)) : Json(nullptr);
  out["innerEpsilon"] = r.inner_epsilon ? Json(*r.inner_epsilon) : Json(nullptr);
  // The perturbed operator may carry a custom sequence; it is reproducible from T and S.
  try {
    out["perturbed"] = operator_to_json(r.perturbed);
  } catch (const DomainError&) {
    out["perturbed"] = nullptr;
  }
  return out;
}

}  // namespace minatt
