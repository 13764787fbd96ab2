#include "minatt/diag_seq.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "minatt/errors.hpp"
#include "overloaded.hpp"

namespace minatt {

namespace {

using detail::Overloaded;
using Node = DiagSeq::Node;

// Window used to read off phases of a sequence accumulating at 0 or infinity.
constexpr std::size_t kPhaseWindowLo = 5'001;
constexpr std::size_t kPhaseWindowHi = 10'000;
constexpr std::size_t kMaxPeriod = 100'000;

Scalar evaluate(const Node& node, std::size_t n) {
  switch (node.kind) {
    case Node::Kind::Leaf:
      return node.gen(n);
    case Node::Kind::Sum:
      return evaluate(*node.lhs, n) + evaluate(*node.rhs, n);
    case Node::Kind::Map:
      break;
  }
  if (node.map == SeqMap::Override && n == node.index) return node.a;
  const Scalar v = evaluate(*node.lhs, n);
  switch (node.map) {
    case SeqMap::Affine:
      return node.a * v + node.b;
    case SeqMap::Conj:
      return std::conj(v);
    case SeqMap::Abs:
      return std::abs(v);
    case SeqMap::Phase:
      return v == Scalar(0.0) ? Scalar(0.0) : v / std::abs(v);
    case SeqMap::Sqrt:
      return std::sqrt(v);
    case SeqMap::Defect:
      return 1.0 / (1.0 + std::norm(v));
    case SeqMap::Override:
      return v;
  }
  return v;
}

void push_distinct(std::vector<Scalar>& out, Scalar z) {
  for (const auto& p : out) {
    if (std::abs(p - z) <= 1e-9) return;
  }
  out.push_back(z);
}

// Image of one accumulation point (nullopt = infinity) under a map.
std::vector<std::optional<Scalar>> point_image(const Node& node, std::optional<Scalar> p) {
  using R = std::vector<std::optional<Scalar>>;
  auto sampled_phases = [&] {
    std::vector<Scalar> phases;
    for (std::size_t n = kPhaseWindowLo; n <= kPhaseWindowHi; ++n) {
      const Scalar v = evaluate(*node.lhs, n);
      push_distinct(phases, v == Scalar(0.0) ? Scalar(0.0) : v / std::abs(v));
    }
    R out;
    for (auto z : phases) out.emplace_back(z);
    return out;
  };
  switch (node.map) {
    case SeqMap::Affine:
      if (!p) return node.a == Scalar(0.0) ? R{node.b} : R{std::nullopt};
      return R{node.a * *p + node.b};
    case SeqMap::Conj:
      return p ? R{std::conj(*p)} : R{std::nullopt};
    case SeqMap::Abs:
      return p ? R{Scalar(std::abs(*p))} : R{std::nullopt};
    case SeqMap::Phase:
      if (!p || *p == Scalar(0.0)) return sampled_phases();
      return R{*p / std::abs(*p)};
    case SeqMap::Sqrt:
      return p ? R{std::sqrt(*p)} : R{std::nullopt};
    case SeqMap::Defect:
      return p ? R{Scalar(1.0 / (1.0 + std::norm(*p)))} : R{Scalar(0.0)};
    case SeqMap::Override:
      return R{p};
  }
  return R{p};
}

Scalar exact_image(const Node& node, Scalar v) {
  switch (node.map) {
    case SeqMap::Affine:
      return node.a * v + node.b;
    case SeqMap::Conj:
      return std::conj(v);
    case SeqMap::Abs:
      return std::abs(v);
    case SeqMap::Phase:
      return v == Scalar(0.0) ? Scalar(0.0) : v / std::abs(v);
    case SeqMap::Sqrt:
      return std::sqrt(v);
    case SeqMap::Defect:
      return 1.0 / (1.0 + std::norm(v));
    case SeqMap::Override:
      return v;
  }
  return v;
}

TailSpec from_images(const std::vector<std::optional<Scalar>>& images) {
  DeclaredAccumulation out;
  for (const auto& z : images) {
    if (z) {
      push_distinct(out.points, *z);
    } else {
      out.diverges_to_infinity = true;
    }
  }
  if (out.points.size() == 1 && !out.diverges_to_infinity) return ConvergesTo{out.points[0]};
  return out;
}

TailSpec map_tail(const Node& node, const TailSpec& in) {
  if (node.map == SeqMap::Override) return in;
  return std::visit(
      Overloaded{
          [&](const ConvergesTo& c) -> TailSpec { return from_images(point_image(node, c.limit)); },
          [&](const Periodic& p) -> TailSpec {
            Periodic out;
            for (auto v : p.values) out.values.push_back(exact_image(node, v));
            return out;
          },
          [&](const FiniteRange& r) -> TailSpec {
            FiniteRange out;
            for (auto v : r.values) out.values.push_back(exact_image(node, v));
            return out;
          },
          [&](const DeclaredAccumulation& d) -> TailSpec {
            std::vector<std::optional<Scalar>> images;
            for (auto v : d.points) {
              auto im = point_image(node, v);
              images.insert(images.end(), im.begin(), im.end());
            }
            if (d.diverges_to_infinity) {
              auto im = point_image(node, std::nullopt);
              images.insert(images.end(), im.begin(), im.end());
            }
            auto out = from_images(images);
            // A declared set stays declared even when it collapses to a point.
            if (auto* c = std::get_if<ConvergesTo>(&out)) return DeclaredAccumulation{{c->limit}, false};
            return out;
          },
      },
      in);
}

std::optional<Scalar> single_value(const TailSpec& t) {
  if (const auto* p = std::get_if<Periodic>(&t)) {
    if (std::all_of(p->values.begin(), p->values.end(),
                    [&](Scalar v) { return v == p->values.front(); })) {
      return p->values.front();
    }
  }
  if (const auto* r = std::get_if<FiniteRange>(&t); r && r->values.size() == 1) return r->values[0];
  return std::nullopt;
}

TailSpec shifted(const TailSpec& t, Scalar c) {
  return std::visit(Overloaded{
                        [&](ConvergesTo v) -> TailSpec { return ConvergesTo{v.limit + c}; },
                        [&](Periodic v) -> TailSpec {
                          for (auto& x : v.values) x += c;
                          return v;
                        },
                        [&](FiniteRange v) -> TailSpec {
                          for (auto& x : v.values) x += c;
                          return v;
                        },
                        [&](DeclaredAccumulation v) -> TailSpec {
                          for (auto& x : v.points) x += c;
                          return v;
                        },
                    },
                    t);
}

std::optional<TailSpec> sum_tail(const TailSpec& a, const TailSpec& b) {
  if (auto c = single_value(a)) return shifted(b, *c);
  if (auto c = single_value(b)) return shifted(a, *c);
  auto with_limit = [](Scalar limit, const TailSpec& other) -> TailSpec {
    return std::visit(
        Overloaded{
            [&](const ConvergesTo& v) -> TailSpec { return ConvergesTo{v.limit + limit}; },
            [&](const Periodic& v) -> TailSpec {
              DeclaredAccumulation out;
              for (auto x : v.values) push_distinct(out.points, x + limit);
              return out;
            },
            [&](const FiniteRange& v) -> TailSpec {
              DeclaredAccumulation out;
              for (auto x : v.values) push_distinct(out.points, x + limit);
              return out;
            },
            [&](const DeclaredAccumulation& v) -> TailSpec {
              DeclaredAccumulation out{{}, v.diverges_to_infinity};
              for (auto x : v.points) out.points.push_back(x + limit);
              return out;
            },
        },
        other);
  };
  if (const auto* c = std::get_if<ConvergesTo>(&a)) return with_limit(c->limit, b);
  if (const auto* c = std::get_if<ConvergesTo>(&b)) return with_limit(c->limit, a);
  const auto* pa = std::get_if<Periodic>(&a);
  const auto* pb = std::get_if<Periodic>(&b);
  if (pa && pb) {
    const std::size_t period = std::lcm(pa->values.size(), pb->values.size());
    if (period > kMaxPeriod) return std::nullopt;
    Periodic out;
    out.values.reserve(period);
    for (std::size_t k = 0; k < period; ++k) {
      out.values.push_back(pa->values[k % pa->values.size()] + pb->values[k % pb->values.size()]);
    }
    return out;
  }
  return std::nullopt;
}

std::shared_ptr<Node> derive_tail(std::shared_ptr<Node> node) {
  auto fail = [&](std::string why) {
    node->tail.reset();
    node->tail_error = std::move(why);
  };
  switch (node->kind) {
    case Node::Kind::Leaf:
      node->tail = node->declared;
      break;
    case Node::Kind::Map:
      if (!node->lhs->tail) {
        fail(node->lhs->tail_error);
      } else {
        node->tail = map_tail(*node, *node->lhs->tail);
      }
      break;
    case Node::Kind::Sum:
      if (!node->lhs->tail || !node->rhs->tail) {
        fail(!node->lhs->tail ? node->lhs->tail_error : node->rhs->tail_error);
      } else if (auto t = sum_tail(*node->lhs->tail, *node->rhs->tail)) {
        node->tail = std::move(*t);
      } else {
        fail("accumulation set of a sum of two non-convergent sequences is not determined");
      }
      break;
  }
  return node;
}

std::string format_scalar(Scalar z) {
  char buf[64];
  if (z.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.17g", z.real());
  } else {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", z.real(), z.imag());
  }
  return buf;
}

double parse_double(std::string_view text, std::string_view key) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DomainError("bad constant in generator key '" + std::string(key) + "'");
  }
  return v;
}

struct Builtin {
  const char* key;
  const char* description;
  DiagSeq::Generator gen;
  TailSpec tail;
};

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> table = {
      {"one_plus_inv_n", "d_n = 1 + 1/n", [](std::size_t n) { return Scalar(1.0 + 1.0 / double(n)); },
       ConvergesTo{1.0}},
      {"inv_n", "d_n = 1/n", [](std::size_t n) { return Scalar(1.0 / double(n)); }, ConvergesTo{0.0}},
      {"alternating01", "d_n = 0 for odd n, 1 for even n",
       [](std::size_t n) { return Scalar(n % 2 == 1 ? 0.0 : 1.0); }, Periodic{{0.0, 1.0}}},
      {"linear_n", "d_n = n", [](std::size_t n) { return Scalar(double(n)); },
       DeclaredAccumulation{{}, true}},
  };
  return table;
}

}  // namespace

DiagSeq DiagSeq::from_registry(std::string_view key) {
  if (key.starts_with("const:")) {
    const auto body = key.substr(6);
    const auto comma = body.find(',');
    Scalar c = comma == std::string_view::npos
                   ? Scalar(parse_double(body, key))
                   : Scalar(parse_double(body.substr(0, comma), key),
                            parse_double(body.substr(comma + 1), key));
    auto node = std::make_shared<Node>();
    node->label = std::string(key);
    node->registered = true;
    c = checked(c);
    node->gen = [c](std::size_t) { return c; };
    node->declared = Periodic{{c}};
    return DiagSeq(derive_tail(node));
  }
  for (const auto& b : builtins()) {
    if (key == b.key) {
      auto node = std::make_shared<Node>();
      node->label = b.key;
      node->registered = true;
      node->gen = b.gen;
      node->declared = b.tail;
      return DiagSeq(derive_tail(node));
    }
  }
  throw DomainError("unknown diagonal generator '" + std::string(key) + "'");
}

DiagSeq DiagSeq::from_registry(std::string_view key, TailSpec declared) {
  DiagSeq base = from_registry(key);
  auto node = std::make_shared<Node>(*base.node_);
  node->declared = validated(std::move(declared));
  return DiagSeq(derive_tail(node));
}

DiagSeq DiagSeq::custom(std::string label, Generator gen, TailSpec declared) {
  auto node = std::make_shared<Node>();
  node->label = std::move(label);
  node->gen = std::move(gen);
  node->declared = validated(std::move(declared));
  return DiagSeq(derive_tail(node));
}

DiagSeq DiagSeq::constant(Scalar c) { return from_registry("const:" + format_scalar(checked(c))); }

std::vector<DiagSeq::RegistryEntry> DiagSeq::registry() {
  std::vector<RegistryEntry> out;
  for (const auto& b : builtins()) out.push_back({b.key, b.description, b.tail});
  out.push_back({"const:<re>[,<im>]", "d_n = c for every n", Periodic{{Scalar(0.0)}}});
  return out;
}

DiagSeq DiagSeq::from_node(std::shared_ptr<const Node> node) { return DiagSeq(std::move(node)); }

Scalar DiagSeq::operator()(std::size_t n) const {
  if (n == 0) throw DomainError("diagonal indices are 1-based");
  return checked(evaluate(*node_, n));
}

bool DiagSeq::has_tail() const { return node_->tail.has_value(); }

const TailSpec& DiagSeq::tail() const {
  if (!node_->tail) {
    throw InconclusiveError("tail of '" + describe() + "' is not determined: " + node_->tail_error, 0.0,
                            std::numeric_limits<double>::infinity());
  }
  return *node_->tail;
}

DiagSeq DiagSeq::mapped(SeqMap map, Scalar a, Scalar b, std::size_t index) const {
  auto node = std::make_shared<Node>();
  node->kind = Node::Kind::Map;
  node->map = map;
  node->a = checked(a);
  node->b = checked(b);
  node->index = index;
  node->lhs = node_;
  return DiagSeq(derive_tail(node));
}

DiagSeq DiagSeq::affine(Scalar scale, Scalar offset) const {
  if (scale == Scalar(1.0) && offset == Scalar(0.0)) return *this;
  return mapped(SeqMap::Affine, scale, offset);
}

DiagSeq DiagSeq::conj() const {
  // conj is an involution; undo rather than stack.
  if (node_->kind == Node::Kind::Map && node_->map == SeqMap::Conj) return DiagSeq(node_->lhs);
  return mapped(SeqMap::Conj);
}

DiagSeq DiagSeq::abs() const { return mapped(SeqMap::Abs); }
DiagSeq DiagSeq::phase() const { return mapped(SeqMap::Phase); }
DiagSeq DiagSeq::sqrt() const { return mapped(SeqMap::Sqrt); }
DiagSeq DiagSeq::defect() const { return mapped(SeqMap::Defect); }

DiagSeq DiagSeq::with_override(std::size_t index, Scalar value) const {
  if (index == 0) throw DomainError("diagonal indices are 1-based");
  return mapped(SeqMap::Override, value, 0.0, index);
}

DiagSeq DiagSeq::plus(const DiagSeq& other) const {
  if (other.is_zero()) return *this;
  if (is_zero()) return other;
  auto node = std::make_shared<Node>();
  node->kind = Node::Kind::Sum;
  node->lhs = node_;
  node->rhs = other.node_;
  return DiagSeq(derive_tail(node));
}

bool DiagSeq::is_zero() const {
  return node_->kind == Node::Kind::Leaf && node_->registered && node_->label.starts_with("const:") &&
         node_->gen(1) == Scalar(0.0) && node_->declared == TailSpec{Periodic{{Scalar(0.0)}}};
}

bool DiagSeq::serializable() const {
  switch (node_->kind) {
    case Node::Kind::Leaf:
      return node_->registered;
    case Node::Kind::Map:
      return DiagSeq(node_->lhs).serializable();
    case Node::Kind::Sum:
      return DiagSeq(node_->lhs).serializable() && DiagSeq(node_->rhs).serializable();
  }
  return false;
}

std::string DiagSeq::describe() const {
  std::ostringstream os;
  switch (node_->kind) {
    case Node::Kind::Leaf:
      os << node_->label;
      break;
    case Node::Kind::Sum:
      os << "(" << DiagSeq(node_->lhs).describe() << " + " << DiagSeq(node_->rhs).describe() << ")";
      break;
    case Node::Kind::Map: {
      const auto inner = DiagSeq(node_->lhs).describe();
      switch (node_->map) {
        case SeqMap::Affine:
          os << format_scalar(node_->a) << "*" << inner << "+" << format_scalar(node_->b);
          break;
        case SeqMap::Conj:
          os << "conj(" << inner << ")";
          break;
        case SeqMap::Abs:
          os << "|" << inner << "|";
          break;
        case SeqMap::Phase:
          os << "phase(" << inner << ")";
          break;
        case SeqMap::Sqrt:
          os << "sqrt(" << inner << ")";
          break;
        case SeqMap::Defect:
          os << "1/(1+|" << inner << "|^2)";
          break;
        case SeqMap::Override:
          os << inner << "[" << node_->index << ":=" << format_scalar(node_->a) << "]";
          break;
      }
      break;
    }
  }
  return os.str();
}

bool DiagSeq::operator==(const DiagSeq& other) const {
  if (node_ == other.node_) return true;
  const Node& x = *node_;
  const Node& y = *other.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Node::Kind::Leaf:
      // Custom callables are only equal to themselves.
      return x.registered && y.registered && x.label == y.label && x.declared == y.declared;
    case Node::Kind::Map:
      return x.map == y.map && x.a == y.a && x.b == y.b && x.index == y.index &&
             DiagSeq(x.lhs) == DiagSeq(y.lhs);
    case Node::Kind::Sum:
      return DiagSeq(x.lhs) == DiagSeq(y.lhs) && DiagSeq(x.rhs) == DiagSeq(y.rhs);
  }
  return false;
}

double tail_radius(const DiagSeq& seq, std::size_t n) {
  const auto acc = seq.accumulation();
  double r = 0.0;
  for (std::size_t k = n / 2 + 1; k <= n; ++k) r = std::max(r, chordal_distance(acc, seq(k)));
  return r;
}

TailConsistency check_tail_consistency(const DiagSeq& seq, std::size_t n) {
  if (n < 2) return {false, "prefix too short"};
  if (!seq.has_tail()) return {false, "tail not determined"};
  const std::size_t half = n / 2;
  auto fmt = [](const char* what, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: late %.6g vs early %.6g", what, a, b);
    return std::string(buf);
  };
  return std::visit(
      Overloaded{
          [&](const ConvergesTo& c) -> TailConsistency {
            double early = 0.0;
            double late = 0.0;
            for (std::size_t k = 1; k <= half; ++k) early = std::max(early, std::abs(seq(k) - c.limit));
            for (std::size_t k = half; k <= n; ++k) late = std::max(late, std::abs(seq(k) - c.limit));
            return {late < early + kExactTol, fmt("distance to limit", late, early)};
          },
          [&](const Periodic& p) -> TailConsistency {
            const auto period = p.values.size();
            for (std::size_t k = half + 1; k <= n; ++k) {
              const Scalar want = p.values[(k - 1) % period];
              if (std::abs(seq(k) - want) > kExactTol * std::max(1.0, std::abs(want))) {
                return {false, "entry " + std::to_string(k) + " breaks the declared period"};
              }
            }
            return {true, "period matches on late window"};
          },
          [&](const FiniteRange& r) -> TailConsistency {
            std::vector<bool> hit(r.values.size(), false);
            for (std::size_t k = half + 1; k <= n; ++k) {
              const Scalar v = seq(k);
              bool found = false;
              for (std::size_t j = 0; j < r.values.size(); ++j) {
                if (std::abs(v - r.values[j]) <= kExactTol * std::max(1.0, std::abs(v))) {
                  hit[j] = true;
                  found = true;
                }
              }
              if (!found) return {false, "entry " + std::to_string(k) + " outside the declared range"};
            }
            if (std::find(hit.begin(), hit.end(), false) != hit.end()) {
              return {false, "a declared value is never taken on the late window"};
            }
            return {true, "range matches on late window"};
          },
          [&](const DeclaredAccumulation& d) -> TailConsistency {
            const auto acc = accumulation(d);
            double early = 0.0;
            double late = 0.0;
            for (std::size_t k = 1; k <= half; ++k) early = std::max(early, chordal_distance(acc, seq(k)));
            for (std::size_t k = half; k <= n; ++k) late = std::max(late, chordal_distance(acc, seq(k)));
            if (!(late < early + kExactTol)) return {false, fmt("distance to declared set", late, early)};
            for (const auto& p : acc.points) {
              double early_min = std::numeric_limits<double>::infinity();
              double late_min = std::numeric_limits<double>::infinity();
              for (std::size_t k = 1; k <= half; ++k) early_min = std::min(early_min, chordal(p, seq(k)));
              for (std::size_t k = half; k <= n; ++k) late_min = std::min(late_min, chordal(p, seq(k)));
              if (!(late_min <= early_min + kExactTol)) return {false, fmt("approach to point", late_min, early_min)};
            }
            if (acc.infinity) {
              double early_max = 0.0;
              double late_max = 0.0;
              for (std::size_t k = 1; k <= half; ++k) early_max = std::max(early_max, std::abs(seq(k)));
              for (std::size_t k = half; k <= n; ++k) late_max = std::max(late_max, std::abs(seq(k)));
              if (!(late_max >= early_max)) return {false, fmt("growth", late_max, early_max)};
            }
            return {true, fmt("distance to declared set", late, early)};
          },
      },
      seq.tail());
}

}  // namespace minatt
