#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minatt/scalar.hpp"
#include "minatt/tail_spec.hpp"

namespace minatt {

/// Pointwise maps a diagonal sequence can be pushed through.
enum class SeqMap {
  Affine,    // a*d + b
  Conj,
  Abs,
  Phase,     // d/|d|, 0 at 0
  Sqrt,      // principal root
  Defect,    // 1/(1+|d|^2)
  Override,  // d_index := a
};

/// Lazy diagonal entries d_1, d_2, ... with tail metadata.
///
/// A sequence is an immutable expression tree: a leaf generator (built-in
/// registry key or a custom callable) pushed through pointwise maps and sums.
/// The tail of a derived sequence is derived from the leaves' declared tails;
/// when that is impossible the sequence still evaluates but `tail()` throws
/// InconclusiveError.
class DiagSeq {
 public:
  using Generator = std::function<Scalar(std::size_t)>;

  struct Node;

  struct RegistryEntry {
    std::string key;
    std::string description;
    TailSpec tail;
  };

  static DiagSeq from_registry(std::string_view key);
  static DiagSeq from_registry(std::string_view key, TailSpec declared);
  static DiagSeq custom(std::string label, Generator gen, TailSpec declared);
  static DiagSeq constant(Scalar c);
  static DiagSeq zero() { return constant(0.0); }
  static std::vector<RegistryEntry> registry();

  /// d_n for n >= 1; throws DomainError on n == 0 or a non-finite value.
  Scalar operator()(std::size_t n) const;

  bool has_tail() const;
  const TailSpec& tail() const;
  AccumulationSet accumulation() const { return minatt::accumulation(tail()); }

  DiagSeq affine(Scalar scale, Scalar offset) const;
  DiagSeq conj() const;
  DiagSeq abs() const;
  DiagSeq phase() const;
  DiagSeq sqrt() const;
  DiagSeq defect() const;
  DiagSeq with_override(std::size_t index, Scalar value) const;
  DiagSeq plus(const DiagSeq& other) const;

  /// True for the bare constant-zero leaf.
  bool is_zero() const;
  /// True when every leaf is a registry generator.
  bool serializable() const;
  std::string describe() const;

  const Node& node() const { return *node_; }
  static DiagSeq from_node(std::shared_ptr<const Node> node);

  bool operator==(const DiagSeq& other) const;

 private:
  explicit DiagSeq(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  DiagSeq mapped(SeqMap map, Scalar a = 0.0, Scalar b = 0.0, std::size_t index = 0) const;

  std::shared_ptr<const Node> node_;
};

struct DiagSeq::Node {
  enum class Kind { Leaf, Map, Sum };
  Kind kind = Kind::Leaf;

  // Leaf
  std::string label;
  bool registered = false;
  Generator gen;
  TailSpec declared;

  // Map
  SeqMap map = SeqMap::Affine;
  Scalar a{0.0};
  Scalar b{0.0};
  std::size_t index = 0;

  // Map uses lhs; Sum uses lhs and rhs.
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  std::optional<TailSpec> tail;
  std::string tail_error;
};

/// max over n in (N/2, N] of the chordal distance from d_n to the declared
/// accumulation set. Used as the envelope radius for the tail beyond N.
double tail_radius(const DiagSeq& seq, std::size_t n);

struct TailConsistency {
  bool consistent = true;
  std::string detail;
};

/// Prefix heuristic that catches grossly misdeclared tails.
TailConsistency check_tail_consistency(const DiagSeq& seq, std::size_t n = kDefaultPrefix);

}  // namespace minatt
