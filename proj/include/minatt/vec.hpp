#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "minatt/scalar.hpp"

namespace minatt {

/// Finitely supported vector in C^n or l^2. Indices are 1-based and
/// strictly increasing; `dim == nullopt` means the ambient space is l^2.
class Vec {
 public:
  struct Entry {
    std::size_t index;
    Scalar value;
    bool operator==(const Entry&) const = default;
  };

  Vec() = default;
  explicit Vec(std::vector<Entry> entries,
               std::optional<std::size_t> dim = std::nullopt);

  static Vec basis(std::size_t index,
                   std::optional<std::size_t> dim = std::nullopt);
  /// Entry k of `v` lands at index offset + k + 1; exact zeros are dropped.
  static Vec from_dense(const DenseVector& v,
                        std::optional<std::size_t> dim = std::nullopt,
                        std::size_t offset = 0);

  std::span<const Entry> entries() const { return entries_; }
  std::optional<std::size_t> dim() const { return dim_; }
  bool empty() const { return entries_.empty(); }

  /// Largest index carrying an entry, 0 for the zero vector.
  std::size_t support_end() const;
  Scalar at(std::size_t index) const;
  double norm() const;

  /// Dense copy of indices 1..n. Throws DomainError if support exceeds n.
  DenseVector to_dense(std::size_t n) const;

  Vec scaled(Scalar factor) const;
  Vec with_dim(std::optional<std::size_t> dim) const;

  friend Vec operator+(const Vec& a, const Vec& b);
  bool operator==(const Vec&) const = default;

 private:
  std::vector<Entry> entries_;
  std::optional<std::size_t> dim_;
};

/// <x, y> = sum x_i conj(y_i); linear in the first argument.
Scalar inner(const Vec& x, const Vec& y);

}  // namespace minatt
