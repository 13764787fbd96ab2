#include "minatt/vec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "minatt/errors.hpp"

namespace minatt {

Scalar checked(Scalar z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("non-finite scalar");
  }
  return z;
}

Vec::Vec(std::vector<Entry> entries, std::optional<std::size_t> dim)
    : entries_(std::move(entries)), dim_(dim) {
  std::size_t prev = 0;
  for (auto& e : entries_) {
    if (e.index == 0) throw DomainError("vector indices are 1-based");
    if (e.index <= prev) throw DomainError("vector indices must be strictly increasing");
    if (dim_ && e.index > *dim_) {
      throw DomainError("index " + std::to_string(e.index) + " exceeds dimension " +
                        std::to_string(*dim_));
    }
    e.value = checked(e.value);
    prev = e.index;
  }
}

Vec Vec::basis(std::size_t index, std::optional<std::size_t> dim) {
  return Vec({{index, Scalar(1.0)}}, dim);
}

Vec Vec::from_dense(const DenseVector& v, std::optional<std::size_t> dim,
                    std::size_t offset) {
  std::vector<Entry> out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) != Scalar(0.0)) out.push_back({offset + static_cast<std::size_t>(k) + 1, v(k)});
  }
  return Vec(std::move(out), dim);
}

std::size_t Vec::support_end() const {
  return entries_.empty() ? 0 : entries_.back().index;
}

Scalar Vec::at(std::size_t index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, std::size_t i) { return e.index < i; });
  return (it != entries_.end() && it->index == index) ? it->value : Scalar(0.0);
}

double Vec::norm() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += std::norm(e.value);
  return std::sqrt(sum);
}

DenseVector Vec::to_dense(std::size_t n) const {
  if (support_end() > n) {
    throw DomainError("vector support " + std::to_string(support_end()) +
                      " exceeds dense length " + std::to_string(n));
  }
  DenseVector out = DenseVector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& e : entries_) out(static_cast<Eigen::Index>(e.index - 1)) = e.value;
  return out;
}

Vec Vec::scaled(Scalar factor) const {
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back({e.index, e.value * factor});
  return Vec(std::move(out), dim_);
}

Vec Vec::with_dim(std::optional<std::size_t> dim) const { return Vec(entries_, dim); }

Vec operator+(const Vec& a, const Vec& b) {
  std::vector<Vec::Entry> out;
  auto ia = a.entries_.begin();
  auto ib = b.entries_.begin();
  while (ia != a.entries_.end() || ib != b.entries_.end()) {
    if (ib == b.entries_.end() || (ia != a.entries_.end() && ia->index < ib->index)) {
      out.push_back(*ia++);
    } else if (ia == a.entries_.end() || ib->index < ia->index) {
      out.push_back(*ib++);
    } else {
      out.push_back({ia->index, ia->value + ib->value});
      ++ia;
      ++ib;
    }
  }
  std::optional<std::size_t> dim = a.dim_;
  if (!dim || (b.dim_ && *b.dim_ > *dim)) dim = b.dim_;
  if (!a.dim_ || !b.dim_) dim = std::nullopt;
  return Vec(std::move(out), dim);
}

Scalar inner(const Vec& x, const Vec& y) {
  Scalar sum(0.0);
  auto ix = x.entries().begin();
  auto iy = y.entries().begin();
  while (ix != x.entries().end() && iy != y.entries().end()) {
    if (ix->index < iy->index) {
      ++ix;
    } else if (iy->index < ix->index) {
      ++iy;
    } else {
      sum += ix->value * std::conj(iy->value);
      ++ix;
      ++iy;
    }
  }
  return sum;
}

}  // namespace minatt
