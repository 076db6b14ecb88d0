#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cellseq::detail {

// Compressed row storage for ragged integer tables.
template <class T>
class Csr {
 public:
  Csr() : offsets_{0} {}

  void reserve(std::size_t rows, std::size_t values) {
    offsets_.reserve(rows + 1);
    values_.reserve(values);
  }

  void push_row(std::span<const T> row) {
    values_.insert(values_.end(), row.begin(), row.end());
    offsets_.push_back(values_.size());
  }

  // Appends a value to the row currently being built; close it with end_row().
  void push_value(T v) { values_.push_back(v); }
  void end_row() { offsets_.push_back(values_.size()); }

  std::size_t rows() const noexcept { return offsets_.size() - 1; }
  std::size_t total() const noexcept { return values_.size(); }

  std::span<const T> row(std::size_t i) const noexcept {
    return {values_.data() + offsets_[i], values_.data() + offsets_[i + 1]};
  }
  std::size_t row_size(std::size_t i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
  std::size_t row_begin(std::size_t i) const noexcept { return offsets_[i]; }
  const std::vector<T>& values() const noexcept { return values_; }

  // Builds the transpose of a table whose values index `columns` rows.
  Csr transpose(std::size_t columns) const {
    std::vector<std::uint64_t> counts(columns + 1, 0);
    for (const T& v : values_) ++counts[static_cast<std::size_t>(v) + 1];
    for (std::size_t i = 0; i < columns; ++i) counts[i + 1] += counts[i];
    Csr out;
    out.offsets_.assign(counts.begin(), counts.end());
    out.values_.resize(values_.size());
    std::vector<std::uint64_t> cursor(counts.begin(), counts.end() - 1);
    for (std::size_t r = 0; r < rows(); ++r)
      for (const T& v : row(r)) out.values_[cursor[static_cast<std::size_t>(v)]++] = T(r);
    return out;
  }

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<T> values_;
};

}  // namespace cellseq::detail
