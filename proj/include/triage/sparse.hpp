#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace triage {

/// Sorted, duplicate-free index/value pairs.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
  double norm() const;
  /// Shifts every index by `offset` and appends to `out`.
  void append_to(SparseVector &out, std::uint32_t offset) const;
  bool operator==(const SparseVector &) const = default;
};

struct RowView {
  std::span<const std::uint32_t> index;
  std::span<const double> value;

  double at(std::uint32_t col) const;
};

/// Compressed sparse rows with a fixed column count.
class CsrMatrix {
public:
  explicit CsrMatrix(std::size_t cols = 0) : cols_(cols) {}

  void add_row(const SparseVector &row);
  void add_dense_row(std::span<const double> row);
  RowView row(std::size_t i) const;
  std::size_t rows() const { return row_ptr_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::vector<double> dense_row(std::size_t i) const;

private:
  std::size_t cols_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
};

} // namespace triage
