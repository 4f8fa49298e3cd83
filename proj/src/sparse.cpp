#include "triage/sparse.hpp"

#include "triage/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace triage {

double SparseVector::norm() const {
  double s = 0.0;
  for (double v : value)
    s += v * v;
  return std::sqrt(s);
}

void SparseVector::append_to(SparseVector &out, std::uint32_t offset) const {
  for (std::size_t i = 0; i < index.size(); ++i) {
    out.index.push_back(index[i] + offset);
    out.value.push_back(value[i]);
  }
}

double RowView::at(std::uint32_t col) const {
  auto it = std::lower_bound(index.begin(), index.end(), col);
  if (it == index.end() || *it != col)
    return 0.0;
  return value[static_cast<std::size_t>(it - index.begin())];
}

void CsrMatrix::add_row(const SparseVector &row) {
  for (std::size_t i = 0; i < row.index.size(); ++i) {
    if (row.index[i] >= cols_)
      fail(ErrorCode::InvalidArgument, "sparse column " + std::to_string(row.index[i]) +
                                           " exceeds width " + std::to_string(cols_));
    if (i > 0 && row.index[i] <= row.index[i - 1])
      fail(ErrorCode::InvalidArgument, "sparse row indices must be strictly increasing");
  }
  col_.insert(col_.end(), row.index.begin(), row.index.end());
  val_.insert(val_.end(), row.value.begin(), row.value.end());
  row_ptr_.push_back(col_.size());
}

void CsrMatrix::add_dense_row(std::span<const double> row) {
  if (row.size() != cols_)
    fail(ErrorCode::InvalidArgument, "dense row has wrong width");
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j] != 0.0) {
      col_.push_back(static_cast<std::uint32_t>(j));
      val_.push_back(row[j]);
    }
  row_ptr_.push_back(col_.size());
}

RowView CsrMatrix::row(std::size_t i) const {
  auto b = row_ptr_[i], e = row_ptr_[i + 1];
  return {std::span<const std::uint32_t>(col_.data() + b, e - b),
          std::span<const double>(val_.data() + b, e - b)};
}

std::vector<double> CsrMatrix::dense_row(std::size_t i) const {
  std::vector<double> out(cols_, 0.0);
  auto r = row(i);
  for (std::size_t k = 0; k < r.index.size(); ++k)
    out[r.index[k]] = r.value[k];
  return out;
}

} // namespace triage
