#include "boostne/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boostne {

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  }
  return out;
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets,
                                   double drop_below) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw std::out_of_range("triplet index outside matrix bounds");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrBuilder builder(rows, cols, triplets.size());
  std::size_t current = 0;
  std::size_t k = 0;
  while (k < triplets.size()) {
    const auto row = triplets[k].row;
    while (current < row) {
      builder.finish_row();
      ++current;
    }
    const auto col = triplets[k].col;
    double value = 0.0;
    for (; k < triplets.size() && triplets[k].row == row && triplets[k].col == col; ++k) {
      value += triplets[k].value;
    }
    if (std::abs(value) > drop_below) builder.push(col, value);
  }
  while (current < rows) {
    builder.finish_row();
    ++current;
  }
  return std::move(builder).finish();
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& dense, double drop_below) {
  CsrBuilder builder(dense.rows(), dense.cols());
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    const auto row = dense.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (std::abs(row[j]) > drop_below) builder.push(static_cast<std::uint32_t>(j), row[j]);
    }
    builder.finish_row();
  }
  return std::move(builder).finish();
}

double CsrMatrix::at(std::size_t i, std::size_t j) const noexcept {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(j));
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix out(cols_, rows_);
  out.col_idx_.resize(nnz());
  out.values_.resize(nnz());
  for (const auto c : col_idx_) ++out.row_ptr_[c + 1];
  for (std::size_t j = 0; j < cols_; ++j) out.row_ptr_[j + 1] += out.row_ptr_[j];
  std::vector<std::size_t> next(out.row_ptr_.begin(), out.row_ptr_.end() - 1);
  // Rows are visited in increasing order, so each output row stays sorted.
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto dst = next[col_idx_[k]]++;
      out.col_idx_[dst] = static_cast<std::uint32_t>(i);
      out.values_[dst] = values_[k];
    }
  }
  return out;
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out(i, col_idx_[k]) = values_[k];
  }
  return out;
}

std::vector<Triplet> CsrMatrix::to_triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      out.push_back({static_cast<std::uint32_t>(i), col_idx_[k], values_[k]});
    }
  }
  return out;
}

double CsrMatrix::sum() const noexcept {
  double s = 0.0;
  for (const double v : values_) s += v;
  return s;
}

double CsrMatrix::frobenius_norm_squared() const noexcept {
  double s = 0.0;
  for (const double v : values_) s += v * v;
  return s;
}

double CsrMatrix::frobenius_norm() const noexcept { return std::sqrt(frobenius_norm_squared()); }

CsrBuilder::CsrBuilder(std::size_t rows, std::size_t cols, std::size_t reserve_nnz) : m_(rows, cols) {
  m_.row_ptr_.assign(1, 0);
  m_.row_ptr_.reserve(rows + 1);
  m_.col_idx_.reserve(reserve_nnz);
  m_.values_.reserve(reserve_nnz);
}

void CsrBuilder::push(std::uint32_t col, double value) {
  m_.col_idx_.push_back(col);
  m_.values_.push_back(value);
}

void CsrBuilder::finish_row() {
  m_.row_ptr_.push_back(m_.values_.size());
  ++current_row_;
}

void CsrBuilder::append_rows(const CsrMatrix& block) {
  if (block.cols() != m_.cols_) throw std::invalid_argument("row block column count mismatch");
  const auto base = m_.values_.size();
  m_.col_idx_.insert(m_.col_idx_.end(), block.col_idx_.begin(), block.col_idx_.end());
  m_.values_.insert(m_.values_.end(), block.values_.begin(), block.values_.end());
  for (std::size_t i = 1; i < block.row_ptr_.size(); ++i) m_.row_ptr_.push_back(base + block.row_ptr_[i]);
  current_row_ += block.rows();
}

CsrMatrix CsrBuilder::finish() && {
  if (current_row_ != m_.rows_) throw std::logic_error("CsrBuilder finished with missing rows");
  return std::move(m_);
}

}  // namespace boostne
