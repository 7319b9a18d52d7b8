#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace boostne {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  DenseMatrix transposed() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted within each row and
/// no explicit zeros are stored.
class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_(1, 0) {}
  CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Duplicate coordinates are summed; entries whose magnitude ends up at or
  /// below `drop_below` are discarded.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets,
                                 double drop_below = 0.0);

  /// Keeps entries with value > drop_below.
  static CsrMatrix from_dense(const DenseMatrix& dense, double drop_below = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::uint32_t> row_cols(std::size_t i) const noexcept {
    return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const noexcept {
    return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::uint32_t>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Value at (i, j), 0 when not stored. Binary search within the row.
  double at(std::size_t i, std::size_t j) const noexcept;

  CsrMatrix transposed() const;
  DenseMatrix to_dense() const;
  std::vector<Triplet> to_triplets() const;

  double sum() const noexcept;
  double frobenius_norm_squared() const noexcept;
  double frobenius_norm() const noexcept;

  bool operator==(const CsrMatrix&) const = default;

 private:
  friend class CsrBuilder;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

/// Appends rows in order. Columns within a row must be pushed in increasing
/// order.
class CsrBuilder {
 public:
  CsrBuilder(std::size_t rows, std::size_t cols, std::size_t reserve_nnz = 0);

  void push(std::uint32_t col, double value);
  void finish_row();
  /// Appends a fully formed row block (used to splice per-thread chunks).
  void append_rows(const CsrMatrix& block);
  CsrMatrix finish() &&;

 private:
  CsrMatrix m_;
  std::size_t current_row_ = 0;
};

}  // namespace boostne
