#ifndef IRMKIT_BLOCK_MATRIX_HPP
#define IRMKIT_BLOCK_MATRIX_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

namespace irmkit {

// Dense row-major matrix indexed by block labels. Grows in place with
// amortized reallocation so that opening a new block is cheap.
template <class T>
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), stride_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * stride_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * stride_ + c]; }

  // New entries are value-initialized; existing entries keep their values.
  void resize(std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = (r < rows ? std::min(cols, cols_) : 0); c < cols_; ++c) (*this)(r, c) = T{};
    }
    if (cols > stride_) {
      const std::size_t stride = std::max(cols, 2 * stride_);
      std::vector<T> data(std::max(rows, rows_) * stride, T{});
      for (std::size_t r = 0; r < rows_; ++r) {
        std::copy_n(data_.begin() + r * stride_, cols_, data.begin() + r * stride);
      }
      data_ = std::move(data);
      stride_ = stride;
    }
    if (rows * stride_ > data_.size()) data_.resize(rows * stride_, T{});
    rows_ = rows;
    cols_ = cols;
  }

  friend bool operator==(const BlockMatrix& a, const BlockMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    for (std::size_t r = 0; r < a.rows_; ++r) {
      for (std::size_t c = 0; c < a.cols_; ++c) {
        if (!(a(r, c) == b(r, c))) return false;
      }
    }
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<T> data_;
};

}  // namespace irmkit

#endif  // IRMKIT_BLOCK_MATRIX_HPP
