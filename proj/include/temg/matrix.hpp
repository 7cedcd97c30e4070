#pragma once

#include <cstddef>
#include <vector>

namespace temg {

// Dense row-major double matrix. All kernels below are deterministic: the
// OpenMP versions parallelize over output rows only, so every element is
// reduced in the same sequential order as the serial reference and results
// are bit-identical for any thread count.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return a_.size(); }
  bool empty() const { return a_.empty(); }

  double& operator()(size_t r, size_t c) { return a_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return a_[r * cols_ + c]; }
  double* row(size_t r) { return a_.data() + r * cols_; }
  const double* row(size_t r) const { return a_.data() + r * cols_; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  std::vector<double>& raw() { return a_; }
  const std::vector<double>& raw() const { return a_; }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// C = A * B (OpenMP over rows of A).
Matrix matmul(const Matrix& a, const Matrix& b);
// Reference without OpenMP; kept for kernel-equivalence tests.
Matrix matmul_serial(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

void add_inplace(Matrix& a, const Matrix& b);           // a += b
void axpy_inplace(Matrix& a, double s, const Matrix& b);  // a += s*b
void scale_inplace(Matrix& a, double s);
void hadamard_inplace(Matrix& a, const Matrix& b);      // a *= b elementwise
void add_row_vector_inplace(Matrix& a, const Matrix& row);  // broadcast 1 x C
Matrix column_sums(const Matrix& a);                    // 1 x C

Matrix relu(const Matrix& a);
// mask of the forward pass: 1 where pre-activation > 0
Matrix relu_mask(const Matrix& a);

bool all_finite(const Matrix& a);

}  // namespace temg
