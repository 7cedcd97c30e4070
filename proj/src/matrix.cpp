#include "temg/matrix.hpp"

#include <cmath>
#include <cstdint>

#include "temg/common.hpp"

namespace temg {

namespace {

void check_mul(size_t ak, size_t bk, const char* what) {
  if (ak != bk) throw ConfigError(std::string("matmul shape mismatch in ") + what);
}

// Row-block kernel shared by the serial and parallel entry points: i-k-j
// loop order, accumulation over k strictly ascending per output element.
void mul_rows(const Matrix& a, const Matrix& b, Matrix& c, size_t r0, size_t r1) {
  const size_t K = a.cols(), N = b.cols();
  for (size_t i = r0; i < r1; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (size_t k = 0; k < K; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (size_t j = 0; j < N; ++j) ci[j] += aik * bk[j];
    }
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_mul(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < static_cast<int64_t>(a.rows()); ++i)
    mul_rows(a, b, c, static_cast<size_t>(i), static_cast<size_t>(i) + 1);
  return c;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  check_mul(a.cols(), b.rows(), "matmul_serial");
  Matrix c(a.rows(), b.cols());
  mul_rows(a, b, c, 0, a.rows());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_mul(a.rows(), b.rows(), "matmul_tn");
  // C[i][j] = sum_k A[k][i] * B[k][j]; accumulate over k ascending so the
  // reduction order matches the serial loop regardless of thread count.
  Matrix c(a.cols(), b.cols());
  const size_t K = a.rows(), N = b.cols();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < static_cast<int64_t>(a.cols()); ++i) {
    double* ci = c.row(static_cast<size_t>(i));
    for (size_t k = 0; k < K; ++k) {
      const double aki = a(k, static_cast<size_t>(i));
      if (aki == 0.0) continue;
      const double* bk = b.row(k);
      for (size_t j = 0; j < N; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_mul(a.cols(), b.cols(), "matmul_nt");
  Matrix c(a.rows(), b.rows());
  const size_t K = a.cols(), N = b.rows();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < static_cast<int64_t>(a.rows()); ++i) {
    const double* ai = a.row(static_cast<size_t>(i));
    double* ci = c.row(static_cast<size_t>(i));
    for (size_t j = 0; j < N; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (size_t k = 0; k < K; ++k) s += ai[k] * bj[k];
      ci[j] = s;
    }
  }
  return c;
}

void add_inplace(Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ConfigError("add_inplace shape mismatch");
  for (size_t i = 0; i < a.size(); ++i) a.raw()[i] += b.raw()[i];
}

void axpy_inplace(Matrix& a, double s, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ConfigError("axpy_inplace shape mismatch");
  for (size_t i = 0; i < a.size(); ++i) a.raw()[i] += s * b.raw()[i];
}

void scale_inplace(Matrix& a, double s) {
  for (double& v : a.raw()) v *= s;
}

void hadamard_inplace(Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ConfigError("hadamard shape mismatch");
  for (size_t i = 0; i < a.size(); ++i) a.raw()[i] *= b.raw()[i];
}

void add_row_vector_inplace(Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ConfigError("row broadcast shape mismatch");
  for (size_t i = 0; i < a.rows(); ++i) {
    double* ai = a.row(i);
    const double* r = row.row(0);
    for (size_t j = 0; j < a.cols(); ++j) ai[j] += r[j];
  }
}

Matrix column_sums(const Matrix& a) {
  Matrix out(1, a.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    for (size_t j = 0; j < a.cols(); ++j) out(0, j) += ai[j];
  }
  return out;
}

Matrix relu(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i)
    out.raw()[i] = a.raw()[i] > 0.0 ? a.raw()[i] : 0.0;
  return out;
}

Matrix relu_mask(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.raw()[i] = a.raw()[i] > 0.0 ? 1.0 : 0.0;
  return out;
}

bool all_finite(const Matrix& a) {
  for (double v : a.raw())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace temg
