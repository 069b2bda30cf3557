#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcpfactor {

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Dense real matrix, row-major, double precision.
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), d_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw DimensionMismatch("negative matrix dimension");
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return d_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return d_[static_cast<size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return d_; }
  std::vector<double>& data() { return d_; }

  Mat block(int i0, int j0, int r, int c) const {
    Mat b(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
    return b;
  }

  void set_block(int i0, int j0, const Mat& b) {
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) (*this)(i0 + i, j0 + j) = b(i, j);
  }

  void swap_rows(int i, int j) {
    if (i == j) return;
    for (int c = 0; c < cols_; ++c) std::swap((*this)(i, c), (*this)(j, c));
  }

  Mat transposed() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  int rows_, cols_;
  std::vector<double> d_;
};

/// Row permutation: row i of PA is row map[i] of A.
class Perm {
 public:
  Perm() = default;
  explicit Perm(int n) : map_(n) {
    for (int i = 0; i < n; ++i) map_[i] = i;
  }
  explicit Perm(std::vector<int> map) : map_(std::move(map)) {}

  int size() const { return static_cast<int>(map_.size()); }
  int operator[](int i) const { return map_[i]; }

  void swap(int i, int j) { std::swap(map_[i], map_[j]); }

  Mat apply(const Mat& a) const {
    if (a.rows() != size()) throw DimensionMismatch("Perm::apply dimension mismatch");
    Mat b(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) b(i, j) = a(map_[i], j);
    return b;
  }

  bool is_identity() const {
    for (int i = 0; i < size(); ++i)
      if (map_[i] != i) return false;
    return true;
  }

  const std::vector<int>& map() const { return map_; }

 private:
  std::vector<int> map_;
};

struct Norms {
  double one = 0.0;
  double inf = 0.0;
  double fro = 0.0;
  double maxabs = 0.0;
};

inline Norms norms(const Mat& a) {
  Norms n;
  std::vector<double> colsum(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < a.cols(); ++j) {
      double v = std::abs(a(i, j));
      rowsum += v;
      colsum[j] += v;
      n.fro += v * v;
      if (v > n.maxabs) n.maxabs = v;
    }
    if (rowsum > n.inf) n.inf = rowsum;
  }
  for (double c : colsum)
    if (c > n.one) n.one = c;
  n.fro = std::sqrt(n.fro);
  return n;
}

inline double fro_norm(const Mat& a) { return norms(a).fro; }
inline double max_abs(const Mat& a) { return norms(a).maxabs; }

/// c = alpha*a*b + beta*c
inline Mat gemm(const Mat& a, const Mat& b, const Mat& c, double alpha = 1.0, double beta = 0.0) {
  if (a.cols() != b.rows()) throw DimensionMismatch("gemm inner dimension");
  if (beta != 0.0 && (c.rows() != a.rows() || c.cols() != b.cols()))
    throw DimensionMismatch("gemm output dimension");
  Mat r(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      double aik = alpha * a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  if (beta != 0.0)
    for (int i = 0; i < r.rows(); ++i)
      for (int j = 0; j < r.cols(); ++j) r(i, j) += beta * c(i, j);
  return r;
}

inline Mat matmul(const Mat& a, const Mat& b) { return gemm(a, b, Mat(), 1.0, 0.0); }

inline Mat sub(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("sub");
  Mat r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

/// Solve L*X = B with L unit lower triangular (strict lower part of l used).
inline Mat trsm_lower_unit(const Mat& l, const Mat& b) {
  if (l.rows() != l.cols() || l.rows() != b.rows()) throw DimensionMismatch("trsm_lower_unit");
  Mat x = b;
  int n = l.rows();
  for (int j = 0; j < b.cols(); ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < i; ++k) x(i, j) -= l(i, k) * x(k, j);
  return x;
}

/// Solve U*X = B with U upper triangular.
inline Mat trsm_upper(const Mat& u, const Mat& b) {
  if (u.rows() != u.cols() || u.rows() != b.rows()) throw DimensionMismatch("trsm_upper");
  Mat x = b;
  int n = u.rows();
  for (int j = 0; j < b.cols(); ++j)
    for (int i = n - 1; i >= 0; --i) {
      for (int k = i + 1; k < n; ++k) x(i, j) -= u(i, k) * x(k, j);
      x(i, j) /= u(i, i);
    }
  return x;
}

}  // namespace hcpfactor
