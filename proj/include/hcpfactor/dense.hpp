#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hcpfactor/matrix.hpp"

namespace hcpfactor {

struct SingularPivot : std::runtime_error {
  explicit SingularPivot(const std::string& what) : std::runtime_error(what) {}
};

struct GeppResult {
  Perm perm;
  Mat l;  // unit lower trapezoidal, m x n
  Mat u;  // upper triangular, n x n
  std::vector<double> growth_trace;  // max |trailing entry| after each step
};

/// Gaussian elimination with partial pivoting. Ties go to the smallest row
/// index so that tournament-equivalence checks are deterministic.
inline GeppResult gepp(const Mat& a) {
  int m = a.rows(), n = a.cols();
  if (m < n) throw DimensionMismatch("gepp: matrix must be square or tall");
  Mat w = a;
  Perm p(m);
  GeppResult res;
  res.growth_trace.reserve(n);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(w(k, k));
    for (int i = k + 1; i < m; ++i) {
      double v = std::abs(w(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) throw SingularPivot("gepp: zero pivot column at step " + std::to_string(k));
    w.swap_rows(k, piv);
    p.swap(k, piv);
    double pivval = w(k, k);
    double stepmax = 0.0;
    for (int j = k; j < n; ++j) stepmax = std::max(stepmax, std::abs(w(k, j)));
    for (int i = k + 1; i < m; ++i) {
      double lik = w(i, k) / pivval;
      w(i, k) = lik;
      for (int j = k + 1; j < n; ++j) {
        w(i, j) -= lik * w(k, j);
        stepmax = std::max(stepmax, std::abs(w(i, j)));
      }
    }
    res.growth_trace.push_back(stepmax);
  }
  res.perm = p;
  res.l = Mat(m, n);
  res.u = Mat(n, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      if (i > j)
        res.l(i, j) = w(i, j);
      else if (i == j)
        res.l(i, j) = 1.0;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) res.u(i, j) = w(i, j);
  return res;
}

/// Compact WY aggregated Householder reflectors: Q = I - Y T Y^T,
/// Y unit lower trapezoidal (m x k), T upper triangular (k x k).
struct CompactWY {
  Mat y;
  Mat t;

  int rows() const { return y.rows(); }
  int count() const { return y.cols(); }

  /// C <- Q^T C (transpose=true) or Q C (transpose=false), C has y.rows() rows.
  Mat apply(const Mat& c, bool transpose) const {
    if (c.rows() != y.rows()) throw DimensionMismatch("CompactWY::apply row mismatch");
    // Q^T C = C - Y T^T (Y^T C), Q C = C - Y T (Y^T C)
    Mat w = matmul(y.transposed(), c);  // k x c
    Mat tw = transpose ? matmul(t.transposed(), w) : matmul(t, w);
    Mat r = c;
    Mat ytw = matmul(y, tw);
    for (int i = 0; i < r.rows(); ++i)
      for (int j = 0; j < r.cols(); ++j) r(i, j) -= ytw(i, j);
    return r;
  }
};

struct QrFactors {
  CompactWY wy;
  Mat r;  // n x n upper triangular, nonnegative diagonal
};

namespace detail {

/// Householder reflector mapping x onto +||x|| e_1 (nonnegative beta).
/// On return v[0..m) holds the reflector with v[0] = 1, returns {tau, beta}.
inline std::pair<double, double> make_reflector(std::vector<double>& x) {
  int m = static_cast<int>(x.size());
  double alpha = x[0];
  double xnorm2 = 0.0;
  for (int i = 1; i < m; ++i) xnorm2 += x[i] * x[i];
  double beta = std::sqrt(alpha * alpha + xnorm2);
  if (beta == 0.0) {
    x[0] = 1.0;
    return {0.0, 0.0};
  }
  if (xnorm2 == 0.0 && alpha > 0.0) {
    x[0] = 1.0;
    return {0.0, alpha};
  }
  double v0 = (alpha <= 0.0) ? alpha - beta : -xnorm2 / (alpha + beta);
  double tau = -v0 / beta;
  for (int i = 1; i < m; ++i) x[i] /= v0;
  x[0] = 1.0;
  return {tau, beta};
}

}  // namespace detail

/// Blocked-free Householder QR with compact WY accumulation.
/// Diagonal of R is forced nonnegative.
inline QrFactors householder_qr(const Mat& a) {
  int m = a.rows(), n = a.cols();
  if (m < n) throw DimensionMismatch("householder_qr: rows >= cols required");
  Mat w = a;
  Mat y(m, n);
  std::vector<double> taus(n, 0.0);
  std::vector<double> col;
  for (int k = 0; k < n; ++k) {
    col.assign(m - k, 0.0);
    for (int i = k; i < m; ++i) col[i - k] = w(i, k);
    auto [tau, beta] = detail::make_reflector(col);
    taus[k] = tau;
    for (int i = k; i < m; ++i) y(i, k) = col[i - k];
    // apply H = I - tau v v^T to trailing columns of w
    if (tau != 0.0) {
      for (int j = k; j < n; ++j) {
        double dot = 0.0;
        for (int i = k; i < m; ++i) dot += col[i - k] * w(i, j);
        dot *= tau;
        for (int i = k; i < m; ++i) w(i, j) -= dot * col[i - k];
      }
    }
    w(k, k) = beta;
    for (int i = k + 1; i < m; ++i) w(i, k) = 0.0;
  }
  // T recurrence: T(0:k,k) = -tau_k T(0:k,0:k) (Y^T y_k), T(k,k) = tau_k
  Mat t(n, n);
  for (int k = 0; k < n; ++k) {
    t(k, k) = taus[k];
    if (taus[k] == 0.0) continue;
    std::vector<double> z(k, 0.0);
    for (int j = 0; j < k; ++j) {
      double dot = 0.0;
      for (int i = k; i < m; ++i) dot += y(i, j) * y(i, k);
      z[j] = dot;
    }
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int p = j; p < k; ++p) s += t(j, p) * z[p];
      t(j, k) = -taus[k] * s;
    }
  }
  QrFactors f;
  f.wy.y = std::move(y);
  f.wy.t = std::move(t);
  f.r = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) f.r(i, j) = w(i, j);
  return f;
}

/// Explicit Q (m x m) from a compact WY factor, mostly for tests.
inline Mat explicit_q(const CompactWY& wy) {
  return wy.apply(Mat::identity(wy.rows()), false);
}

}  // namespace hcpfactor
