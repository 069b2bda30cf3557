#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcpfactor/dense.hpp"
#include "hcpfactor/matrix.hpp"

namespace hcpfactor {

struct UnsupportedOrder : std::runtime_error {
  explicit UnsupportedOrder(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownGenerator : std::runtime_error {
  explicit UnknownGenerator(const std::string& name)
      : std::runtime_error("unknown matrix generator: " + name) {}
};

/// Deterministic RNG: mt19937_64 stream with our own double conversion so
/// generated fixtures are bit-reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform_sym();
      v = uniform_sym();
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct MatrixGen {
  std::string name;
  int n = 0;
  uint64_t seed = 0;
  double kappa = 1e7;  // randsvd condition target
};

namespace gen_detail {

inline Mat random_uniform(int n, uint64_t seed) {
  Rng rng(seed);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.uniform_sym();
  return a;
}

inline Mat random_normal(int n, uint64_t seed) {
  Rng rng(seed);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

inline Mat hadamard(int n) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw UnsupportedOrder("hadamard requires a power-of-two order, got " + std::to_string(n));
  Mat h(n, n);
  h(0, 0) = 1.0;
  for (int s = 1; s < n; s *= 2)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        h(i + s, j) = h(i, j);
        h(i, j + s) = h(i, j);
        h(i + s, j + s) = -h(i, j);
      }
  return h;
}

inline Mat circulant(int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> row(n);
  for (double& v : row) v = rng.uniform_sym();
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = row[(j - i + n) % n];
  return a;
}

inline Mat lotkin(int n) {
  Mat a(n, n);
  for (int j = 0; j < n; ++j) a(0, j) = 1.0;
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 1.0 / (i + j + 1);
  return a;
}

inline Mat kms(int n, double rho = 0.5) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::pow(rho, std::abs(i - j));
  return a;
}

inline Mat moler(int n) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = (i == j) ? i + 1.0 : std::min(i, j) - 1.0;
  return a;
}

inline Mat fiedler(int n) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::abs(i - j);
  return a;
}

inline Mat minij(int n) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::min(i, j) + 1.0;
  return a;
}

inline Mat random_orthogonal(int n, uint64_t seed) {
  QrFactors f = householder_qr(random_normal(n, seed));
  return explicit_q(f.wy);
}

/// U diag(sigma) V^T with geometrically graded singular values 1 .. 1/kappa.
inline Mat randsvd(int n, uint64_t seed, double kappa) {
  Mat u = random_orthogonal(n, seed * 2 + 1);
  Mat v = random_orthogonal(n, seed * 2 + 2);
  Mat us = u;
  for (int j = 0; j < n; ++j) {
    double sigma = (n > 1) ? std::pow(kappa, -static_cast<double>(j) / (n - 1)) : 1.0;
    for (int i = 0; i < n; ++i) us(i, j) *= sigma;
  }
  return matmul(us, v.transposed());
}

/// Wilkinson's GEPP growth trigger: unit diagonal, -1 below, ones last column.
inline Mat gfpp_growth(int n) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (int j = 0; j < i; ++j) a(i, j) = -1.0;
    a(i, n - 1) = 1.0;
  }
  return a;
}

}  // namespace gen_detail

inline const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names = {
      "random_uniform", "random_normal", "hadamard", "circulant",
      "lotkin",         "kms",           "moler",    "fiedler",
      "minij",          "randsvd",       "gfpp_growth", "orthogonal_random"};
  return names;
}

inline Mat generate(const MatrixGen& g) {
  if (g.n < 1) throw UnsupportedOrder("matrix order must be >= 1");
  using namespace gen_detail;
  if (g.name == "random_uniform") return random_uniform(g.n, g.seed);
  if (g.name == "random_normal") return random_normal(g.n, g.seed);
  if (g.name == "hadamard") return hadamard(g.n);
  if (g.name == "circulant") return circulant(g.n, g.seed);
  if (g.name == "lotkin") return lotkin(g.n);
  if (g.name == "kms") return kms(g.n);
  if (g.name == "moler") return moler(g.n);
  if (g.name == "fiedler") return fiedler(g.n);
  if (g.name == "minij") return minij(g.n);
  if (g.name == "randsvd") return randsvd(g.n, g.seed, g.kappa);
  if (g.name == "gfpp_growth") return gfpp_growth(g.n);
  if (g.name == "orthogonal_random") return random_orthogonal(g.n, g.seed);
  throw UnknownGenerator(g.name);
}

}  // namespace hcpfactor
