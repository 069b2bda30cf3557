#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "hcpfactor/cannon.hpp"
#include "hcpfactor/generators.hpp"

using namespace hcpfactor;

namespace {

ValidatedPlatform square_platform(int levels, int side) {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e8;
  double buf = 1e8;
  for (int i = 1; i <= levels; ++i) {
    if (i > 1) buf *= side * side;
    s.levels.push_back({i, side, side, 1e-9 * i, 1e-10 * i, buf,
                        NetworkKind::fully_pipelined});
  }
  return ValidatedPlatform::validate(s);
}

}  // namespace

TEST_CASE("identity operand") {
  ValidatedPlatform pf = square_platform(1, 2);
  Mat b = generate({"random_uniform", 8, 5});
  Mat c = generate({"random_uniform", 8, 6});
  Mat r = ml_cannon(c, Mat::identity(8), b, pf, 1);
  Mat expected = c;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) expected(i, j) += b(i, j);
  CHECK(max_abs(sub(r, expected)) <= 1e-14);
}

TEST_CASE("matches gemm oracle on one level") {
  ValidatedPlatform pf = square_platform(1, 2);
  Mat a = generate({"random_uniform", 16, 1});
  Mat b = generate({"random_uniform", 16, 2});
  Mat c(16, 16);
  Mat r = ml_cannon(c, a, b, pf, 1);
  Mat oracle = matmul(a, b);
  CHECK(fro_norm(sub(r, oracle)) <= 1e-13 * fro_norm(oracle));
}

TEST_CASE("matches gemm oracle on two levels with accumulate") {
  ValidatedPlatform pf = square_platform(2, 2);
  Mat a = generate({"random_uniform", 16, 3});
  Mat b = generate({"random_uniform", 16, 4});
  Mat c = generate({"random_uniform", 16, 5});
  Mat r = ml_cannon(c, a, b, pf, 2);
  Mat oracle = gemm(a, b, c, 1.0, 1.0);
  CHECK(fro_norm(sub(r, oracle)) <= 1e-13 * fro_norm(oracle));
}

TEST_CASE("result independent of platform shape") {
  Mat a = generate({"random_uniform", 16, 8});
  Mat b = generate({"random_uniform", 16, 9});
  Mat c(16, 16);
  Mat r1 = ml_cannon(c, a, b, square_platform(1, 4), 1);
  Mat r2 = ml_cannon(c, a, b, square_platform(2, 2), 2);
  CHECK(fro_norm(sub(r1, r2)) <= 1e-12 * fro_norm(r1));
}

TEST_CASE("ledger counts shifts on a 2x2 grid") {
  ValidatedPlatform pf = square_platform(1, 2);
  Mat a = generate({"random_uniform", 8, 12});
  Mat b = generate({"random_uniform", 8, 13});
  Mat c(8, 8);
  auto led = std::make_shared<CommLedger>(pf);
  ml_cannon(c, a, b, pf, 1, led.get());
  // block is 4x4 = 16 words; skew ships A and B once, then 2 rounds of
  // unit shifts for both operands: (1 + 2) * 2 * 16 = 96 words per node.
  CHECK(led->totals().words[0] == 96.0);
  // flops: 2 rounds of one 4x4x4 block multiply on the critical path
  CHECK(led->totals().flops == 2.0 * flops::gemm(4, 4, 4));
  // aggregate = 4 nodes' worth
  CHECK(led->totals().agg_words[0] == 4.0 * 96.0);
  CHECK(led->totals().agg_flops == 4.0 * led->totals().flops);
}

TEST_CASE("shape and grid errors") {
  ValidatedPlatform pf = square_platform(1, 2);
  Mat a = generate({"random_uniform", 6, 1});
  CHECK_THROWS_AS(ml_cannon(Mat(6, 6), a, Mat(6, 5), pf, 1), ShapeError);
  CHECK_THROWS_AS(ml_cannon(Mat(7, 7), generate({"random_uniform", 7, 1}),
                            generate({"random_uniform", 7, 2}), pf, 1),
                  ShapeError);

  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e8;
  s.levels.push_back({1, 2, 4, 1e-9, 1e-10, 1e8, NetworkKind::fully_pipelined});
  ValidatedPlatform rect = ValidatedPlatform::validate(s);
  CHECK_THROWS_AS(ml_cannon(Mat(8, 8), generate({"random_uniform", 8, 1}),
                            generate({"random_uniform", 8, 2}), rect, 1),
                  NonSquareGrid);
}
