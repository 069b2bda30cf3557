#pragma once

#include "hcpfactor/ledger.hpp"
#include "hcpfactor/matrix.hpp"
#include "hcpfactor/schedule.hpp"

namespace hcpfactor {

namespace detail {

inline Mat cannon_rec(const Mat& c, const Mat& a, const Mat& b, const ValidatedPlatform& pf,
                      int k, CommLedger* led) {
  int n = c.rows();
  if (k == 0) {
    // one processing element: local multiply-accumulate
    if (led) led->record_flops(flops::gemm(n, n, n));
    return gemm(a, b, c, 1.0, 1.0);
  }
  int s = pf.level(k).p_rows;
  if (s == 1) return cannon_rec(c, a, b, pf, k - 1, led);
  int nb = n / s;
  Mat r = c;
  double nodes = double(s) * s;
  // initial skew: each node ships one A block and one B block at level k,
  // flat pricing per shift regardless of distance
  if (led)
    led->parallel(nodes, [&] {
      led->record_p2p(double(nb) * nb, k);
      led->record_p2p(double(nb) * nb, k);
    });
  for (int h = 0; h < s; ++h) {
    auto round = [&] {
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
          int t = (i + j + h) % s;
          CommLedger* sub = (led && i == 0 && j == 0) ? led : nullptr;
          Mat out = cannon_rec(r.block(i * nb, j * nb, nb, nb), a.block(i * nb, t * nb, nb, nb),
                               b.block(t * nb, j * nb, nb, nb), pf, k - 1, sub);
          r.set_block(i * nb, j * nb, out);
        }
      if (led) {
        // unit circular shifts of A and B
        led->record_p2p(double(nb) * nb, k);
        led->record_p2p(double(nb) * nb, k);
      }
    };
    if (led)
      led->parallel(nodes, round);
    else
      round();
  }
  return r;
}

}  // namespace detail

/// Recursive multilevel Cannon: returns C + A*B on square matrices,
/// distributed over square sqrt(P_k) x sqrt(P_k) grids at levels 1..k.
/// Shifts are simulated by index arithmetic; the ledger carries the data
/// motion they would cause.
inline Mat ml_cannon(const Mat& c, const Mat& a, const Mat& b, const ValidatedPlatform& pf,
                     int level, CommLedger* ledger = nullptr) {
  if (level < 1 || level > pf.depth())
    throw LevelOutOfRange("ml_cannon level " + std::to_string(level));
  int n = c.rows();
  if (c.cols() != n || a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != n)
    throw ShapeError("ml_cannon requires equal square matrices");
  int div = 1;
  for (int k = 1; k <= level; ++k) {
    const LevelSpec& lv = pf.level(k);
    if (lv.p_rows != lv.p_cols)
      throw NonSquareGrid("ml_cannon requires a square grid at level " + std::to_string(k));
    div *= lv.p_rows;
  }
  if (div > 0 && n % div != 0)
    throw ShapeError("matrix order " + std::to_string(n) + " not divisible by grid product " +
                     std::to_string(div));
  return detail::cannon_rec(c, a, b, pf, level, ledger);
}

}  // namespace hcpfactor
