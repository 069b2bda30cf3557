#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hcpfactor/platform.hpp"

namespace hcpfactor {

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};
struct PlatformTooDeep : ShapeError {
  explicit PlatformTooDeep(const std::string& what) : ShapeError(what) {}
};
struct NonSquareGrid : ShapeError {
  explicit NonSquareGrid(const std::string& what) : ShapeError(what) {}
};

/// Panel block sizes b_1..b_l, one per recursion level (deepest first).
struct BlockSchedule {
  std::vector<int> b;

  BlockSchedule() = default;
  explicit BlockSchedule(std::vector<int> sizes) : b(std::move(sizes)) {}

  int depth() const { return static_cast<int>(b.size()); }
  int at(int level) const { return b[level - 1]; }  // 1-based

  /// Divisibility chain b_{r-1} | b_r and b_l | n, plus leaf-row feasibility
  /// m/prod(Pr) >= b at every level.
  void check(int m, int n, const ValidatedPlatform& pf) const {
    if (depth() < pf.depth())
      throw PlatformTooDeep("schedule has " + std::to_string(depth()) + " block sizes for " +
                            std::to_string(pf.depth()) + " platform levels");
    for (int r = 1; r <= depth(); ++r)
      if (b[r - 1] < 1) throw ShapeError("block sizes must be >= 1");
    for (int r = 2; r <= depth(); ++r)
      if (b[r - 1] % b[r - 2] != 0)
        throw ShapeError("b_" + std::to_string(r - 1) + " must divide b_" + std::to_string(r));
    if (n % b[depth() - 1] != 0)
      throw ShapeError("b_l = " + std::to_string(b[depth() - 1]) + " must divide n = " +
                       std::to_string(n));
    double rows = m;
    for (int r = pf.depth(); r >= 1; --r) {
      rows /= pf.level(r).p_rows;
      if (rows < b[r - 1])
        throw ShapeError("leaf rows at level " + std::to_string(r) + " smaller than b_" +
                         std::to_string(r));
    }
  }
};

}  // namespace hcpfactor
