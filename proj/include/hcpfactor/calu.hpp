#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "hcpfactor/dense.hpp"
#include "hcpfactor/ledger.hpp"
#include "hcpfactor/matrix.hpp"
#include "hcpfactor/schedule.hpp"

namespace hcpfactor {

struct SingularPanel : std::runtime_error {
  explicit SingularPanel(const std::string& what) : std::runtime_error(what) {}
};

struct LuResult {
  Perm perm;
  Mat l_factor;  // unit lower trapezoidal, m x n
  Mat u_factor;  // upper triangular, n x n
  std::vector<double> tau_trace;     // pivot / panel-column max, per elimination step
  std::vector<double> growth_trace;  // max |trailing| after each top-level panel
  std::shared_ptr<CommLedger> ledger;
};

struct PivotQuality {
  double tau_min = 1.0;
  double fraction_tau_eq_one = 1.0;
  std::vector<int> histogram = std::vector<int>(10, 0);  // tau in (0,1], 10 bins
  int steps = 0;
};

inline PivotQuality pivot_quality(const LuResult& r) {
  PivotQuality q;
  q.steps = static_cast<int>(r.tau_trace.size());
  if (q.steps == 0) return q;  // empty factorization: empty report
  int ones = 0;
  for (double tau : r.tau_trace) {
    q.tau_min = std::min(q.tau_min, tau);
    if (tau == 1.0) ++ones;
    int bin = std::min(9, static_cast<int>(tau * 10.0));
    ++q.histogram[bin];
  }
  q.fraction_tau_eq_one = static_cast<double>(ones) / q.steps;
  return q;
}

namespace detail {

/// Partial-pivoting row ordering used for candidate selection. Tolerates
/// zero columns (takes the smallest remaining index) since leaf blocks may
/// be structurally singular even when the whole matrix is not.
inline std::vector<int> gepp_select_order(Mat w) {
  int m = w.rows(), n = w.cols();
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  for (int k = 0; k < std::min(m, n); ++k) {
    int piv = k;
    double best = std::abs(w(k, k));
    for (int i = k + 1; i < m; ++i)
      if (std::abs(w(i, k)) > best) {
        best = std::abs(w(i, k));
        piv = i;
      }
    w.swap_rows(k, piv);
    std::swap(order[k], order[piv]);
    if (best == 0.0) continue;
    double pv = w(k, k);
    for (int i = k + 1; i < m; ++i) {
      double lik = w(i, k) / pv;
      w(i, k) = lik;
      for (int j = k + 1; j < n; ++j) w(i, j) -= lik * w(k, j);
    }
  }
  return order;
}

inline Mat gather_rows(const Mat& w, const std::vector<int>& rows, int c0, int ncols) {
  Mat s(static_cast<int>(rows.size()), ncols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < ncols; ++j) s(static_cast<int>(i), j) = w(rows[i], c0 + j);
  return s;
}

/// Pick the pivot-selection recursion used inside the tournament.
/// Returns the ordering of `rows` with the selected pivot rows first.
using SelectFn = std::function<std::vector<int>(const Mat& stacked, CommLedger* led)>;

/// Tournament over the row range [r0, m): per-chunk selection, then binary
/// reduction. round_level(j) gives the hierarchy level charged for round j.
/// Returns the winning `bw` row positions (current positions in w).
inline std::vector<int> tournament(const Mat& w, int r0, int c0, int bw, int pr,
                                   const std::vector<int>& round_levels, CommLedger* led,
                                   const SelectFn& select) {
  int m = w.rows();
  int ms = m - r0;
  int pr_eff = std::min(pr, std::max(1, ms / bw));
  std::vector<std::vector<int>> cand(pr_eff);
  int base = ms / pr_eff, rem = ms % pr_eff, pos = r0;
  {
    auto leaves = [&] {
      int p0 = pos;
      for (int p = 0; p < pr_eff; ++p) {
        int h = base + (p < rem ? 1 : 0);
        std::vector<int> chunk(h);
        for (int i = 0; i < h; ++i) chunk[i] = p0 + i;
        p0 += h;
        std::vector<int> order =
            select(gather_rows(w, chunk, c0, bw), (led && p == 0) ? led : nullptr);
        cand[p].resize(bw);
        for (int i = 0; i < bw; ++i) cand[p][i] = chunk[order[i]];
      }
    };
    if (led)
      led->parallel(pr_eff, leaves);
    else
      leaves();
  }
  std::vector<int> alive(pr_eff);
  for (int p = 0; p < pr_eff; ++p) alive[p] = p;
  int round = 0;
  while (alive.size() > 1) {
    int level = round_levels.empty()
                    ? 1
                    : round_levels[std::min<size_t>(round, round_levels.size() - 1)];
    int npairs = static_cast<int>(alive.size()) / 2;
    std::vector<int> next;
    auto body = [&] {
      for (int q = 0; q + 1 < static_cast<int>(alive.size()); q += 2) {
        int a = alive[q], bq = alive[q + 1];
        std::vector<int> stacked = cand[a];
        stacked.insert(stacked.end(), cand[bq].begin(), cand[bq].end());
        CommLedger* sub = (led && q == 0) ? led : nullptr;
        if (sub) sub->record_p2p(double(bw) * bw, level);
        std::vector<int> order;
        if (sub) {
          // both nodes of the pair run the reduction factorization
          sub->parallel(2.0, [&] { order = select(gather_rows(w, stacked, c0, bw), sub); });
        } else {
          order = select(gather_rows(w, stacked, c0, bw), nullptr);
        }
        cand[a].resize(bw);
        for (int i = 0; i < bw; ++i) cand[a][i] = stacked[order[i]];
        next.push_back(a);
      }
      if (alive.size() % 2 == 1) next.push_back(alive.back());
    };
    if (led)
      led->parallel(npairs, body);
    else
      body();
    alive = std::move(next);
    ++round;
  }
  return cand[alive[0]];
}

struct PanelCommGeom {
  int level = 1;  // hierarchy level of the grid driving this panel loop
  int pr = 1;
  int pc = 1;
};

/// Swap the selected pivot rows to the top of the panel, updating the global
/// permutation (rows move full-width: "at left and right").
inline void apply_pivots(Mat& w, std::vector<int>& perm, int r0, std::vector<int> winners) {
  for (size_t i = 0; i < winners.size(); ++i) {
    int dst = r0 + static_cast<int>(i);
    int src = winners[i];
    if (src == dst) continue;
    w.swap_rows(dst, src);
    std::swap(perm[dst], perm[src]);
    // a later winner may have been sitting at dst
    for (size_t j = i + 1; j < winners.size(); ++j)
      if (winners[j] == dst) winners[j] = src;
  }
}

/// Unpivoted elimination of panel columns [c0, c0+bw) over rows [r0, m).
/// Records tau_k against the panel column max at each step.
inline void panel_lu(Mat& w, int r0, int c0, int bw, std::vector<double>* tau) {
  int m = w.rows();
  for (int j = 0; j < bw; ++j) {
    int pr0 = r0 + j, pc0j = c0 + j;
    double piv = w(pr0, pc0j);
    double colmax = 0.0;
    for (int i = pr0; i < m; ++i) colmax = std::max(colmax, std::abs(w(i, pc0j)));
    if (piv == 0.0) {
      // Selection-only calls (no tau recording) rank candidate rows and must
      // tolerate exactly-zero columns the way partial pivoting ranking does.
      if (!tau && colmax == 0.0) continue;
      throw SingularPanel("zero pivot in panel at column " + std::to_string(pc0j));
    }
    if (tau) tau->push_back(colmax > 0.0 ? std::abs(piv) / colmax : 1.0);
    for (int i = pr0 + 1; i < m; ++i) {
      double lik = w(i, pc0j) / piv;
      w(i, pc0j) = lik;
      for (int jj = c0 + j + 1; jj < c0 + bw; ++jj) w(i, jj) -= lik * w(pr0, jj);
    }
  }
}

/// Shared panel-loop engine for CALU and both ML-CALU variants; `select`
/// implements the tournament's reduction operator, `round_levels` the level
/// charged per reduction round, `geom` the grid at this recursion level.
/// Factors w in place over all of its columns with block size b.
inline void calu_panels(Mat& w, std::vector<int>& perm, int b, PanelCommGeom geom,
                        const std::vector<int>& round_levels, CommLedger* led,
                        const SelectFn& select, std::vector<double>* tau,
                        std::vector<double>* growth) {
  int m = w.rows(), n = w.cols();
  int nsteps = std::min(m, n);
  for (int c0 = 0; c0 < nsteps; c0 += b) {
    int bw = std::min(b, nsteps - c0);
    int r0 = c0;
    int ms = m - r0;
    std::vector<int> winners = tournament(w, r0, c0, bw, geom.pr, round_levels, led, select);
    if (led) {
      // pivot information travels along process rows; winning rows move
      led->parallel(geom.pr, [&] {
        led->record_bcast(bw, geom.level, geom.pc);
        led->record_p2p(double(bw) * n / geom.pc, geom.level);
      });
    }
    apply_pivots(w, perm, r0, std::move(winners));
    panel_lu(w, r0, c0, bw, tau);
    int pr_eff = std::min(geom.pr, std::max(1, ms / bw));
    if (led)
      led->parallel(pr_eff, [&] { led->record_flops(flops::lu(ms, bw) / pr_eff); });
    int trail0 = c0 + bw;
    int ntrail = n - trail0;
    if (ntrail > 0) {
      // block row of U: solve L_kk U = A_panel_row
      Mat lkk(bw, bw);
      for (int i = 0; i < bw; ++i) {
        lkk(i, i) = 1.0;
        for (int j = 0; j < i; ++j) lkk(i, j) = w(r0 + i, c0 + j);
      }
      Mat urow(bw, ntrail);
      for (int i = 0; i < bw; ++i)
        for (int j = 0; j < ntrail; ++j) urow(i, j) = w(r0 + i, trail0 + j);
      urow = trsm_lower_unit(lkk, urow);
      for (int i = 0; i < bw; ++i)
        for (int j = 0; j < ntrail; ++j) w(r0 + i, trail0 + j) = urow(i, j);
      if (led) {
        led->parallel(geom.pc, [&] {
          led->record_bcast(0.5 * bw * (bw + 1), geom.level, geom.pc);  // L_kk along rows
          led->record_flops(flops::trsm(bw, double(ntrail) / geom.pc));
        });
      }
      // trailing update A -= L U (SUMMA-style: broadcast L along rows,
      // U along columns, local multiply)
      int mrem = m - r0 - bw;
      if (mrem > 0) {
        if (led) {
          led->parallel(geom.pr, [&] {
            led->record_bcast(double(mrem) / geom.pr * bw, geom.level, geom.pc);
          });
          led->parallel(geom.pc, [&] {
            led->record_bcast(double(bw) * ntrail / geom.pc, geom.level, geom.pr);
          });
          led->parallel(double(geom.pr) * geom.pc, [&] {
            led->record_flops(flops::gemm(mrem, ntrail, bw) / (double(geom.pr) * geom.pc));
          });
        }
        for (int i = 0; i < mrem; ++i)
          for (int k = 0; k < bw; ++k) {
            double lik = w(r0 + bw + i, c0 + k);
            if (lik == 0.0) continue;
            for (int j = 0; j < ntrail; ++j)
              w(r0 + bw + i, trail0 + j) -= lik * urow(k, j);
          }
      }
      if (growth) {
        double g = 0.0;
        for (int i = r0 + bw; i < m; ++i)
          for (int j = trail0; j < n; ++j) g = std::max(g, std::abs(w(i, j)));
        growth->push_back(g);
      }
    }
  }
}

inline LuResult package_lu(const Mat& w, std::vector<int> perm,
                           std::shared_ptr<CommLedger> led, std::vector<double> tau,
                           std::vector<double> growth) {
  int m = w.rows(), n = w.cols();
  LuResult r;
  r.l_factor = Mat(m, n);
  r.u_factor = Mat(n, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      if (i > j)
        r.l_factor(i, j) = w(i, j);
      else if (i == j)
        r.l_factor(i, j) = 1.0;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) r.u_factor(i, j) = w(i, j);
  r.perm = Perm(std::move(perm));
  r.tau_trace = std::move(tau);
  r.growth_trace = std::move(growth);
  r.ledger = std::move(led);
  return r;
}

/// GEPP-based reduction operator of flat CALU: selection at every tree node
/// is plain partial pivoting on the stacked candidate rows.
inline SelectFn gepp_reduction() {
  return [](const Mat& stacked, CommLedger* led) {
    if (led) led->record_flops(flops::lu(stacked.rows(), stacked.cols()));
    return gepp_select_order(stacked);
  };
}

}  // namespace detail

/// 1-level CALU: tournament pivoting over a pr x pc grid with block size b,
/// communications charged at hierarchy level 1 of `pf`.
inline LuResult calu(const Mat& a, int b, int pr, int pc, const ValidatedPlatform& pf) {
  if (a.rows() < a.cols()) throw ShapeError("calu: matrix must be square or tall");
  if (b < 1 || pr < 1 || pc < 1) throw ShapeError("calu: bad block size or grid");
  Mat w = a;
  std::vector<int> perm(a.rows());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  auto led = std::make_shared<CommLedger>(pf);
  std::vector<double> tau, growth;
  detail::PanelCommGeom geom{1, pr, pc};
  detail::calu_panels(w, perm, b, geom, {1}, led.get(), detail::gepp_reduction(), &tau, &growth);
  return detail::package_lu(w, std::move(perm), std::move(led), std::move(tau),
                            std::move(growth));
}

namespace detail {

/// Flat CALU whose tournament rounds are charged at the hierarchy level where
/// the pair actually sits: rounds 1..log2(Pr_1) at level 1, the next
/// log2(Pr_2) at level 2, and so on. This is the 1D-MLCALU base case.
inline std::vector<int> cross_level_rounds(const ValidatedPlatform& pf, int depth) {
  std::vector<int> rounds;
  for (int lv = 1; lv <= depth; ++lv)
    for (int j = 0; j < ceil_log2(pf.level(lv).p_rows); ++j) rounds.push_back(lv);
  if (rounds.empty()) rounds.push_back(1);
  return rounds;
}

inline void factor_1d(Mat& w, std::vector<int>& perm, const ValidatedPlatform& pf,
                      const BlockSchedule& sched, int d, CommLedger* led,
                      std::vector<double>* tau, std::vector<double>* growth) {
  if (d == 1) {
    // CALU over all row nodes of the hierarchy with block b_1
    int pr_flat = 1;
    for (int lv = 1; lv <= pf.depth(); ++lv) pr_flat *= pf.level(lv).p_rows;
    PanelCommGeom geom{1, pr_flat, pf.level(1).p_cols};
    calu_panels(w, perm, sched.at(1), geom, cross_level_rounds(pf, pf.depth()), led,
                gepp_reduction(), tau, growth);
    return;
  }
  int b = sched.at(d);
  int m = w.rows(), n = w.cols();
  const LevelSpec& lv = pf.level(d);
  int nsteps = std::min(m, n);
  for (int c0 = 0; c0 < nsteps; c0 += b) {
    int bw = std::min(b, nsteps - c0);
    int r0 = c0;
    // the whole panel is factored by one recursive call
    std::vector<int> prows(m - r0);
    for (int i = 0; i < m - r0; ++i) prows[i] = r0 + i;
    Mat panel = gather_rows(w, prows, c0, bw);
    std::vector<int> pperm(panel.rows());
    for (size_t i = 0; i < pperm.size(); ++i) pperm[i] = static_cast<int>(i);
    factor_1d(panel, pperm, pf, sched, d - 1, led, tau, nullptr);
    // apply the panel permutation to the full rows, then copy factors back
    {
      std::vector<int> newperm(perm.size());
      Mat neww = w;
      for (int i = 0; i < r0; ++i) newperm[i] = perm[i];
      for (size_t i = 0; i < pperm.size(); ++i) {
        int dst = r0 + static_cast<int>(i);
        int src = r0 + pperm[i];
        newperm[dst] = perm[src];
        for (int j = 0; j < n; ++j) neww(dst, j) = w(src, j);
      }
      w = std::move(neww);
      perm = std::move(newperm);
    }
    for (int i = 0; i < panel.rows(); ++i)
      for (int j = 0; j < bw; ++j) w(r0 + i, c0 + j) = panel(i, j);
    if (led) {
      led->parallel(lv.p_rows, [&] {
        led->record_bcast(bw, d, lv.p_cols);
        led->record_p2p(double(bw) * n / lv.p_cols, d);
      });
    }
    int trail0 = c0 + bw;
    int ntrail = n - trail0;
    if (ntrail > 0) {
      Mat lkk(bw, bw);
      for (int i = 0; i < bw; ++i) {
        lkk(i, i) = 1.0;
        for (int j = 0; j < i; ++j) lkk(i, j) = w(r0 + i, c0 + j);
      }
      Mat urow(bw, ntrail);
      for (int i = 0; i < bw; ++i)
        for (int j = 0; j < ntrail; ++j) urow(i, j) = w(r0 + i, trail0 + j);
      urow = trsm_lower_unit(lkk, urow);
      for (int i = 0; i < bw; ++i)
        for (int j = 0; j < ntrail; ++j) w(r0 + i, trail0 + j) = urow(i, j);
      int mrem = m - r0 - bw;
      if (led) {
        led->parallel(lv.p_cols, [&] {
          led->record_bcast(0.5 * bw * (bw + 1), d, lv.p_cols);
          led->record_flops(flops::trsm(bw, double(ntrail) / lv.p_cols));
        });
        if (mrem > 0) {
          led->parallel(lv.p_rows,
                        [&] { led->record_bcast(double(mrem) / lv.p_rows * bw, d, lv.p_cols); });
          led->parallel(lv.p_cols,
                        [&] { led->record_bcast(double(bw) * ntrail / lv.p_cols, d, lv.p_rows); });
          led->parallel(double(lv.p_rows) * lv.p_cols, [&] {
            led->record_flops(flops::gemm(mrem, ntrail, bw) / (double(lv.p_rows) * lv.p_cols));
          });
        }
      }
      if (mrem > 0)
        for (int i = 0; i < mrem; ++i)
          for (int k = 0; k < bw; ++k) {
            double lik = w(r0 + bw + i, c0 + k);
            if (lik == 0.0) continue;
            for (int j = 0; j < ntrail; ++j) w(r0 + bw + i, trail0 + j) -= lik * urow(k, j);
          }
    }
    if (growth && ntrail > 0) {
      double g = 0.0;
      for (int i = r0 + bw; i < m; ++i)
        for (int j = trail0; j < n; ++j) g = std::max(g, std::abs(w(i, j)));
      growth->push_back(g);
    }
  }
}

/// 2D-MLCALU recursion: the reduction operator at level d is itself a
/// recursive 2D-MLCALU factorization of the stacked candidate rows.
inline void factor_2d(Mat& w, std::vector<int>& perm, const ValidatedPlatform& pf,
                      const BlockSchedule& sched, int d, CommLedger* led,
                      std::vector<double>* tau, std::vector<double>* growth);

inline SelectFn reduction_2d(const ValidatedPlatform& pf, const BlockSchedule& sched, int d) {
  return [&pf, &sched, d](const Mat& stacked, CommLedger* led) {
    Mat copy = stacked;
    std::vector<int> order(copy.rows());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    factor_2d(copy, order, pf, sched, d, led, nullptr, nullptr);
    return order;
  };
}

inline void factor_2d(Mat& w, std::vector<int>& perm, const ValidatedPlatform& pf,
                      const BlockSchedule& sched, int d, CommLedger* led,
                      std::vector<double>* tau, std::vector<double>* growth) {
  if (d == 1) {
    PanelCommGeom geom{1, pf.level(1).p_rows, pf.level(1).p_cols};
    calu_panels(w, perm, sched.at(1), geom, {1}, led, gepp_reduction(), tau, growth);
    return;
  }
  PanelCommGeom geom{d, pf.level(d).p_rows, pf.level(d).p_cols};
  calu_panels(w, perm, sched.at(d), geom, {d}, led, reduction_2d(pf, sched, d - 1), tau,
              growth);
}

}  // namespace detail

/// 1D multilevel CALU: each panel is factored whole by one recursive call;
/// at the deepest level CALU runs over all row nodes with block b_1, its
/// tournament crossing every level of the hierarchy.
inline LuResult mlcalu_1d(const Mat& a, const ValidatedPlatform& pf, const BlockSchedule& sched) {
  if (a.rows() < a.cols()) throw ShapeError("mlcalu_1d: matrix must be square or tall");
  sched.check(a.rows(), a.cols(), pf);
  Mat w = a;
  std::vector<int> perm(a.rows());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  auto led = std::make_shared<CommLedger>(pf);
  std::vector<double> tau, growth;
  detail::factor_1d(w, perm, pf, sched, pf.depth(), led.get(), &tau, &growth);
  return detail::package_lu(w, std::move(perm), std::move(led), std::move(tau),
                            std::move(growth));
}

/// 2D multilevel CALU: panels are factored by recursive leaf calls and a
/// reduction tree whose operator is 2D-MLCALU itself.
inline LuResult mlcalu_2d(const Mat& a, const ValidatedPlatform& pf, const BlockSchedule& sched) {
  if (a.rows() < a.cols()) throw ShapeError("mlcalu_2d: matrix must be square or tall");
  sched.check(a.rows(), a.cols(), pf);
  Mat w = a;
  std::vector<int> perm(a.rows());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  auto led = std::make_shared<CommLedger>(pf);
  std::vector<double> tau, growth;
  detail::factor_2d(w, perm, pf, sched, pf.depth(), led.get(), &tau, &growth);
  return detail::package_lu(w, std::move(perm), std::move(led), std::move(tau),
                            std::move(growth));
}

}  // namespace hcpfactor
