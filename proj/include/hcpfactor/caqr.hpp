#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "hcpfactor/dense.hpp"
#include "hcpfactor/ledger.hpp"
#include "hcpfactor/matrix.hpp"
#include "hcpfactor/schedule.hpp"

namespace hcpfactor {

/// One node of the Householder tree: a compact WY block acting on an explicit
/// set of global rows. Leaves come from processing-element factorizations,
/// eliminations from stacked-triangle 2b-by-b factorizations.
struct TreeEntry {
  int level = 0;      // recursion level that created the entry (0 = processing element)
  int step = 0;       // panel step within that level
  int col0 = 0;       // first column the reflectors act on
  std::vector<int> rows;  // global row indices, first count() carry R afterwards
  CompactWY wy;
};

/// Ordered reflector storage: applying entries front-to-back (transposed)
/// reproduces R from A; back-to-front rebuilds Q.
struct HouseholderTree {
  std::vector<TreeEntry> entries;
  int matrix_rows = 0;

  size_t size() const { return entries.size(); }
};

struct QrResult {
  Mat r_factor;  // n x n upper triangular, nonnegative diagonal
  HouseholderTree tree;
  std::shared_ptr<CommLedger> ledger;
};

namespace detail {

inline Mat gather(const Mat& w, const std::vector<int>& rows, int c0, int ncols) {
  Mat s(static_cast<int>(rows.size()), ncols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < ncols; ++j) s(static_cast<int>(i), j) = w(rows[i], c0 + j);
  return s;
}

inline void scatter(Mat& w, const std::vector<int>& rows, int c0, const Mat& s) {
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < s.cols(); ++j) w(rows[i], c0 + j) = s(static_cast<int>(i), j);
}

/// Apply one tree entry (Q^T or Q) to columns [c0, c0+ncols) of w in place.
/// Returns the flop-formula cost of that application.
inline double apply_entry(const TreeEntry& e, Mat& w, int c0, int ncols, bool transpose) {
  Mat sub = gather(w, e.rows, c0, ncols);
  scatter(w, e.rows, c0, e.wy.apply(sub, transpose));
  return flops::wy_apply(static_cast<double>(e.rows.size()), e.wy.count(), ncols);
}

class MlCaqrEngine {
 public:
  MlCaqrEngine(Mat& w, const ValidatedPlatform& pf, const BlockSchedule& sched,
               HouseholderTree& tree)
      : w_(w), pf_(pf), sched_(sched), tree_(tree) {}

  /// Factor columns [c0, c0+ncols) over the given global rows at recursion
  /// level r; level 0 is a single processing element.
  void factor(std::vector<int> rows, int c0, int ncols, int r, CommLedger* led) {
    if (r == 0) {
      factor_leaf(std::move(rows), c0, ncols, led);
      return;
    }
    int b = sched_.at(r);
    int pr = pf_.level(r).p_rows;
    int pc = pf_.level(r).p_cols;
    int npanels = ncols / b;
    for (int s = 0; s < npanels; ++s) {
      int pc0 = c0 + s * b;                       // panel columns [pc0, pc0+b)
      int row_off = s * b;                        // rows consumed by earlier panels
      int ms = static_cast<int>(rows.size()) - row_off;
      int pr_eff = std::min(pr, std::max(1, ms / b));
      // split remaining rows into pr_eff chunks
      std::vector<std::vector<int>> chunks(pr_eff);
      int base = ms / pr_eff, rem = ms % pr_eff, pos = row_off;
      for (int p = 0; p < pr_eff; ++p) {
        int h = base + (p < rem ? 1 : 0);
        chunks[p].assign(rows.begin() + pos, rows.begin() + pos + h);
        pos += h;
      }
      size_t leaf_begin = tree_.entries.size();
      // leaf factorizations, parallel over the row grid
      {
        auto body = [&] {
          for (int p = 0; p < pr_eff; ++p)
            factor(chunks[p], pc0, b, r - 1, (led && p == 0) ? led : nullptr);
        };
        if (led)
          led->parallel(pr_eff, body);
        else
          body();
      }
      size_t elim_begin = tree_.entries.size();
      // binary elimination tree over the pr_eff R triangles
      std::vector<int> alive(pr_eff);
      for (int p = 0; p < pr_eff; ++p) alive[p] = p;
      struct Round {
        size_t begin, end;
        int npairs;
      };
      std::vector<Round> round_entries;
      double tri_words = 0.5 * b * (b + 1);
      while (alive.size() > 1) {
        size_t round_begin = tree_.entries.size();
        std::vector<int> next;
        int npairs = static_cast<int>(alive.size()) / 2;
        auto round = [&] {
          for (int q = 0; q + 1 < static_cast<int>(alive.size()); q += 2) {
            int src = alive[q], tgt = alive[q + 1];
            std::vector<int> stacked(chunks[src].begin(), chunks[src].begin() + b);
            stacked.insert(stacked.end(), chunks[tgt].begin(), chunks[tgt].begin() + b);
            CommLedger* sub = (led && q == 0) ? led : nullptr;
            if (sub) {
              sub->record_p2p(tri_words, r);
              // both nodes of the pair factor the stacked triangles
              sub->parallel(2.0, [&] { factor(stacked, pc0, b, r - 1, sub); });
            } else {
              factor(stacked, pc0, b, r - 1, nullptr);
            }
            next.push_back(src);
          }
          if (alive.size() % 2 == 1) next.push_back(alive.back());
        };
        if (led)
          led->parallel(npairs, round);
        else
          round();
        alive = std::move(next);
        round_entries.push_back({round_begin, tree_.entries.size(), npairs});
      }
      // trailing update
      int trail0 = pc0 + b;
      int ntrail = c0 + ncols - trail0;
      if (ntrail > 0) {
        // ML-UPFACT: broadcast leaf reflectors along process rows, apply
        double leaf_flops = 0.0;
        for (size_t e = leaf_begin; e < elim_begin; ++e)
          leaf_flops += apply_entry(tree_.entries[e], w_, trail0, ntrail, true);
        if (led) {
          led->parallel(static_cast<double>(pr_eff), [&] {
            led->record_bcast(static_cast<double>(chunks[0].size()) * b, r, pc);
          });
          led->parallel(static_cast<double>(pr_eff) * pc,
                        [&] { led->record_flops(leaf_flops / (double(pr_eff) * pc)); });
        }
        // ML-UPELIM: per elimination round, pairs exchange trailing blocks
        double c_loc = static_cast<double>(ntrail) / pc;
        for (const auto& rnd : round_entries) {
          double round_flops = 0.0;
          for (size_t e = rnd.begin; e < rnd.end; ++e)
            round_flops += apply_entry(tree_.entries[e], w_, trail0, ntrail, true);
          if (led) {
            double pairs = static_cast<double>(rnd.npairs);
            led->parallel(2.0 * pairs * pc, [&] {
              led->record_p2p(b * c_loc, r);
              led->record_flops(round_flops / (pairs * pc));
            });
          }
        }
      } else {
        // panel-only geometry: reflectors stay put, nothing to update
        (void)round_entries;
      }
    }
  }

 private:
  void factor_leaf(std::vector<int> rows, int c0, int ncols, CommLedger* led) {
    int m = static_cast<int>(rows.size());
    if (m < ncols) throw ShapeError("leaf panel has fewer rows than columns");
    Mat sub = gather(w_, rows, c0, ncols);
    QrFactors qf = householder_qr(sub);
    if (led) led->record_flops(flops::qr(m, ncols));
    Mat back(m, ncols);
    for (int i = 0; i < ncols; ++i)
      for (int j = i; j < ncols; ++j) back(i, j) = qf.r(i, j);
    scatter(w_, rows, c0, back);
    TreeEntry e;
    e.level = 0;
    e.col0 = c0;
    e.rows = std::move(rows);
    e.wy = std::move(qf.wy);
    tree_.entries.push_back(std::move(e));
  }

  Mat& w_;
  const ValidatedPlatform& pf_;
  const BlockSchedule& sched_;
  HouseholderTree& tree_;
};

inline QrResult run_caqr(const Mat& a, const ValidatedPlatform& pf, const BlockSchedule& sched,
                         int top_level) {
  int m = a.rows(), n = a.cols();
  if (m < n) throw ShapeError("QR requires rows >= cols");
  sched.check(m, n, pf);
  QrResult res;
  res.ledger = std::make_shared<CommLedger>(pf);
  res.tree.matrix_rows = m;
  Mat w = a;
  MlCaqrEngine eng(w, pf, sched, res.tree);
  std::vector<int> rows(m);
  for (int i = 0; i < m; ++i) rows[i] = i;
  eng.factor(std::move(rows), 0, n, top_level, res.ledger.get());
  res.r_factor = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) res.r_factor(i, j) = w(i, j);
  return res;
}

}  // namespace detail

/// Multilevel CAQR over all platform levels (Algorithm: panel loop, leaf
/// recursion, binary elimination tree, ML-UPFACT/ML-UPELIM updates).
inline QrResult ml_caqr(const Mat& a, const ValidatedPlatform& pf, const BlockSchedule& sched) {
  return detail::run_caqr(a, pf, sched, pf.depth());
}

/// 1-level base case: TSQR panel factorization plus trailing updates on the
/// level-1 grid. On a one-level platform this is exactly ml_caqr.
inline QrResult caqr(const Mat& a, const ValidatedPlatform& pf, int block) {
  return detail::run_caqr(a, pf, BlockSchedule({block}), 1);
}

/// Apply the tree's aggregate orthogonal factor: Q^T c (transpose) or Q c.
inline Mat ml_apply(const HouseholderTree& tree, const Mat& c, bool transpose) {
  if (c.rows() != tree.matrix_rows) throw ShapeError("ml_apply row mismatch");
  Mat w = c;
  if (transpose) {
    for (const auto& e : tree.entries) detail::apply_entry(e, w, 0, w.cols(), true);
  } else {
    for (auto it = tree.entries.rbegin(); it != tree.entries.rend(); ++it)
      detail::apply_entry(*it, w, 0, w.cols(), false);
  }
  return w;
}

}  // namespace hcpfactor
