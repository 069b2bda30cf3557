#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "hcpfactor/platform.hpp"

namespace hcpfactor {

struct NoOpenRegion : std::runtime_error {
  NoOpenRegion() : std::runtime_error("ledger has no open region") {}
};
struct UnbalancedRegions : std::runtime_error {
  UnbalancedRegions() : std::runtime_error("ledger regions not all closed") {}
};

/// One accumulation frame: critical-path counts plus aggregate (all-nodes)
/// counts. Sequential composition adds; parallel composition takes the
/// component-wise max on the critical path and the sum on aggregates.
struct LedgerTally {
  std::vector<double> words;       // critical-path words per level
  std::vector<double> messages;    // critical-path messages per level
  std::vector<double> agg_words;   // aggregate words per level, all nodes
  double flops = 0.0;              // critical-path flops
  double agg_flops = 0.0;

  explicit LedgerTally(int nlevels = 0)
      : words(nlevels, 0.0), messages(nlevels, 0.0), agg_words(nlevels, 0.0) {}

  void add(const LedgerTally& o) {
    for (size_t k = 0; k < words.size(); ++k) {
      words[k] += o.words[k];
      messages[k] += o.messages[k];
      agg_words[k] += o.agg_words[k];
    }
    flops += o.flops;
    agg_flops += o.agg_flops;
  }

  void max_with(const LedgerTally& o) {
    for (size_t k = 0; k < words.size(); ++k) {
      words[k] = std::max(words[k], o.words[k]);
      messages[k] = std::max(messages[k], o.messages[k]);
    }
    flops = std::max(flops, o.flops);
  }
};

/// Instrumented record of one simulated run. Algorithms record point-to-point
/// transfers, broadcasts, and flops; region combinators express the
/// parallel/sequential structure of the computation. SPMD shortcut: a
/// parallel region may run one representative branch with a declared
/// multiplicity, exact for symmetric grids.
class CommLedger {
 public:
  explicit CommLedger(const ValidatedPlatform& pf) : pf_(&pf) {
    stack_.emplace_back(pf.depth());  // root region, sequential
  }

  const ValidatedPlatform& platform() const { return *pf_; }

  void record_p2p(double volume_words, int level) {
    CommCounts c = p2p_counts(volume_words, level, *pf_);
    check_relation(c);
    LedgerTally& t = top();
    for (int k = 0; k < pf_->depth(); ++k) {
      t.words[k] += c.words[k];
      t.messages[k] += c.messages[k];
      t.agg_words[k] += c.words[k];
    }
  }

  void record_bcast(double volume_words, int level, double fanout) {
    if (fanout < 1.0) throw PlatformError("broadcast fanout must be >= 1");
    int rounds = ceil_log2(fanout);
    if (rounds == 0) return;
    CommCounts c = p2p_counts(volume_words, level, *pf_);
    check_relation(c);
    LedgerTally& t = top();
    for (int k = 0; k < pf_->depth(); ++k) {
      t.words[k] += rounds * c.words[k];
      t.messages[k] += rounds * c.messages[k];
      t.agg_words[k] += fanout * c.words[k];  // every participant ends up with the data
    }
  }

  void record_flops(double f) {
    LedgerTally& t = top();
    t.flops += f;
    t.agg_flops += f;
  }

  /// Run body as a sequential sub-region (accumulation is additive, so this
  /// is an identity on the tallies; kept for structure/associativity tests).
  void sequential(const std::function<void()>& body) {
    stack_.emplace_back(pf_->depth());
    body();
    LedgerTally t = pop();
    top().add(t);
  }

  /// SPMD parallel region: one representative branch, `multiplicity` copies.
  /// Critical path takes the branch once; aggregates are scaled.
  void parallel(double multiplicity, const std::function<void()>& body) {
    stack_.emplace_back(pf_->depth());
    body();
    LedgerTally t = pop();
    for (size_t k = 0; k < t.agg_words.size(); ++k) t.agg_words[k] *= multiplicity;
    t.agg_flops *= multiplicity;
    top().add(t);
  }

  /// Parallel region with explicit, possibly asymmetric branches:
  /// critical path = component-wise max, aggregates = sum.
  void parallel_branches(const std::vector<std::function<void()>>& branches) {
    LedgerTally combined(pf_->depth());
    for (const auto& b : branches) {
      stack_.emplace_back(pf_->depth());
      b();
      LedgerTally t = pop();
      combined.max_with(t);
      for (size_t k = 0; k < t.agg_words.size(); ++k) combined.agg_words[k] += t.agg_words[k];
      combined.agg_flops += t.agg_flops;
    }
    top().add(combined);
  }

  const LedgerTally& totals() const {
    if (stack_.size() != 1) throw UnbalancedRegions();
    return stack_.front();
  }

  bool balanced() const { return stack_.size() == 1; }

  /// Number of point-to-point transfers (including broadcast legs) whose
  /// per-level volumes were verified against the W_k = W_{k+1} / P_k chain.
  long long p2p_events() const { return p2p_events_; }

  /// Price the recorded critical path against the platform.
  CostVector price() const {
    const LedgerTally& t = totals();
    CostVector cv(pf_->depth());
    for (int k = 1; k <= pf_->depth(); ++k) {
      cv.words[k - 1] = t.words[k - 1];
      cv.messages[k - 1] = t.messages[k - 1];
      cv.comm_time[k - 1] =
          t.words[k - 1] * pf_->level(k).beta + t.messages[k - 1] * pf_->level(k).alpha;
    }
    cv.flops = t.flops;
    cv.flop_time = t.flops * pf_->gamma();
    return cv;
  }

 private:
  LedgerTally& top() {
    if (stack_.empty()) throw NoOpenRegion();
    return stack_.back();
  }
  LedgerTally pop() {
    LedgerTally t = std::move(stack_.back());
    stack_.pop_back();
    return t;
  }

  // Every transfer routed through level k+1 must carry exactly a 1/P_k share
  // per node of the level-(k+1) volume.  This is how p2p_counts builds the
  // per-level volumes, so the check is exact in floating point.
  void check_relation(const CommCounts& c) {
    for (int k = 1; k < pf_->depth(); ++k) {
      if (c.words[k] == 0.0) continue;  // above the level the transfer uses
      double p_k = static_cast<double>(pf_->level(k).p_rows) *
                   static_cast<double>(pf_->level(k).p_cols);
      if (c.words[k - 1] != c.words[k] / p_k)
        throw PlatformError("per-level volume chain violated");
    }
    ++p2p_events_;
  }

  const ValidatedPlatform* pf_;
  std::vector<LedgerTally> stack_;
  long long p2p_events_ = 0;
};

/// Flop-count formulas used for critical-path accounting. The simulator
/// computes on full matrices centrally; per-node work is charged via these
/// closed forms, exact for the symmetric grids the algorithms use.
namespace flops {

inline double qr(double m, double n) { return 2.0 * m * n * n - (2.0 / 3.0) * n * n * n; }
inline double lu(double m, double n) { return m * n * n - (1.0 / 3.0) * n * n * n; }
/// Apply a compact WY block (m rows, b reflectors) to c columns.
inline double wy_apply(double m, double b, double c) { return 4.0 * m * b * c + b * b * c; }
inline double trsm(double n, double c) { return n * n * c; }
inline double gemm(double m, double n, double k) { return 2.0 * m * n * k; }

}  // namespace flops

}  // namespace hcpfactor
