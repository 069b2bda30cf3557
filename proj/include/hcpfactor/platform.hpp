#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcpfactor {

struct PlatformError : std::runtime_error {
  explicit PlatformError(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyPlatform : PlatformError {
  EmptyPlatform() : PlatformError("platform has no levels") {}
};
struct BufferConstraintViolation : PlatformError {
  explicit BufferConstraintViolation(const std::string& what) : PlatformError(what) {}
};
struct NetworkKindMismatch : PlatformError {
  explicit NetworkKindMismatch(const std::string& what) : PlatformError(what) {}
};
struct LevelOutOfRange : PlatformError {
  explicit LevelOutOfRange(const std::string& what) : PlatformError(what) {}
};
struct MemoryOverflow : PlatformError {
  explicit MemoryOverflow(const std::string& what) : PlatformError(what) {}
};

enum class NetworkKind { fully_pipelined, bufferized, forward };

inline const char* to_string(NetworkKind k) {
  switch (k) {
    case NetworkKind::fully_pipelined: return "fully_pipelined";
    case NetworkKind::bufferized: return "bufferized";
    case NetworkKind::forward: return "forward";
  }
  return "?";
}

/// One level of the hierarchy. Level 1 is the deepest (processing elements);
/// a node of level i+1 contains P_i = p_rows * p_cols nodes of level i
/// arranged on a 2D grid.
struct LevelSpec {
  int index = 0;       // 1-based, 1 = deepest
  int p_rows = 1;      // Pr_i
  int p_cols = 1;      // Pc_i
  double alpha = 0.0;  // latency, seconds per message
  double beta = 0.0;   // seconds per 8-byte word
  double buffer_words = 1.0;  // network buffer B_i, in words
  NetworkKind network = NetworkKind::fully_pipelined;

  double nodes() const { return double(p_rows) * double(p_cols); }
};

struct PlatformSpec {
  std::vector<LevelSpec> levels;        // deepest first
  double mem_level1_words = 0.0;        // M_1
  double gamma = 0.0;                   // seconds per flop
};

/// Per-level communication/computation tallies along the critical path,
/// priced against a platform. Total time assumes no overlap of computation
/// and communication.
struct CostVector {
  std::vector<double> words;       // W_k, critical-path words per level (1-based level = index+1)
  std::vector<double> messages;    // S_k
  std::vector<double> comm_time;   // W_k*beta_k + S_k*alpha_k
  double flops = 0.0;
  double flop_time = 0.0;

  explicit CostVector(int nlevels = 0)
      : words(nlevels, 0.0), messages(nlevels, 0.0), comm_time(nlevels, 0.0) {}

  double total_comm_time() const {
    double t = 0.0;
    for (double c : comm_time) t += c;
    return t;
  }
  double total_time() const { return flop_time + total_comm_time(); }
};

struct LowerBounds {
  double words_bound = 0.0;     // n^2 / sqrt(sP_i)
  double messages_bound = 0.0;  // n^2 / (B_i sqrt(sP_i))
  double memory_bound = 0.0;    // n^2 / sP_i
};

/// Validated platform with derived tables: total node count P, subtree
/// counts sP_i = prod_{j=i..l} P_j, and aggregated memory M_i.
class ValidatedPlatform {
 public:
  static ValidatedPlatform validate(const PlatformSpec& spec) {
    if (spec.levels.empty()) throw EmptyPlatform();
    for (size_t i = 0; i < spec.levels.size(); ++i) {
      const LevelSpec& lv = spec.levels[i];
      if (lv.index != int(i) + 1)
        throw PlatformError("level indices must be contiguous starting at 1");
      if (lv.p_rows < 1 || lv.p_cols < 1)
        throw PlatformError("grid dimensions must be >= 1 at level " + std::to_string(lv.index));
      if (lv.alpha <= 0.0 || lv.beta <= 0.0)
        throw PlatformError("alpha and beta must be positive at level " + std::to_string(lv.index));
      if (lv.buffer_words < 1.0)
        throw PlatformError("buffer must hold at least one word at level " +
                            std::to_string(lv.index));
    }
    if (spec.mem_level1_words <= 0.0) throw PlatformError("mem_level1_words must be positive");
    if (spec.gamma <= 0.0) throw PlatformError("gamma must be positive");
    // Level 1 is fully pipelined by convention: B_1 = M_1.
    if (spec.levels[0].buffer_words != spec.mem_level1_words)
      throw BufferConstraintViolation("B_1 must equal M_1");
    for (size_t i = 1; i < spec.levels.size(); ++i) {
      double b_prev = spec.levels[i - 1].buffer_words;
      double b_cur = spec.levels[i].buffer_words;
      double p_prev = spec.levels[i - 1].nodes();
      if (b_cur < b_prev || b_cur > p_prev * b_prev)
        throw BufferConstraintViolation(
            "buffer sandwich B_{i-1} <= B_i <= P_{i-1} B_{i-1} broken at level " +
            std::to_string(i + 1));
      NetworkKind k = spec.levels[i].network;
      if (k == NetworkKind::fully_pipelined && b_cur != p_prev * b_prev)
        throw NetworkKindMismatch("fully_pipelined level " + std::to_string(i + 1) +
                                  " requires B_i = P_{i-1} B_{i-1}");
      if (k == NetworkKind::forward && b_cur != b_prev)
        throw NetworkKindMismatch("forward level " + std::to_string(i + 1) +
                                  " requires B_i = B_{i-1}");
    }
    return ValidatedPlatform(spec);
  }

  const PlatformSpec& spec() const { return spec_; }
  int depth() const { return static_cast<int>(spec_.levels.size()); }
  const LevelSpec& level(int i) const {  // 1-based
    if (i < 1 || i > depth()) throw LevelOutOfRange("level " + std::to_string(i));
    return spec_.levels[i - 1];
  }
  double total_nodes() const { return subtree_nodes_[0]; }
  /// sP_i = prod_{j=i..l} P_j
  double subtree_nodes(int i) const {
    if (i < 1 || i > depth()) throw LevelOutOfRange("level " + std::to_string(i));
    return subtree_nodes_[i - 1];
  }
  /// M_i = M_1 * prod_{j=1..i-1} P_j
  double aggregated_memory(int i) const {
    if (i < 1 || i > depth()) throw LevelOutOfRange("level " + std::to_string(i));
    return aggregated_memory_[i - 1];
  }
  double gamma() const { return spec_.gamma; }
  double mem_level1() const { return spec_.mem_level1_words; }

 private:
  explicit ValidatedPlatform(PlatformSpec spec) : spec_(std::move(spec)) {
    int l = depth();
    subtree_nodes_.assign(l, 1.0);
    aggregated_memory_.assign(l, spec_.mem_level1_words);
    for (int i = l - 1; i >= 0; --i) {
      subtree_nodes_[i] = spec_.levels[i].nodes();
      if (i + 1 < l) subtree_nodes_[i] *= subtree_nodes_[i + 1];
    }
    for (int i = 1; i < l; ++i)
      aggregated_memory_[i] = aggregated_memory_[i - 1] * spec_.levels[i - 1].nodes();
  }

  PlatformSpec spec_;
  std::vector<double> subtree_nodes_;
  std::vector<double> aggregated_memory_;
};

/// Raw per-level word/message counts of a point-to-point transfer; shared by
/// the pricing functions and the instrumented ledger so both stay consistent.
struct CommCounts {
  std::vector<double> words;
  std::vector<double> messages;
};

/// Point-to-point transfer of D words between two nodes of level r: every
/// level k <= r moves W_k = D / prod_{j=k..r-1} P_j words per node, in
/// ceil(W_k/B_k) messages (one message at level 1, whose buffer is M_1).
inline CommCounts p2p_counts(double volume_words, int r, const ValidatedPlatform& pf) {
  if (r < 1 || r > pf.depth()) throw LevelOutOfRange("p2p level " + std::to_string(r));
  if (volume_words < 0.0) throw PlatformError("negative communication volume");
  CommCounts c;
  c.words.assign(pf.depth(), 0.0);
  c.messages.assign(pf.depth(), 0.0);
  if (volume_words == 0.0) return c;  // empty transfers cost nothing
  double w = volume_words;
  for (int k = r; k >= 1; --k) {
    c.words[k - 1] = w;
    c.messages[k - 1] = (k == 1) ? 1.0 : std::ceil(w / pf.level(k).buffer_words);
    if (k > 1) w /= pf.level(k - 1).nodes();
  }
  if (c.words[0] > pf.mem_level1())
    throw MemoryOverflow("level-1 share " + std::to_string(c.words[0]) +
                         " words exceeds M_1");
  return c;
}

inline CostVector price_counts(const CommCounts& c, const ValidatedPlatform& pf) {
  CostVector cv(pf.depth());
  for (int k = 1; k <= pf.depth(); ++k) {
    cv.words[k - 1] = c.words[k - 1];
    cv.messages[k - 1] = c.messages[k - 1];
    cv.comm_time[k - 1] =
        c.words[k - 1] * pf.level(k).beta + c.messages[k - 1] * pf.level(k).alpha;
  }
  return cv;
}

inline CostVector p2p_cost(double volume_words, int r, const ValidatedPlatform& pf) {
  return price_counts(p2p_counts(volume_words, r, pf), pf);
}

inline int ceil_log2(double q) {
  if (q <= 1.0) return 0;
  return static_cast<int>(std::ceil(std::log2(q)));
}

/// Broadcast to q counterparts at level r = ceil(log2 q) point-to-point rounds.
inline CostVector bcast_cost(double volume_words, int r, double fanout, const ValidatedPlatform& pf) {
  if (fanout < 1.0) throw PlatformError("broadcast fanout must be >= 1");
  int rounds = ceil_log2(fanout);
  CostVector one = p2p_cost(volume_words, r, pf);
  CostVector cv(pf.depth());
  for (int k = 0; k < pf.depth(); ++k) {
    cv.words[k] = rounds * one.words[k];
    cv.messages[k] = rounds * one.messages[k];
    cv.comm_time[k] = rounds * one.comm_time[k];
  }
  return cv;
}

/// Communication lower bounds at level i for an n-by-n matrix-product-like
/// computation; asymptotic constants taken as 1.
inline LowerBounds lower_bounds(double n, int i, const ValidatedPlatform& pf) {
  if (i < 1 || i > pf.depth()) throw LevelOutOfRange("lower_bounds level " + std::to_string(i));
  LowerBounds b;
  double sp = pf.subtree_nodes(i);
  b.words_bound = n * n / std::sqrt(sp);
  b.messages_bound = n * n / (pf.level(i).buffer_words * std::sqrt(sp));
  b.memory_bound = n * n / sp;
  return b;
}

}  // namespace hcpfactor
