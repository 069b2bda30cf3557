#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hcpfactor/platform.hpp"
#include "hcpfactor/schedule.hpp"

namespace hcpfactor {

enum class Algo { caqr, calu, mlcaqr, mlcalu1d, mlcalu2d, mlcannon };

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::caqr: return "caqr";
    case Algo::calu: return "calu";
    case Algo::mlcaqr: return "mlcaqr";
    case Algo::mlcalu1d: return "mlcalu1d";
    case Algo::mlcalu2d: return "mlcalu2d";
    case Algo::mlcannon: return "mlcannon";
  }
  return "?";
}

/// Closed-form modeled execution: per-level critical-path words/messages,
/// times, CCR, and ratios against the communication lower bounds.
struct ModelReport {
  double n = 0;
  double flops = 0;
  double flop_time = 0;
  std::vector<double> words, messages, comm_time;
  double total_time = 0;
  double ccr = 0;
  std::vector<double> bound_ratio;  // words_k / lower_bound words_k
  std::string notes;                // dropped O(.) terms and the like
};

namespace model_detail {

inline double log2p(double p) { return p > 1.0 ? std::log2(p) : 0.0; }

/// Price a report's word/message counts and derive totals.
inline void finalize(ModelReport& r, const ValidatedPlatform& pf) {
  int l = pf.depth();
  r.comm_time.assign(l, 0.0);
  for (int k = 1; k <= l; ++k)
    r.comm_time[k - 1] =
        r.words[k - 1] * pf.level(k).beta + r.messages[k - 1] * pf.level(k).alpha;
  r.flop_time = r.flops * pf.gamma();
  r.total_time = r.flop_time;
  for (double c : r.comm_time) r.total_time += c;
  r.ccr = r.flop_time > 0 ? (r.total_time - r.flop_time) / r.flop_time : 0.0;
  r.bound_ratio.assign(l, 0.0);
  for (int k = 1; k <= l; ++k) {
    double bound = lower_bounds(r.n, k, pf).words_bound;
    r.bound_ratio[k - 1] = bound > 0 ? r.words[k - 1] / bound : 0.0;
  }
}

}  // namespace model_detail

/// Default block schedule b_k ~ n / (sqrt(sP_k) prod_{j=k..l} log2^2 P_j),
/// clamped to >= 1 and adjusted downward onto a valid divisibility chain.
/// Degenerate log2(1)=0 denominators are guarded to 1 here only.
inline BlockSchedule default_blocks(double n, const ValidatedPlatform& pf) {
  int l = pf.depth();
  std::vector<int> b(l, 1);
  for (int k = 1; k <= l; ++k) {
    double denom = std::sqrt(pf.subtree_nodes(k));
    for (int j = k; j <= l; ++j) {
      double lg = std::max(model_detail::log2p(pf.level(j).nodes()), 1.0);
      denom *= lg * lg;
    }
    b[k - 1] = std::max(1, static_cast<int>(std::llround(n / denom)));
  }
  int ni = static_cast<int>(n);
  while (ni % b[l - 1] != 0) --b[l - 1];
  for (int k = l - 1; k >= 1; --k) {
    b[k - 1] = std::min(b[k - 1], b[k]);
    while (b[k] % b[k - 1] != 0) --b[k - 1];
  }
  return BlockSchedule(b);
}

/// Upper bound on the number of recursive calls reaching depth r:
/// N_r = 2^(l-r) prod_{j=r..l} log2 Pr_j (real-valued logs).
inline double calls_at_depth(int r, const ValidatedPlatform& pf) {
  int l = pf.depth();
  if (r < 1 || r > l) throw LevelOutOfRange("calls_at_depth level " + std::to_string(r));
  double v = std::pow(2.0, l - r);
  for (int j = r; j <= l; ++j) v *= model_detail::log2p(pf.level(j).p_rows);
  return v;
}

/// Classical 1-level CAQR/CALU mapped into the hierarchy: every communication
/// crosses the whole machine (alpha_l, beta_l), and the level-l bandwidth is
/// shared among the P/sP_l node pairs communicating concurrently.
inline ModelReport onelevel_cost(Algo algo, double n, const ValidatedPlatform& pf) {
  using model_detail::log2p;
  int l = pf.depth();
  double p = pf.total_nodes();
  double lg = log2p(p);
  ModelReport r;
  r.n = n;
  r.words.assign(l, 0.0);
  r.messages.assign(l, 0.0);
  double fconst = (algo == Algo::calu) ? 2.0 / 3.0 : 4.0 / 3.0;
  r.flops = fconst * n * n * n / p;
  if (p > 1.0) {
    r.words[l - 1] = n * n / std::sqrt(p) * lg;
    r.messages[l - 1] = std::sqrt(p) * lg * lg * lg;
  }
  model_detail::finalize(r, pf);
  // bandwidth sharing at the top level
  double share = p / pf.subtree_nodes(l);
  r.comm_time[l - 1] = r.words[l - 1] * pf.level(l).beta * share +
                       r.messages[l - 1] * pf.level(l).alpha;
  r.total_time = r.flop_time;
  for (double c : r.comm_time) r.total_time += c;
  r.ccr = r.flop_time > 0 ? (r.total_time - r.flop_time) / r.flop_time : 0.0;
  r.notes = "1-level mapping: beta_l shared by factor " + std::to_string(share);
  return r;
}

/// Closed-form ML-CAQR bound: leading flop term 4n^3/P with per-level
/// bandwidth/latency sums; explicit terms only, O(.) terms dropped.
inline ModelReport mlcaqr_cost(double n, const ValidatedPlatform& pf) {
  using model_detail::log2p;
  int l = pf.depth();
  if (l == 1) {
    ModelReport r = onelevel_cost(Algo::caqr, n, pf);
    r.notes = "l=1: ML-CAQR is CAQR";
    return r;
  }
  double p = pf.total_nodes();
  ModelReport r;
  r.n = n;
  r.words.assign(l, 0.0);
  r.messages.assign(l, 0.0);
  r.flops = 4.0 * n * n * n / p;
  double prod_lg = 1.0, prod_lg3 = 1.0;
  for (int j = 1; j <= l; ++j) {
    double g = log2p(pf.level(j).nodes());
    prod_lg *= g;
    prod_lg3 *= g * g * g;
  }
  double lgp1 = log2p(pf.level(1).nodes());
  double lgpl = log2p(pf.level(l).nodes());
  r.words[0] = n * n / std::sqrt(p) * (l * lgp1 + lgpl + 4.0 * l * prod_lg);
  r.messages[0] = l * std::sqrt(p) * prod_lg3;
  for (int k = 2; k <= l - 1; ++k) {
    double sp = pf.subtree_nodes(k);
    double prod_kl = 1.0;
    for (int j = k; j <= l; ++j) prod_kl *= log2p(pf.level(j).nodes());
    r.words[k - 1] = (l - k) * n * n / std::sqrt(sp) *
                     (1.0 + 2.0 * prod_kl / std::sqrt(pf.level(l).nodes()));
    r.messages[k - 1] =
        n * n / (pf.level(k).buffer_words * std::sqrt(sp)) * (l - k) * log2p(pf.level(k).nodes());
  }
  double spl = pf.subtree_nodes(l);
  r.words[l - 1] = n * n / std::sqrt(spl) * lgpl;
  double prod_mid = 1.0;
  for (int j = 2; j <= l - 1; ++j) prod_mid *= std::sqrt(pf.level(j).nodes());
  r.messages[l - 1] =
      n * n / (pf.level(l).buffer_words * std::sqrt(spl)) * lgpl * (1.0 + 1.0 / prod_mid);
  r.notes = "closed-form bound, O(.) terms dropped";
  model_detail::finalize(r, pf);
  return r;
}

/// 2D ML-CALU closed-form cost (l >= 2); l = 1 falls back to CALU.
inline ModelReport mlcalu_cost(double n, const ValidatedPlatform& pf) {
  using model_detail::log2p;
  int l = pf.depth();
  if (l == 1) {
    ModelReport r = onelevel_cost(Algo::calu, n, pf);
    r.notes = "l=1: ML-CALU is CALU";
    return r;
  }
  double p = pf.total_nodes();
  ModelReport r;
  r.n = n;
  r.words.assign(l, 0.0);
  r.messages.assign(l, 0.0);
  double lgpl = log2p(pf.level(l).nodes());
  double flops = 2.0 * n * n * n / (3.0 * p);
  if (lgpl > 0.0) flops += n * n * n / (p * lgpl * lgpl);
  flops += n * n * n / p * std::pow(3.0 / 8.0, l - 2) * ((5.0 / 16.0) * l - 53.0 / 128.0);
  r.flops = flops;
  double prod2 = 1.0;  // prod_{j=2..l} (1 + log2(P_j)/2)
  for (int j = 2; j <= l; ++j) prod2 *= 1.0 + 0.5 * log2p(pf.level(j).nodes());
  double prod3 = 1.0;  // prod_{j=3..l} (1 + log2(P_j)/2)
  for (int j = 3; j <= l; ++j) prod3 *= 1.0 + 0.5 * log2p(pf.level(j).nodes());
  double head = n * n / (2.0 * std::sqrt(p)) * log2p(pf.level(1).nodes()) * prod2;
  r.words[0] += head;
  r.messages[0] += head;  // same count priced at alpha_1 in the latency sum
  for (int k = 1; k <= l; ++k) {
    double sp = pf.subtree_nodes(k);
    double pk = pf.level(k).nodes();
    double term = n * n / std::sqrt(sp) *
                  ((8.0 / 3.0) * lgpl * lgpl * (1.0 + (l - k) / std::sqrt(pk)) +
                   ((l - 2.0) / 8.0) * (1.0 + l / 4.0) * prod3);
    r.words[k - 1] += term;
    r.messages[k - 1] += term / pf.level(k).buffer_words;
  }
  r.notes = "closed-form bound, O(.) terms dropped";
  model_detail::finalize(r, pf);
  return r;
}

/// Per-level word/message/flop tallies of the ML-CAQR recursive cost bound
/// (leaf recursion, log Pr_r eliminations of b^2/2-word triangles, UPFACT
/// broadcast, UPELIM pairwise exchanges), evaluated term by term. This is
/// an upper bound on what the simulator records, and an independent code
/// path from it.
struct RecursiveCost {
  std::vector<double> words, messages;
  double flops = 0.0;

  explicit RecursiveCost(int l = 0) : words(l, 0.0), messages(l, 0.0) {}
  void add(const RecursiveCost& o, double scale = 1.0) {
    for (size_t k = 0; k < words.size(); ++k) {
      words[k] += scale * o.words[k];
      messages[k] += scale * o.messages[k];
    }
    flops += scale * o.flops;
  }
  void add_p2p(double d, int r, const ValidatedPlatform& pf, double scale = 1.0) {
    CommCounts c = p2p_counts(d, r, pf);
    for (size_t k = 0; k < words.size(); ++k) {
      words[k] += scale * c.words[k];
      messages[k] += scale * c.messages[k];
    }
  }
};

namespace model_detail {

inline double wy_apply_flops(double m, double b, double c) { return 4.0 * m * b * c + b * b * c; }

inline RecursiveCost mlcaqr_recursive(double m, double n, int r, const ValidatedPlatform& pf,
                                      const BlockSchedule& sched) {
  int l = pf.depth();
  RecursiveCost t(l);
  if (r == 0) {
    t.flops = 2.0 * m * n * n - (2.0 / 3.0) * n * n * n;
    return t;
  }
  double b = sched.at(r);
  double pr = pf.level(r).p_rows;
  double pc = pf.level(r).p_cols;
  double lgpr = std::ceil(log2p(pr));
  int npanels = static_cast<int>(n / b);
  for (int s = 1; s <= npanels; ++s) {
    double ms = m - (s - 1) * b;
    double ns = n - s * b;
    double leaf_rows = std::max(ms / pr, b);
    t.add(mlcaqr_recursive(leaf_rows, b, r - 1, pf, sched));
    if (lgpr > 0) {
      t.add_p2p(b * b / 2.0, r, pf, lgpr);
      t.add(mlcaqr_recursive(2.0 * b, b, r - 1, pf, sched), lgpr);
    }
    if (ns > 0) {
      // UPFACT: reflector broadcast along rows + per-node apply
      t.add_p2p(leaf_rows * b, r, pf, std::ceil(log2p(pc)));
      t.flops += wy_apply_flops(leaf_rows, b, ns / pc);
      // UPELIM: pairwise trailing-block exchanges per elimination round
      if (lgpr > 0) {
        t.add_p2p(b * ns / pc, r, pf, lgpr);
        t.flops += lgpr * wy_apply_flops(2.0 * b, b, ns / pc);
      }
    }
  }
  return t;
}

}  // namespace model_detail

/// Appendix-style recursive evaluation of the full ML-CAQR cost.
inline RecursiveCost mlcaqr_recursive_cost(double m, double n, const ValidatedPlatform& pf,
                                           const BlockSchedule& sched) {
  return model_detail::mlcaqr_recursive(m, n, pf.depth(), pf, sched);
}

struct SweepRow {
  Algo algo;
  double n;
  double p_scale;
  ModelReport report;
};

/// Cartesian sweep over matrix orders and top-level grid scalings.
inline std::vector<SweepRow> sweep(Algo algo, const ValidatedPlatform& pf,
                                   const std::vector<double>& n_list,
                                   const std::vector<int>& p_scaling = {1}) {
  std::vector<SweepRow> rows;
  for (int f : p_scaling) {
    PlatformSpec spec = pf.spec();
    LevelSpec& top = spec.levels.back();
    top.p_rows *= f;
    top.p_cols *= f;
    ValidatedPlatform scaled = ValidatedPlatform::validate(spec);
    for (double n : n_list) {
      ModelReport rep;
      switch (algo) {
        case Algo::caqr: rep = onelevel_cost(Algo::caqr, n, scaled); break;
        case Algo::calu: rep = onelevel_cost(Algo::calu, n, scaled); break;
        case Algo::mlcaqr: rep = mlcaqr_cost(n, scaled); break;
        case Algo::mlcalu1d:
        case Algo::mlcalu2d: rep = mlcalu_cost(n, scaled); break;
        case Algo::mlcannon:
          throw PlatformError("mlcannon has no closed-form sweep; use simulate");
      }
      rows.push_back({algo, n, static_cast<double>(f), std::move(rep)});
    }
  }
  return rows;
}

}  // namespace hcpfactor
