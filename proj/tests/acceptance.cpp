// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hcpfactor/calu.hpp"
#include "hcpfactor/cannon.hpp"
#include "hcpfactor/caqr.hpp"
#include "hcpfactor/cost_model.hpp"
#include "hcpfactor/generators.hpp"
#include "hcpfactor/io.hpp"
#include "hcpfactor/stability.hpp"

using namespace hcpfactor;

namespace {

int failures = 0;

void report(int idx, bool ok, const std::string& what) {
  std::printf("%s criterion-%d %s\n", ok ? "PASS" : "FAIL", idx, what.c_str());
  if (!ok) ++failures;
}

ValidatedPlatform one_level(int pr, int pc) {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e8;
  s.levels.push_back({1, pr, pc, 1e-9, 1e-10, 1e8, NetworkKind::fully_pipelined});
  return ValidatedPlatform::validate(s);
}

ValidatedPlatform two_level(int pr1, int pc1, int pr2, int pc2) {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e8;
  s.levels.push_back({1, pr1, pc1, 1e-9, 1e-10, 1e8, NetworkKind::fully_pipelined});
  s.levels.push_back(
      {2, pr2, pc2, 1e-7, 1e-9, 1e8 * pr1 * pc1, NetworkKind::fully_pipelined});
  return ValidatedPlatform::validate(s);
}

ValidatedPlatform three_level(int pr3 = 2, int pc3 = 2) {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e8;
  s.levels.push_back({1, 2, 2, 1e-9, 1e-10, 1e8, NetworkKind::fully_pipelined});
  s.levels.push_back({2, 2, 2, 1e-7, 1e-9, 4e8, NetworkKind::fully_pipelined});
  s.levels.push_back({3, pr3, pc3, 1e-6, 1e-8, 16e8, NetworkKind::fully_pipelined});
  return ValidatedPlatform::validate(s);
}

double lu_residual(const Mat& a, const LuResult& r) {
  return fro_norm(sub(r.perm.apply(a), matmul(r.l_factor, r.u_factor))) / fro_norm(a);
}

// --- 1: 1D flattening -------------------------------------------------------

void criterion1() {
  ValidatedPlatform pf = two_level(2, 2, 2, 2);
  BlockSchedule sched({4, 8});
  bool ok = true;
  std::string detail;
  for (unsigned long seed = 0; seed < 20 && ok; ++seed) {
    Mat a = generate({"random_uniform", 64, seed});
    LuResult ml = mlcalu_1d(a, pf, sched);
    LuResult flat = calu(a, 4, 4, 2, pf);
    double tol = 1e-12 * fro_norm(a);
    if (ml.perm.map() != flat.perm.map()) {
      ok = false;
      detail = "permutation mismatch at seed " + std::to_string(seed);
    } else if (max_abs(sub(ml.l_factor, flat.l_factor)) > tol ||
               max_abs(sub(ml.u_factor, flat.u_factor)) > tol) {
      ok = false;
      detail = "factor mismatch at seed " + std::to_string(seed);
    }
  }
  report(1, ok, "1d-flattening: 20 seeds, multilevel vs flat tournament" +
                    (detail.empty() ? "" : " (" + detail + ")"));
}

// --- 2: residuals across sizes and depths -----------------------------------

void criterion2() {
  std::vector<ValidatedPlatform> pfs = {one_level(2, 2), two_level(2, 2, 2, 2),
                                        three_level()};
  std::vector<BlockSchedule> scheds = {BlockSchedule({4}), BlockSchedule({4, 8}),
                                       BlockSchedule({4, 8, 16})};
  bool ok = true;
  std::string detail;
  double worst_qr = 0.0, worst_lu = 0.0;
  for (int li = 0; li < 3 && ok; ++li) {
    for (int n : {32, 64, 128}) {
      Mat a = generate({"random_normal", n, 7u + static_cast<unsigned long>(n + li)});
      QrResult qr = ml_caqr(a, pfs[li], scheds[li]);
      Mat q = ml_apply(qr.tree, Mat::identity(n), false);
      double res = fro_norm(sub(a, matmul(q, qr.r_factor))) / fro_norm(a);
      double orth = fro_norm(sub(matmul(q.transposed(), q), Mat::identity(n)));
      worst_qr = std::max(worst_qr, std::max(res, orth));
      double r1 = lu_residual(a, mlcalu_1d(a, pfs[li], scheds[li]));
      double r2 = lu_residual(a, mlcalu_2d(a, pfs[li], scheds[li]));
      worst_lu = std::max(worst_lu, std::max(r1, r2));
      if (res > 1e-12 || orth > 1e-12 || r1 > 1e-11 || r2 > 1e-11) {
        ok = false;
        detail = " (failed at depth " + std::to_string(li + 1) + ", n=" +
                 std::to_string(n) + ")";
        break;
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "residuals: worst qr %.2e, worst lu %.2e",
                worst_qr, worst_lu);
  report(2, ok, buf + detail);
}

// --- 3: ml_cannon vs dense multiply -----------------------------------------

void criterion3() {
  std::vector<ValidatedPlatform> pfs = {one_level(2, 2), two_level(2, 2, 2, 2)};
  bool ok = true;
  double worst = 0.0;
  for (int li = 0; li < 2; ++li) {
    for (int n : {8, 16, 32}) {
      Mat a = generate({"random_uniform", n, 11u});
      Mat b = generate({"random_normal", n, 13u});
      Mat c = generate({"random_uniform", n, 17u});
      Mat want = gemm(a, b, c, 1.0, 1.0);
      Mat got = ml_cannon(c, a, b, pfs[li], li + 1);
      double err = fro_norm(sub(got, want));
      double tol = 1e-12 * n * fro_norm(a) * fro_norm(b);
      worst = std::max(worst, err / tol);
      if (err > tol) ok = false;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "ml_cannon vs dense multiply: worst error %.2e of tolerance", worst);
  report(3, ok, buf);
}

// --- 4: per-level volume chain on full runs ---------------------------------

void criterion4() {
  ValidatedPlatform pf = two_level(2, 2, 2, 2);
  BlockSchedule sched({4, 8});
  bool ok = true;
  std::string detail = "volume chain held on every transfer";
  long long events = 0;
  try {
    Mat a = generate({"random_normal", 64, 21u});
    QrResult qr = ml_caqr(a, pf, sched);
    LuResult lu = mlcalu_2d(a, pf, sched);
    events = qr.ledger->p2p_events() + lu.ledger->p2p_events();
    if (events <= 0) {
      ok = false;
      detail = "no transfers were recorded";
    }
  } catch (const PlatformError& e) {
    ok = false;
    detail = std::string("chain violated: ") + e.what();
  }
  report(4, ok, detail + " (" + std::to_string(events) + " transfers checked)");
}

// --- 5: simulation within 2x of the recursive bound -------------------------

void criterion5() {
  ValidatedPlatform pf = two_level(2, 2, 2, 2);
  BlockSchedule sched({4, 8});
  Mat a = generate({"random_normal", 128, 29u});
  QrResult qr = ml_caqr(a, pf, sched);
  RecursiveCost bound = mlcaqr_recursive_cost(128, 128, pf, sched);
  const LedgerTally& t = qr.ledger->totals();
  bool ok = true;
  char buf[160];
  double r1 = bound.words[0] > 0 ? t.words[0] / bound.words[0] : 0.0;
  double r2 = bound.words[1] > 0 ? t.words[1] / bound.words[1] : 0.0;
  for (int k = 0; k < pf.depth(); ++k)
    if (t.words[k] > 2.0 * bound.words[k]) ok = false;
  std::snprintf(buf, sizeof(buf),
                "simulated/bound words per level: %.3f, %.3f (cap 2.0)", r1, r2);
  report(5, ok, buf);
}

// --- 6: one-level collapse --------------------------------------------------

void criterion6() {
  ValidatedPlatform pf = one_level(2, 2);
  BlockSchedule sched({4});
  Mat a = generate({"random_uniform", 32, 31u});
  bool ok = true;
  std::string detail = "depth-1 multilevel runs are bitwise the flat algorithms";

  QrResult ml_qr = ml_caqr(a, pf, sched);
  QrResult flat_qr = caqr(a, pf, 4);
  if (ml_qr.r_factor.data() != flat_qr.r_factor.data() ||
      ml_qr.ledger->totals().words != flat_qr.ledger->totals().words ||
      ml_qr.ledger->totals().messages != flat_qr.ledger->totals().messages ||
      ml_qr.ledger->totals().flops != flat_qr.ledger->totals().flops) {
    ok = false;
    detail = "qr collapse mismatch";
  }

  LuResult flat_lu = calu(a, 4, 2, 2, pf);
  for (bool use_2d : {false, true}) {
    LuResult ml = use_2d ? mlcalu_2d(a, pf, sched) : mlcalu_1d(a, pf, sched);
    if (ml.perm.map() != flat_lu.perm.map() ||
        ml.l_factor.data() != flat_lu.l_factor.data() ||
        ml.u_factor.data() != flat_lu.u_factor.data()) {
      ok = false;
      detail = use_2d ? "2d lu collapse mismatch" : "1d lu collapse mismatch";
    }
  }
  report(6, ok, detail);
}

// --- 7: analytical model vs lower bounds at scale ---------------------------

void criterion7() {
  ValidatedPlatform pf = ValidatedPlatform::validate(
      load_platform_file(std::string(DATA_DIR) + "/exascale.json"));
  double n = 1048576.0;  // 2^20
  ModelReport ml = mlcaqr_cost(n, pf);
  ModelReport flat = onelevel_cost(Algo::caqr, n, pf);
  double polylog = 1.0;
  for (int k = 1; k <= pf.depth(); ++k) {
    double p = static_cast<double>(pf.level(k).p_rows) * pf.level(k).p_cols;
    double lg = std::log2(p);
    polylog *= lg * lg;
  }
  bool ok = true;
  std::string ratios;
  for (int k = 0; k < pf.depth(); ++k) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%.1f", k ? ", " : "", ml.bound_ratio[k]);
    ratios += buf;
    if (ml.bound_ratio[k] < 1.0 || ml.bound_ratio[k] > polylog) ok = false;
  }
  double speedup = flat.total_time / ml.total_time;
  if (!(ml.ccr <= flat.ccr)) ok = false;
  if (!(speedup > 1.0)) ok = false;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "exascale n=2^20: bound ratios [%s] (cap %.0f), ccr %.3f vs %.3f, "
                "speedup %.2fx",
                ratios.c_str(), polylog, ml.ccr, flat.ccr, speedup);
  report(7, ok, buf);
}

// --- 8: stability vs partial pivoting across generators ---------------------

void criterion8() {
  ValidatedPlatform pf = three_level(4, 2);
  BlockSchedule sched({8, 16, 32});
  std::vector<MatrixGen> gens;
  for (const std::string& name : generator_names()) gens.push_back({name, 256, 123u});
  std::vector<StabilityRow> rows = ratio_study(gens, pf, sched, true);
  int in_range = 0, total = 0;
  bool tau_ok = true;
  double tau_min = 1.0, frac_one_min = 1.0;
  for (const StabilityRow& r : rows) {
    for (double ratio : {r.growth_ratio, r.normwise_ratio, r.componentwise_ratio,
                         r.factor_rel_ratio}) {
      ++total;
      if (ratio >= 1e-3 && ratio <= 10.0) ++in_range;
    }
    if (!(r.tau_min > 0.0 && r.tau_min <= 1.0)) tau_ok = false;
    tau_min = std::min(tau_min, r.tau_min);
    frac_one_min = std::min(frac_one_min, r.frac_tau_one);
  }
  bool ok = tau_ok && in_range * 10 >= total * 9;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "stability ratios: %d/%d in [1e-3,10]; tau_min %.3g, "
                "min frac(tau=1) %.2f",
                in_range, total, tau_min, frac_one_min);
  report(8, ok, buf);
}

// --- 9: latency lower bound at full memory ----------------------------------

void criterion9() {
  const double n = 1024.0;
  const int p = 64;  // 8x8 grid, B_1 = M_1 = n^2/P
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = n * n / p;
  s.levels.push_back({1, 8, 8, 1e-9, 1e-10, n * n / p, NetworkKind::fully_pipelined});
  ValidatedPlatform pf = ValidatedPlatform::validate(s);
  LowerBounds b = lower_bounds(n, 1, pf);
  double want = std::sqrt(static_cast<double>(p));
  bool ok = std::abs(b.messages_bound - want) <=
            std::abs(want) * std::numeric_limits<double>::epsilon();
  char buf[96];
  std::snprintf(buf, sizeof(buf), "messages bound %.17g vs sqrt(P) %.17g",
                b.messages_bound, want);
  report(9, ok, buf);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (failures) std::printf("%d criteria FAILED\n", failures);
  else std::printf("all 9 criteria passed\n");
  return failures == 0 ? 0 : 1;
}
