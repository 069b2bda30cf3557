#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hcpfactor/calu.hpp"
#include "hcpfactor/dense.hpp"
#include "hcpfactor/generators.hpp"
#include "hcpfactor/matrix.hpp"
#include "hcpfactor/platform.hpp"
#include "hcpfactor/schedule.hpp"

namespace hcpfactor {

struct BackwardErrors {
  double normwise = 0.0;
  double componentwise = 0.0;
  double factor_relative = 0.0;
  bool componentwise_skipped = false;  // every row had |A||x|+|b| == 0
};

/// Solve P A x = P b through the computed factors: L y = (P b), U x = y.
inline std::vector<double> lu_solve(const Perm& perm, const Mat& l, const Mat& u,
                                    const std::vector<double>& b) {
  const int n = l.rows();
  if (static_cast<int>(b.size()) != n) throw DimensionMismatch("lu_solve rhs size");
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = b[perm.map()[i]];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) y[i] -= l(i, j) * y[j];
  std::vector<double> x = y;
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= u(i, j) * x[j];
    x[i] /= u(i, i);
  }
  return x;
}

inline BackwardErrors backward_errors(const Mat& a, const Perm& perm, const Mat& l,
                                      const Mat& u, const std::vector<double>& x,
                                      const std::vector<double>& b) {
  const int n = a.rows();
  BackwardErrors e;

  // ||PA - LU||_F / ||A||_F
  Mat pa = perm.apply(a);
  Mat lu = matmul(l, u);
  e.factor_relative = fro_norm(sub(pa, lu)) / fro_norm(a);

  double a_inf = 0.0;  // ||A||_inf (max row sum)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::abs(a(i, j));
    a_inf = std::max(a_inf, s);
  }
  double x_inf = 0.0, b_inf = 0.0;
  for (int i = 0; i < n; ++i) {
    x_inf = std::max(x_inf, std::abs(x[i]));
    b_inf = std::max(b_inf, std::abs(b[i]));
  }

  double r_inf = 0.0, comp = 0.0;
  bool any_comp = false;
  for (int i = 0; i < n; ++i) {
    double ax = 0.0, absax = 0.0;
    for (int j = 0; j < n; ++j) {
      ax += a(i, j) * x[j];
      absax += std::abs(a(i, j)) * std::abs(x[j]);
    }
    double ri = std::abs(b[i] - ax);
    r_inf = std::max(r_inf, ri);
    double denom = absax + std::abs(b[i]);
    if (denom > 0.0) {
      comp = std::max(comp, ri / denom);
      any_comp = true;
    }
  }
  double ndenom = a_inf * x_inf + b_inf;
  e.normwise = (ndenom > 0.0) ? r_inf / ndenom : 0.0;
  e.componentwise = comp;
  e.componentwise_skipped = !any_comp;
  return e;
}

/// Element growth observed during elimination, >= 1 by construction.
inline double growth_factor(const Mat& a, const std::vector<double>& trace) {
  double a_max = max_abs(a);
  if (a_max == 0.0) return 1.0;
  double peak = a_max;
  for (double v : trace) peak = std::max(peak, v);
  return peak / a_max;
}

struct StabilityRow {
  std::string matrix;
  int n = 0;
  std::string algo;
  double growth_ml = 0.0, growth_gepp = 0.0, growth_ratio = 0.0;
  double normwise_ml = 0.0, normwise_gepp = 0.0, normwise_ratio = 0.0;
  double componentwise_ml = 0.0, componentwise_gepp = 0.0, componentwise_ratio = 0.0;
  double factor_rel_ml = 0.0, factor_rel_gepp = 0.0, factor_rel_ratio = 0.0;
  double tau_min = 1.0;
  double frac_tau_one = 1.0;
};

namespace stab_detail {

inline double ratio(double num, double den) {
  if (num == den) return 1.0;  // covers the exact-zero / exact-zero case
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace stab_detail

/// Compare a multilevel CALU factorization against plain GEPP on one matrix.
inline StabilityRow compare_vs_gepp(const MatrixGen& g, const ValidatedPlatform& pf,
                                    const BlockSchedule& sched, bool use_2d) {
  Mat a = generate(g);
  const int n = a.rows();

  LuResult ml = use_2d ? mlcalu_2d(a, pf, sched) : mlcalu_1d(a, pf, sched);
  GeppResult ref = gepp(a);

  std::vector<double> b(n);
  Rng rng(g.seed ^ 0x9e3779b97f4a7c15ull);
  for (double& v : b) v = rng.uniform_sym();

  std::vector<double> x_ml = lu_solve(ml.perm, ml.l_factor, ml.u_factor, b);
  std::vector<double> x_ref = lu_solve(ref.perm, ref.l, ref.u, b);
  BackwardErrors e_ml = backward_errors(a, ml.perm, ml.l_factor, ml.u_factor, x_ml, b);
  BackwardErrors e_ref = backward_errors(a, ref.perm, ref.l, ref.u, x_ref, b);

  StabilityRow row;
  row.matrix = g.name;
  row.n = n;
  row.algo = use_2d ? "mlcalu2d" : "mlcalu1d";
  row.growth_ml = growth_factor(a, ml.growth_trace);
  row.growth_gepp = growth_factor(a, ref.growth_trace);
  row.growth_ratio = stab_detail::ratio(row.growth_ml, row.growth_gepp);
  row.normwise_ml = e_ml.normwise;
  row.normwise_gepp = e_ref.normwise;
  row.normwise_ratio = stab_detail::ratio(e_ml.normwise, e_ref.normwise);
  row.componentwise_ml = e_ml.componentwise;
  row.componentwise_gepp = e_ref.componentwise;
  row.componentwise_ratio = stab_detail::ratio(e_ml.componentwise, e_ref.componentwise);
  row.factor_rel_ml = e_ml.factor_relative;
  row.factor_rel_gepp = e_ref.factor_relative;
  row.factor_rel_ratio = stab_detail::ratio(e_ml.factor_relative, e_ref.factor_relative);

  PivotQuality q = pivot_quality(ml);
  row.tau_min = q.tau_min;
  row.frac_tau_one = q.fraction_tau_eq_one;
  return row;
}

inline std::vector<StabilityRow> ratio_study(const std::vector<MatrixGen>& gens,
                                             const ValidatedPlatform& pf,
                                             const BlockSchedule& sched, bool use_2d) {
  std::vector<StabilityRow> rows;
  rows.reserve(gens.size());
  for (const MatrixGen& g : gens) rows.push_back(compare_vs_gepp(g, pf, sched, use_2d));
  return rows;
}

inline std::string stability_csv_header() {
  return "matrix,n,algo,growth,nwise,cwise,rel,growth_ratio,nwise_ratio,"
         "cwise_ratio,rel_ratio,tau_min,frac_tau_one";
}

inline std::string stability_csv_row(const StabilityRow& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.matrix << ',' << r.n << ',' << r.algo << ',' << r.growth_ml << ','
     << r.normwise_ml << ',' << r.componentwise_ml << ',' << r.factor_rel_ml << ','
     << r.growth_ratio << ',' << r.normwise_ratio << ',' << r.componentwise_ratio << ','
     << r.factor_rel_ratio << ',' << r.tau_min << ',' << r.frac_tau_one;
  return os.str();
}

}  // namespace hcpfactor
