// hcpfactor: predictions, simulated runs, stability studies, and
// equivalence checks for multilevel communication-avoiding factorizations.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcpfactor/calu.hpp"
#include "hcpfactor/cannon.hpp"
#include "hcpfactor/caqr.hpp"
#include "hcpfactor/cost_model.hpp"
#include "hcpfactor/dense.hpp"
#include "hcpfactor/generators.hpp"
#include "hcpfactor/io.hpp"
#include "hcpfactor/stability.hpp"

namespace {

using namespace hcpfactor;

int log_level() {
  const char* v = std::getenv("HCPFACTOR_LOG");
  return v ? std::atoi(v) : 0;
}

void logv(const std::string& msg) {
  if (log_level() > 0) std::cerr << "[hcpfactor] " << msg << "\n";
}

struct Options {
  std::string platform_path;
  std::string algo = "mlcaqr";
  std::vector<double> n_list;
  std::vector<int> blocks;
  uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  std::string generator = "random_uniform";
};

Algo parse_algo(const std::string& s) {
  if (s == "caqr") return Algo::caqr;
  if (s == "calu") return Algo::calu;
  if (s == "mlcaqr") return Algo::mlcaqr;
  if (s == "mlcalu1d") return Algo::mlcalu1d;
  if (s == "mlcalu2d") return Algo::mlcalu2d;
  if (s == "mlcannon") return Algo::mlcannon;
  throw CLI::ValidationError("--algo", "unknown algorithm: " + s);
}

std::ostream& open_out(const Options& opt, std::ofstream& file) {
  if (opt.out.empty()) return std::cout;
  file.open(opt.out);
  if (!file) throw IoError("cannot open output file: " + opt.out);
  return file;
}

BlockSchedule schedule_for(const Options& opt, double n, const ValidatedPlatform& pf) {
  if (opt.blocks.empty()) return default_blocks(n, pf);
  BlockSchedule s{opt.blocks};
  s.check(static_cast<int>(n), static_cast<int>(n), pf);
  return s;
}

int cmd_predict(const Options& opt) {
  ValidatedPlatform pf = ValidatedPlatform::validate(load_platform_file(opt.platform_path));
  Algo algo = parse_algo(opt.algo);
  std::vector<double> ns = opt.n_list.empty() ? std::vector<double>{4096.0} : opt.n_list;
  std::vector<SweepRow> rows = sweep(algo, pf, ns);
  std::ofstream file;
  std::ostream& os = open_out(opt, file);
  if (opt.format == "json") {
    nlohmann::json out = nlohmann::json::array();
    for (const SweepRow& r : rows)
      for (size_t k = 0; k < r.report.words.size(); ++k)
        out.push_back({{"schema_version", kSchemaVersion},
                       {"n", r.n},
                       {"P", pf.total_nodes() * r.p_scale * r.p_scale},
                       {"level", k + 1},
                       {"words", r.report.words[k]},
                       {"messages", r.report.messages[k]},
                       {"comm_time_s", r.report.comm_time[k]},
                       {"flop_time_s", r.report.flop_time},
                       {"total_time_s", r.report.total_time},
                       {"ccr", r.report.ccr},
                       {"bound_ratio", r.report.bound_ratio[k]}});
    os << out.dump(2) << "\n";
  } else {
    os << "n,P,level,words,messages,comm_time_s,flop_time_s,total_time_s,ccr,bound_ratio\n";
    os.precision(17);
    for (const SweepRow& r : rows)
      for (size_t k = 0; k < r.report.words.size(); ++k)
        os << r.n << ',' << pf.total_nodes() * r.p_scale * r.p_scale << ',' << k + 1 << ','
           << r.report.words[k] << ',' << r.report.messages[k] << ','
           << r.report.comm_time[k] << ',' << r.report.flop_time << ','
           << r.report.total_time << ',' << r.report.ccr << ','
           << r.report.bound_ratio[k] << "\n";
  }
  return 0;
}

int cmd_simulate(const Options& opt) {
  ValidatedPlatform pf = ValidatedPlatform::validate(load_platform_file(opt.platform_path));
  Algo algo = parse_algo(opt.algo);
  int n = opt.n_list.empty() ? 64 : static_cast<int>(opt.n_list.front());
  Mat a = generate({opt.generator, n, opt.seed});
  BlockSchedule sched = schedule_for(opt, n, pf);
  logv("simulate " + opt.algo + " n=" + std::to_string(n));

  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  out["algo"] = opt.algo;
  out["n"] = n;
  if (algo == Algo::mlcaqr || algo == Algo::caqr) {
    QrResult r = ml_caqr(a, pf, sched);
    Mat qr = ml_apply(r.tree, r.r_factor, false);
    out["residual"] = fro_norm(sub(qr, a)) / fro_norm(a);
    out["ledger"] = ledger_to_json(r.ledger->totals());
  } else if (algo == Algo::mlcalu1d || algo == Algo::mlcalu2d || algo == Algo::calu) {
    LuResult r = (algo == Algo::mlcalu2d) ? mlcalu_2d(a, pf, sched) : mlcalu_1d(a, pf, sched);
    Mat pa = r.perm.apply(a);
    out["residual"] = fro_norm(sub(pa, matmul(r.l_factor, r.u_factor))) / fro_norm(a);
    out["ledger"] = ledger_to_json(r.ledger->totals());
    PivotQuality q = pivot_quality(r);
    out["tau_min"] = q.tau_min;
    out["frac_tau_one"] = q.fraction_tau_eq_one;
  } else if (algo == Algo::mlcannon) {
    Mat b = generate({opt.generator, n, opt.seed + 1});
    auto led = std::make_shared<CommLedger>(pf);
    Mat c(n, n);
    c = ml_cannon(c, a, b, pf, pf.depth(), led.get());
    out["residual"] = fro_norm(sub(c, matmul(a, b))) / fro_norm(matmul(a, b));
    out["ledger"] = ledger_to_json(led->totals());
  } else {
    throw CLI::ValidationError("--algo", "simulate does not support " + opt.algo);
  }
  std::ofstream file;
  std::ostream& os = open_out(opt, file);
  os << out.dump(2) << "\n";
  return 0;
}

int cmd_stability(const Options& opt) {
  ValidatedPlatform pf = ValidatedPlatform::validate(load_platform_file(opt.platform_path));
  int n = opt.n_list.empty() ? 256 : static_cast<int>(opt.n_list.front());
  BlockSchedule sched = schedule_for(opt, n, pf);
  bool use_2d = (opt.algo == "mlcalu2d");
  std::vector<MatrixGen> gens;
  for (const std::string& name : generator_names()) gens.push_back({name, n, opt.seed});
  std::vector<StabilityRow> rows = ratio_study(gens, pf, sched, use_2d);
  std::ofstream file;
  std::ostream& os = open_out(opt, file);
  os << stability_csv_header() << "\n";
  for (const StabilityRow& r : rows) os << stability_csv_row(r) << "\n";
  return 0;
}

int cmd_verify(const Options& opt) {
  ValidatedPlatform pf = ValidatedPlatform::validate(load_platform_file(opt.platform_path));
  int n = opt.n_list.empty() ? 64 : static_cast<int>(opt.n_list.front());
  int fails = 0;
  auto report = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "PASS" : "FAIL") << " " << name << " (" << value << ")\n";
    if (!ok) ++fails;
  };

  Mat a = generate({"random_uniform", n, opt.seed});
  BlockSchedule sched = schedule_for(opt, n, pf);

  {  // ML-CAQR against plain Householder QR
    QrResult r = ml_caqr(a, pf, sched);
    Mat qr = ml_apply(r.tree, r.r_factor, false);
    double resid = fro_norm(sub(qr, a)) / fro_norm(a);
    report("mlcaqr_vs_qr_residual", resid < 1e-12, resid);
  }
  {  // ML-CANNON against gemm
    Mat b = generate({"random_uniform", n, opt.seed + 1});
    Mat c(n, n);
    c = ml_cannon(c, a, b, pf, pf.depth(), nullptr);
    double diff = max_abs(sub(c, matmul(a, b))) / max_abs(matmul(a, b));
    report("mlcannon_vs_gemm", diff < 1e-12, diff);
  }
  {  // 1D flattening equivalence against flat CALU
    LuResult ml = mlcalu_1d(a, pf, sched);
    int pr_flat = 1;
    for (int k = 1; k <= pf.depth(); ++k) pr_flat *= pf.level(k).p_rows;
    LuResult flat = calu(a, sched.at(1), pr_flat, 1, pf);
    bool same_perm = ml.perm.map() == flat.perm.map();
    double dl = max_abs(sub(ml.l_factor, flat.l_factor));
    double du = max_abs(sub(ml.u_factor, flat.u_factor));
    double tol = 1e-12 * fro_norm(a);
    report("mlcalu1d_flattening", same_perm && dl <= tol && du <= tol, std::max(dl, du));
  }
  return fails == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilevel communication-avoiding factorization toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool platform_required) {
    auto* p = sub->add_option("--platform", opt.platform_path, "platform config JSON");
    if (platform_required) p->required();
    sub->add_option("--algo", opt.algo, "caqr|calu|mlcaqr|mlcalu1d|mlcalu2d|mlcannon");
    sub->add_option("--n", opt.n_list, "matrix order(s)")->delimiter(',');
    sub->add_option("--blocks", opt.blocks, "panel widths b_1,..,b_l")->delimiter(',');
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--out", opt.out, "output path (default stdout)");
    sub->add_option("--format", opt.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--generator", opt.generator, "test matrix generator");
  };

  CLI::App* predict = app.add_subcommand("predict", "analytical cost model sweep");
  CLI::App* simulate = app.add_subcommand("simulate", "run an algorithm on the vmachine");
  CLI::App* stability = app.add_subcommand("stability", "ratio study against GEPP");
  CLI::App* verify = app.add_subcommand("verify", "equivalence oracles, PASS/FAIL");
  for (CLI::App* sub : {predict, simulate, stability, verify}) add_common(sub, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (predict->parsed()) return cmd_predict(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (stability->parsed()) return cmd_stability(opt);
    if (verify->parsed()) return cmd_verify(opt);
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.get_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PlatformError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedOrder& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
