#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hcpfactor/ledger.hpp"
#include "hcpfactor/matrix.hpp"
#include "hcpfactor/platform.hpp"

namespace hcpfactor {

inline constexpr int kSchemaVersion = 1;

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline NetworkKind network_from_string(const std::string& s) {
  if (s == "fully_pipelined") return NetworkKind::fully_pipelined;
  if (s == "bufferized") return NetworkKind::bufferized;
  if (s == "forward") return NetworkKind::forward;
  throw IoError("unknown network kind: " + s);
}

/// Platform config: {"gamma", "mem_level1_words", "levels":[{...}]}, levels
/// listed deepest-first. beta_i is derived as 8 / bandwidth in bytes/s.
inline PlatformSpec load_platform_json(const nlohmann::json& j) {
  PlatformSpec spec;
  try {
    spec.gamma = j.at("gamma").get<double>();
    spec.mem_level1_words = j.at("mem_level1_words").get<double>();
    int idx = 1;
    for (const auto& jl : j.at("levels")) {
      LevelSpec lv;
      lv.index = idx++;
      lv.p_rows = jl.at("p_rows").get<int>();
      lv.p_cols = jl.at("p_cols").get<int>();
      lv.alpha = jl.at("alpha_s").get<double>();
      lv.beta = 8.0 / (jl.at("bandwidth_GBps").get<double>() * 1e9);
      lv.buffer_words = jl.at("buffer_words").get<double>();
      lv.network = network_from_string(jl.at("network").get<std::string>());
      spec.levels.push_back(lv);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed platform config: ") + e.what());
  }
  return spec;
}

inline PlatformSpec load_platform_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open platform config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return load_platform_json(j);
}

inline nlohmann::json ledger_to_json(const LedgerTally& t) {
  nlohmann::json levels = nlohmann::json::object();
  for (size_t i = 0; i < t.words.size(); ++i) {
    levels[std::to_string(i + 1)] = {{"words", t.words[i]},
                                     {"messages", t.messages[i]},
                                     {"aggregate_words", t.agg_words[i]}};
  }
  return {{"schema_version", kSchemaVersion},
          {"levels", levels},
          {"flops", t.flops},
          {"aggregate_flops", t.agg_flops}};
}

/// Dense MatrixMarket array format, column-major values per the spec.
inline void write_matrix_market(std::ostream& os, const Mat& a) {
  os << "%%MatrixMarket matrix array real general\n";
  os << a.rows() << " " << a.cols() << "\n";
  os << std::setprecision(17);
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) os << a(i, j) << "\n";
}

inline void write_matrix_market_file(const std::string& path, const Mat& a) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open output file: " + path);
  write_matrix_market(os, a);
}

inline Mat read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty MatrixMarket stream");
  if (line.rfind("%%MatrixMarket", 0) != 0)
    throw IoError("missing MatrixMarket banner");
  {
    std::istringstream hdr(line);
    std::string mm, obj, fmt, field, sym;
    hdr >> mm >> obj >> fmt >> field >> sym;
    if (obj != "matrix" || fmt != "array" || field != "real" || sym != "general")
      throw IoError("unsupported MatrixMarket header: " + line);
  }
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream dims(line);
  int m = 0, n = 0;
  if (!(dims >> m >> n) || m < 1 || n < 1)
    throw IoError("bad MatrixMarket dimensions line: " + line);
  Mat a(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if (!(is >> a(i, j))) throw IoError("truncated MatrixMarket data");
  return a;
}

inline Mat read_matrix_market_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open matrix file: " + path);
  return read_matrix_market(is);
}

}  // namespace hcpfactor
