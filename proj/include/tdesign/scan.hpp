#pragma once

// Sweeps over n for fixed (t, d, mode): best potential per n over a
// multi-start, jump and special-zero detection, CSV persistence.

#include "tdesign/core.hpp"
#include "tdesign/io.hpp"
#include "tdesign/manifold_opt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdesign {

struct ScanRecord {
  int t = 1, d = 1, n = 1;
  NormMode mode = NormMode::EqualNorm;
  double best_f = 0.0;
  int restarts_used = 0;
  double wall_seconds = 0.0;
  bool is_zero = false;

  bool operator==(const ScanRecord&) const = default;
};

struct ScanMetadata {
  std::uint64_t seed = 0;
  int restarts = 20;
  double zero_factor = kZeroFactor;
  SolverOptions options;
};

struct ScanTable {
  std::vector<ScanRecord> records;  // increasing n
  ScanMetadata meta;

  const ScanRecord* find(int n) const {
    for (const auto& r : records) {
      if (r.n == n) return &r;
    }
    return nullptr;
  }
  bool contiguous() const {
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].n != records[i - 1].n + 1) return false;
    }
    return true;
  }
};

struct ScanOptions {
  int restarts = 20;
  SolverOptions solver;
  double zero_factor = kZeroFactor;
  // Double the restarts once when best_f lands in [1e-12·n², 1e-6·n²].
  bool escalate = true;
  int threads = 1;
  std::function<void(const ScanRecord&)> progress;  // called after each n
};

inline ScanRecord scan_point(int t, int d, int n, NormMode mode, const ScanOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("scan needs restarts >= 1");
  const DesignProblem problem(t, d, n, mode);
  const auto start = std::chrono::steady_clock::now();
  MultiStartResult ms = multi_start(problem, options.restarts, options.solver, options.threads);
  double best = ms.best.f_value;
  int used = options.restarts;
  const double nn = static_cast<double>(n) * n;
  if (options.escalate && best >= 1e-12 * nn && best <= 1e-6 * nn) {
    // Seeds seed+R .. seed+2R-1, so the escalated run covers a superset of seeds.
    SolverOptions more = options.solver;
    more.seed += static_cast<std::uint64_t>(options.restarts);
    best = std::min(best, multi_start(problem, options.restarts, more, options.threads).best.f_value);
    used *= 2;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {t, d, n, mode, best, used, seconds, best <= options.zero_factor * nn};
}

/// One record per n in [n_from, n_to]. Records already present in `resume`
/// (same t, d, mode) are reused rather than recomputed.
inline ScanTable scan_n_range(int t, int d, NormMode mode, int n_from, int n_to, const ScanOptions& options,
                              const ScanTable* resume = nullptr) {
  if (n_from < 1 || n_from > n_to) throw std::invalid_argument("scan needs 1 <= n_from <= n_to");
  if (options.restarts < 1) throw std::invalid_argument("scan needs restarts >= 1");
  options.solver.validate();
  ScanTable table;
  table.meta = {options.solver.seed, options.restarts, options.zero_factor, options.solver};
  for (int n = n_from; n <= n_to; ++n) {
    const ScanRecord* old = resume ? resume->find(n) : nullptr;
    if (old && old->t == t && old->d == d && old->mode == mode) {
      table.records.push_back(*old);
    } else {
      table.records.push_back(scan_point(t, d, n, mode, options));
    }
    if (options.progress) options.progress(table.records.back());
  }
  return table;
}

/// Binary search for the jump, assuming zeros are monotone in n on
/// [n_from, n_to]. The returned table holds only the evaluated n, sorted.
inline ScanTable scan_bisect(int t, int d, NormMode mode, int n_from, int n_to, const ScanOptions& options) {
  if (n_from < 1 || n_from > n_to) throw std::invalid_argument("scan needs 1 <= n_from <= n_to");
  std::map<int, ScanRecord> seen;
  auto eval = [&](int n) -> bool {
    auto it = seen.find(n);
    if (it == seen.end()) {
      it = seen.emplace(n, scan_point(t, d, n, mode, options)).first;
      if (options.progress) options.progress(it->second);
    }
    return it->second.is_zero;
  };
  if (eval(n_to) && !eval(n_from)) {
    int lo = n_from, hi = n_to;  // lo nonzero, hi zero
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (eval(mid) ? hi : lo) = mid;
    }
  }
  ScanTable table;
  table.meta = {options.solver.seed, options.restarts, options.zero_factor, options.solver};
  for (auto& [n, r] : seen) table.records.push_back(r);
  return table;
}

namespace detail {
inline bool zero_at(const ScanRecord& r, double zero_factor) {
  return r.best_f <= zero_factor * static_cast<double>(r.n) * r.n;
}
}  // namespace detail

/// Smallest n such that it and every larger n in the table are zeros.
inline std::optional<int> detect_jump(const ScanTable& table, double zero_factor = kZeroFactor) {
  if (table.records.empty()) throw std::invalid_argument("detect_jump needs a nonempty table");
  std::optional<int> jump;
  for (auto it = table.records.rbegin(); it != table.records.rend(); ++it) {
    if (!detail::zero_at(*it, zero_factor)) break;
    jump = it->n;
  }
  return jump;
}

/// Zeros whose successor n+1 in the table is not a zero.
inline std::vector<int> detect_special(const ScanTable& table, double zero_factor = kZeroFactor) {
  if (table.records.empty()) throw std::invalid_argument("detect_special needs a nonempty table");
  std::vector<int> out;
  for (const auto& r : table.records) {
    const ScanRecord* next = table.find(r.n + 1);
    if (next && detail::zero_at(r, zero_factor) && !detail::zero_at(*next, zero_factor)) out.push_back(r.n);
  }
  return out;
}

/// Zero at n but at neither n-1 nor n+1.
inline bool exceptional_check(const ScanTable& table, int n, double zero_factor = kZeroFactor) {
  const ScanRecord *lo = table.find(n - 1), *mid = table.find(n), *hi = table.find(n + 1);
  if (!lo || !mid || !hi) {
    throw std::invalid_argument("exceptional_check needs records for n-1, n and n+1 (n = " +
                                std::to_string(n) + ")");
  }
  return detail::zero_at(*mid, zero_factor) && !detail::zero_at(*lo, zero_factor) &&
         !detail::zero_at(*hi, zero_factor);
}

// ---------------------------------------------------------------------------
// Persistence: CSV plus a JSON sidecar (<csv>.json) for the metadata.

inline constexpr const char* kScanCsvHeader = "t,d,n,mode,best_f,restarts_used,wall_seconds,is_zero";

inline std::string scan_to_csv(const ScanTable& table) {
  std::vector<ScanRecord> rows = table.records;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  std::ostringstream out;
  out << kScanCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.t << ',' << r.d << ',' << r.n << ',' << to_string(r.mode) << ',' << format_double(r.best_f) << ','
        << r.restarts_used << ',' << format_double(r.wall_seconds) << ',' << (r.is_zero ? "true" : "false")
        << '\n';
  }
  return out.str();
}

inline nlohmann::json scan_metadata_json(const ScanMetadata& m) {
  return {{"seed", m.seed},
          {"restarts", m.restarts},
          {"zero_factor", m.zero_factor},
          {"options",
           {{"max_iterations", m.options.max_iterations},
            {"gradient_tolerance", m.options.gradient_tolerance},
            {"initial_trust_radius_factor", m.options.initial_trust_radius_factor},
            {"polish_iterations", m.options.polish_iterations},
            {"zero_threshold", m.options.zero_threshold ? nlohmann::json(*m.options.zero_threshold)
                                                        : nlohmann::json(nullptr)}}}};
}

inline ScanMetadata scan_metadata_from_json(const nlohmann::json& j) {
  ScanMetadata m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.restarts = j.at("restarts").get<int>();
    m.zero_factor = j.at("zero_factor").get<double>();
    const auto& o = j.at("options");
    m.options.max_iterations = o.at("max_iterations").get<int>();
    m.options.gradient_tolerance = o.at("gradient_tolerance").get<double>();
    m.options.initial_trust_radius_factor = o.at("initial_trust_radius_factor").get<double>();
    m.options.polish_iterations = o.at("polish_iterations").get<int>();
    if (!o.at("zero_threshold").is_null()) m.options.zero_threshold = o.at("zero_threshold").get<double>();
    m.options.seed = m.seed;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed scan metadata: ") + e.what());
  }
  return m;
}

inline std::vector<ScanRecord> parse_scan_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kScanCsvHeader) {
    throw std::runtime_error("scan CSV must start with header '" + std::string(kScanCsvHeader) + "'");
  }
  std::vector<ScanRecord> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    auto bad = [&](const std::string& why) {
      return std::runtime_error("scan CSV line " + std::to_string(lineno) + ": " + why);
    };
    if (f.size() != 8) throw bad("expected 8 fields");
    ScanRecord r;
    try {
      std::size_t pos = 0;
      auto integer = [&](const std::string& s) {
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
      };
      auto real = [&](const std::string& s) {
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
      };
      r.t = integer(f[0]);
      r.d = integer(f[1]);
      r.n = integer(f[2]);
      r.mode = parse_norm_mode(f[3]);
      r.best_f = real(f[4]);
      r.restarts_used = integer(f[5]);
      r.wall_seconds = real(f[6]);
    } catch (const std::exception& e) {
      throw bad(std::string("bad field (") + e.what() + ")");
    }
    if (f[7] == "true") {
      r.is_zero = true;
    } else if (f[7] != "false") {
      throw bad("is_zero must be true or false");
    }
    if (!rows.empty() && r.n <= rows.back().n) throw bad("rows must be sorted by increasing n");
    rows.push_back(r);
  }
  return rows;
}

inline void save_scan(const std::string& csv_path, const ScanTable& table) {
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write scan file '" + csv_path + "'");
    out << scan_to_csv(table);
  }
  std::ofstream side(csv_path + ".json");
  if (!side) throw std::runtime_error("cannot write scan metadata '" + csv_path + ".json'");
  side << scan_metadata_json(table.meta).dump(2) << '\n';
}

/// The sidecar is optional; without it the metadata keeps its defaults.
inline ScanTable load_scan(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open scan file '" + csv_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ScanTable table;
  table.records = parse_scan_csv(buf.str());
  std::ifstream side(csv_path + ".json");
  if (side) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(side);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(std::string("malformed scan metadata: ") + e.what());
    }
    table.meta = scan_metadata_from_json(j);
  }
  return table;
}

}  // namespace tdesign
