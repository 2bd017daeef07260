#pragma once

// Design file format: a JSON object
//   {"t": 3, "d": 3, "n": 11, "mode": "weighted", "entries": [...]}
// where entries holds V in row-major order, each number printed with 17
// significant digits so that loading restores every double exactly. An
// optional "meta" object carries solver diagnostics.

#include "tdesign/core.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tdesign {

struct DesignFile {
  Configuration config;
  std::optional<int> t;
  nlohmann::json meta;  // null when absent
};

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_design_json(const Configuration& config, std::optional<int> t = std::nullopt,
                                  const nlohmann::json& meta = nullptr) {
  std::ostringstream out;
  out << "{\n";
  if (t) out << "  \"t\": " << *t << ",\n";
  out << "  \"d\": " << config.dim() << ",\n";
  out << "  \"n\": " << config.size() << ",\n";
  out << "  \"mode\": \"" << to_string(config.mode()) << "\",\n";
  out << "  \"entries\": [";
  const Matrix& V = config.entries();
  for (int i = 0; i < config.dim(); ++i) {
    out << (i == 0 ? "\n    " : ",\n    ");
    for (int j = 0; j < config.size(); ++j) {
      if (j > 0) out << ", ";
      out << format_double(V(i, j));
    }
  }
  out << "\n  ]";
  if (!meta.is_null()) out << ",\n  \"meta\": " << meta.dump();
  out << "\n}\n";
  return out.str();
}

inline DesignFile parse_design_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("malformed design file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("d") || !doc.contains("n") || !doc.contains("entries")) {
    throw std::runtime_error("design file needs fields d, n, entries");
  }
  const int d = doc.at("d").get<int>();
  const int n = doc.at("n").get<int>();
  const auto& entries = doc.at("entries");
  if (d < 1 || n < 1 || !entries.is_array() ||
      entries.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(n)) {
    throw std::runtime_error("design file entries must hold d*n numbers");
  }
  const NormMode mode = parse_norm_mode(doc.value("mode", std::string("weighted")));

  Matrix V(d, n);
  for (int k = 0; k < d * n; ++k) {
    const auto& e = entries[static_cast<std::size_t>(k)];
    if (!e.is_number()) throw std::runtime_error("design file entries must be numbers");
    V(k / n, k % n) = e.get<double>();
  }

  DesignFile file{Configuration(V, mode), std::nullopt, nullptr};
  if (doc.contains("t") && !doc.at("t").is_null()) file.t = doc.at("t").get<int>();
  if (doc.contains("meta")) file.meta = doc.at("meta");
  return file;
}

inline DesignFile load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open design file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_design_json(buffer.str());
}

inline void save_design(const std::string& path, const Configuration& config,
                        std::optional<int> t = std::nullopt, const nlohmann::json& meta = nullptr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write design file '" + path + "'");
  out << to_design_json(config, t, meta);
}

}  // namespace tdesign
