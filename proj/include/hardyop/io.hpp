#pragma once

// Tables written as CSV (with '#' provenance header lines) or JSON (meta + row objects).
// Numbers use %.17g; nothing time- or host-dependent is written.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hardyop/errors.hpp"

namespace hardyop::io {

using json = nlohmann::json;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width mismatch in " + name);
    rows.push_back(std::move(row));
  }
};

using Meta = std::vector<std::pair<std::string, json>>;

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return s;
}

// Non-finite doubles become strings so JSON output stays lossless and valid.
inline json json_cell(const json& v) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) return format_number(d);
  }
  if (v.is_array()) {
    json out = json::array();
    for (const auto& e : v) out.push_back(json_cell(e));
    return out;
  }
  return v;
}

inline void write_csv(std::ostream& os, const Table& t, const Meta& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : json_cell(v).dump()) << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
    os << "\n";
  }
}

inline void write_json(std::ostream& os, const Table& t, const Meta& meta) {
  json m = json::object();
  for (const auto& [k, v] : meta) m[k] = json_cell(v);
  json rows = json::array();
  for (const auto& r : t.rows) {
    json o = json::object();
    for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = json_cell(r[i]);
    rows.push_back(std::move(o));
  }
  json doc = {{"table", t.name}, {"meta", m}, {"columns", t.columns}, {"rows", rows}};
  os << doc.dump(2) << "\n";
}

/// Writes <dir>/<name>.<format>, or to stdout when dir is empty.
inline void emit(const Table& t, const Meta& meta, const std::string& format, const std::string& dir) {
  auto write = [&](std::ostream& os) {
    if (format == "json")
      write_json(os, t, meta);
    else
      write_csv(os, t, meta);
  };
  if (dir.empty()) {
    write(std::cout);
    return;
  }
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / (t.name + (format == "json" ? ".json" : ".csv"));
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write(out);
}

}  // namespace hardyop::io
