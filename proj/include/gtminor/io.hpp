#pragma once

/**
 * @file io.hpp
 * @brief CSV sample tables, JSON reports and small argument parsers shared by
 * the command-line front end.
 */

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gt_pattern.hpp"
#include "verify.hpp"

namespace gtminor {

using json = nlohmann::json;

/// Shortest round-trip-safe text: 17 significant digits.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader = "replica,n,k,value\n";

template <class Pattern>
void append_pattern_rows(std::string& out, std::size_t replica, const Pattern& p) {
  for (int n = 1; n <= p.depth(); ++n)
    for (int k = 1; k <= n; ++k) {
      out += std::to_string(replica);
      out += ',';
      out += std::to_string(n);
      out += ',';
      out += std::to_string(k);
      out += ',';
      if constexpr (std::is_integral_v<std::decay_t<decltype(p(n, k))>>)
        out += std::to_string(p(n, k));
      else
        out += format_value(p(n, k));
      out += '\n';
    }
}

/// CSV with header and one row per (replica, n, k), in replica order.
template <class Pattern>
std::string patterns_csv(const std::vector<Pattern>& samples) {
  std::string out = kCsvHeader;
  for (std::size_t i = 0; i < samples.size(); ++i) append_pattern_rows(out, i, samples[i]);
  return out;
}

/// Reads back a replica,n,k,value table into patterns of the given depth.
inline std::vector<GTPattern> read_patterns_csv(std::istream& in, int depth) {
  std::string line;
  if (!std::getline(in, line) || line + "\n" != kCsvHeader)
    throw std::runtime_error("read_patterns_csv: missing header '" + std::string("replica,n,k,value") + "'");
  std::vector<GTPattern> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, v;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') || !std::getline(ss, v))
      throw std::runtime_error("read_patterns_csv: malformed row " + std::to_string(row));
    const std::size_t r = std::stoul(a);
    const int n = std::stoi(b), k = std::stoi(c);
    if (n < 1 || n > depth || k < 1 || k > n)
      throw std::runtime_error("read_patterns_csv: (n,k) out of range on row " + std::to_string(row));
    while (out.size() <= r) out.emplace_back(depth);
    out[r](n, k) = std::stod(v);
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline json to_json(const DistanceReport& r) {
  json j{{"test", r.test}, {"statistic", to_string(r.statistic)}, {"value", r.value}, {"threshold", r.threshold},
         {"pass", r.pass}};
  if (r.lower) j["lower"] = *r.lower;
  return j;
}

inline DistanceReport report_from_json(const json& j) {
  DistanceReport r;
  r.test = j.at("test").get<std::string>();
  r.statistic = parse_statistic(j.at("statistic").get<std::string>());
  r.value = j.at("value").get<double>();
  r.threshold = j.at("threshold").get<double>();
  r.pass = j.at("pass").get<bool>();
  if (j.contains("lower")) r.lower = j.at("lower").get<double>();
  return r;
}

inline bool all_pass(const std::vector<DistanceReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

/// "-1,0,1" -> {-1, 0, 1}.
inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument("not a number: '" + item + "' in list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

/// "a:b:h" -> a, a+h, ..., up to b inclusive (within h·1e-9).
inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
    throw std::invalid_argument("grid must be lo:hi:step with step > 0 and hi >= lo, got '" + s + "'");
  std::vector<double> out;
  const long count = long(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long j = 0; j <= count; ++j) out.push_back(parts[0] + double(j) * parts[2]);
  return out;
}

}  // namespace gtminor
