// grid.cpp - CSV/JSON serialization of signal grids
#include "pcc/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pcc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

namespace {

std::string to_csv(const SignalGrid& g) {
  std::string out;
  for (const auto& kv : g.metadata)
    out += "# " + kv.first + "=" + kv.second + "\n";
  out += g.axis1.name;
  if (g.two_d()) out += "," + g.axis2.name;
  out += ",value\n";
  for (std::size_t i = 0; i < g.rows(); ++i) {
    if (g.two_d()) {
      for (std::size_t j = 0; j < g.cols(); ++j)
        out += format_double(g.axis1.values[i]) + "," +
               format_double(g.axis2.values[j]) + "," +
               format_double(g.at(i, j)) + "\n";
    } else {
      out += format_double(g.axis1.values[i]) + "," + format_double(g.values[i]) +
             "\n";
    }
  }
  return out;
}

std::string to_json(const SignalGrid& g) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json meta;
  for (const auto& kv : g.metadata) meta[kv.first] = kv.second;
  j["metadata"] = meta;
  j["axis1"] = {{"name", g.axis1.name}, {"values", g.axis1.values}};
  if (g.two_d()) j["axis2"] = {{"name", g.axis2.name}, {"values", g.axis2.values}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < g.rows(); ++i) {
    if (g.two_d()) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::size_t jx = 0; jx < g.cols(); ++jx) row.push_back(g.at(i, jx));
      rows.push_back(row);
    } else {
      rows.push_back(g.values[i]);
    }
  }
  j["values"] = rows;
  return j.dump(2) + "\n";  // NaN dumps as null
}

SignalGrid from_json(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  SignalGrid g;
  for (auto& kv : j.at("metadata").items())
    g.add_meta(kv.key(), kv.value().get<std::string>());
  g.axis1.name = j.at("axis1").at("name").get<std::string>();
  for (auto& v : j.at("axis1").at("values"))
    g.axis1.values.push_back(v.is_null() ? std::nan("") : v.get<double>());
  if (j.contains("axis2")) {
    g.axis2.name = j.at("axis2").at("name").get<std::string>();
    for (auto& v : j.at("axis2").at("values"))
      g.axis2.values.push_back(v.is_null() ? std::nan("") : v.get<double>());
  }
  for (auto& row : j.at("values")) {
    if (row.is_array()) {
      for (auto& v : row)
        g.values.push_back(v.is_null() ? std::nan("") : v.get<double>());
    } else {
      g.values.push_back(row.is_null() ? std::nan("") : row.get<double>());
    }
  }
  return g;
}

double parse_cell(const std::string& s) {
  if (s == "nan") return std::nan("");
  return std::stod(s);
}

SignalGrid from_csv(const std::string& text) {
  SignalGrid g;
  std::istringstream in(text);
  std::string line;
  bool header_done = false;
  std::vector<std::string> names;
  std::vector<double> a1_seen, a2_seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      auto eq = body.find('=');
      if (eq != std::string::npos)
        g.add_meta(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      auto c = line.find(',', pos);
      cells.push_back(line.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (!header_done) {
      names = cells;
      if (names.size() < 2 || names.back() != "value")
        throw std::runtime_error("grid CSV header must end in 'value'");
      g.axis1.name = names[0];
      if (names.size() == 3) g.axis2.name = names[1];
      header_done = true;
      continue;
    }
    if (cells.size() != names.size())
      throw std::runtime_error("grid CSV row width mismatch");
    double a1 = parse_cell(cells[0]);
    if (a1_seen.empty() || a1_seen.back() != a1) a1_seen.push_back(a1);
    if (names.size() == 3) {
      double a2 = parse_cell(cells[1]);
      if (a1_seen.size() == 1) a2_seen.push_back(a2);
    }
    g.values.push_back(parse_cell(cells.back()));
  }
  g.axis1.values = a1_seen;
  g.axis2.values = a2_seen;
  if (!header_done) throw std::runtime_error("grid CSV has no header row");
  std::size_t expect = g.rows() * g.cols();
  if (g.values.size() != expect)
    throw std::runtime_error("grid CSV is not a complete row-major grid");
  return g;
}

}  // namespace

std::string grid_to_string(const SignalGrid& g, GridFormat fmt) {
  return fmt == GridFormat::Csv ? to_csv(g) : to_json(g);
}

void write_grid(const SignalGrid& g, const std::string& path, GridFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << grid_to_string(g, fmt);
}

SignalGrid parse_grid(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') continue;
    return c == '{' ? from_json(text) : from_csv(text);
  }
  throw std::runtime_error("empty grid file");
}

SignalGrid read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str());
}

}  // namespace pcc
