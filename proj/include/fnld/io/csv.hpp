#pragma once

// CSV round-trip for grids and fields. Numbers are written with
// std::to_chars (shortest representation that parses back to the same
// double) and read with std::from_chars, so write-then-read is exact.

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

namespace fnld::io {

inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
  // from_chars rejects leading whitespace and '+'; trim the former, the
  // latter is not something we ever write
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("parse_double: not a number: '" + std::string(s) + "'");
  return x;
}

// matrix as plain CSV, one row per line
inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_matrix_csv: write failed for " + path);
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::size_t end = (comma == std::string::npos) ? line.size() : comma;
      row.push_back(parse_double(std::string_view(line).substr(pos, end - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("read_matrix_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_matrix_csv: empty file " + path);
  Eigen::MatrixXd M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

// columns with a header line, for kernel tables and similar dumps
inline void write_columns_csv(const std::string& path, const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& cols) {
  if (names.size() != cols.size())
    throw std::invalid_argument("write_columns_csv: name/column count mismatch");
  if (cols.empty()) throw std::invalid_argument("write_columns_csv: no columns");
  for (const auto& c : cols)
    if (c.size() != cols.front().size())
      throw std::invalid_argument("write_columns_csv: column lengths differ");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_columns_csv: cannot open " + path);
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j > 0) out << ',';
    out << names[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < cols.front().size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j > 0) out << ',';
      out << format_double(cols[j][i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_columns_csv: write failed for " + path);
}

}  // namespace fnld::io
