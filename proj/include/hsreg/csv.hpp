#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "hsreg/errors.hpp"
#include "hsreg/matrix.hpp"
#include "hsreg/model.hpp"

// CSV I/O. Dataset schema: header row, first column the response `y`, the
// remaining columns predictors; UTF-8, '.' decimal separator. Doubles are
// written in shortest round-trip form so exports re-import bit-exactly.

namespace hsreg {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw io_error("failed to parse number '" + tok + "' at " + where);
  }
  return v;
}

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty dataset file: " + path);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2) {
    throw io_error("dataset needs a response column and at least one predictor: " + path);
  }
  const std::size_t p = header.size() - 1;

  std::vector<double> y;
  std::vector<double> xdata;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != p + 1) {
      throw io_error(path + ":" + std::to_string(lineno) + ": expected " +
                     std::to_string(p + 1) + " fields, got " +
                     std::to_string(fields.size()));
    }
    const std::string where = path + ":" + std::to_string(lineno);
    y.push_back(detail::parse_double(fields[0], where));
    for (std::size_t j = 1; j < fields.size(); ++j) {
      xdata.push_back(detail::parse_double(fields[j], where));
    }
  }
  Dataset data;
  data.y = std::move(y);
  data.X.rows = data.y.size();
  data.X.cols = p;
  data.X.data = std::move(xdata);
  data.validate();
  return data;
}

inline void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write dataset file: " + path);
  out << "y";
  for (std::size_t j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << format_double(data.y[i]);
    for (std::size_t j = 0; j < data.p(); ++j) {
      out << ',' << format_double(data.X(i, j));
    }
    out << "\n";
  }
  if (!out) throw io_error("short write to " + path);
}

// Feature-by-sample expression matrix: first column feature ids, header row
// sample ids. Used by the preprocessing pipeline.
struct FeatureMatrix {
  std::vector<std::string> feature_ids;
  std::vector<std::string> sample_ids;
  Matrix values;  // features x samples
};

inline FeatureMatrix read_feature_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open matrix file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty matrix file: " + path);
  auto header = detail::split_csv_line(line);
  if (header.size() < 2) throw io_error("matrix needs id column plus samples: " + path);

  FeatureMatrix fm;
  fm.sample_ids.assign(header.begin() + 1, header.end());
  const std::size_t s = fm.sample_ids.size();
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != s + 1) {
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": ragged matrix row");
    }
    fm.feature_ids.push_back(fields[0]);
    const std::string where = path + ":" + std::to_string(lineno);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      values.push_back(detail::parse_double(fields[j], where));
    }
  }
  fm.values.rows = fm.feature_ids.size();
  fm.values.cols = s;
  fm.values.data = std::move(values);
  return fm;
}

inline void write_feature_matrix_csv(const std::string& path,
                                     const FeatureMatrix& fm) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write matrix file: " + path);
  out << "feature";
  for (const auto& id : fm.sample_ids) out << ',' << id;
  out << "\n";
  for (std::size_t i = 0; i < fm.values.rows; ++i) {
    out << fm.feature_ids[i];
    for (std::size_t j = 0; j < fm.values.cols; ++j) {
      out << ',' << format_double(fm.values(i, j));
    }
    out << "\n";
  }
  if (!out) throw io_error("short write to " + path);
}

}  // namespace hsreg
