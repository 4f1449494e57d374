#include "infoop/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "infoop/error.hpp"

namespace infoop::io {

std::string format_double(double value) {
  char buffer[40];
  const int written = std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return std::string(buffer, static_cast<std::size_t>(written));
}

void write_matrix_rows(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_operator_csv(std::ostream& out, const InfoOperator& op) {
  out << "# info_operator n=" << op.dim() << '\n';
  write_matrix_rows(out, op.to_dense());
}

nlohmann::json operator_to_json(const InfoOperator& op) {
  const Matrix dense = op.to_dense();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(dense.size()));
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) data.push_back(dense(i, j));
  }
  return {{"n", op.dim()}, {"data", data}, {"labels", op.labels()}};
}

InfoOperator operator_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("data")) {
    throw ConfigError("n", "operator JSON requires 'n' and 'data'");
  }
  const auto n = j.at("n").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (n < 0 || static_cast<Index>(data.size()) != n * n) {
    throw ConfigError("data", "operator JSON data length does not equal n*n");
  }
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < n; ++c) m(i, c) = data[static_cast<std::size_t>(i * n + c)];
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  return InfoOperator::from_dense(std::move(m), std::move(labels));
}

void write_modes_csv(std::ostream& out, const ModeSet& modes) {
  write_matrix_rows(out, modes.eigenvalues.transpose());
  write_matrix_rows(out, modes.modes);
}

nlohmann::json modes_to_json(const ModeSet& modes) {
  nlohmann::json j;
  j["metric_tag"] = std::string(to_string(modes.metric));
  j["eigenvalues"] = std::vector<double>(modes.eigenvalues.data(),
                                         modes.eigenvalues.data() + modes.eigenvalues.size());
  j["residual_norms"] = std::vector<double>(
      modes.residual_norms.data(), modes.residual_norms.data() + modes.residual_norms.size());
  nlohmann::json columns = nlohmann::json::array();
  for (Index c = 0; c < modes.modes.cols(); ++c) {
    const Vector col = modes.modes.col(c);
    columns.push_back(std::vector<double>(col.data(), col.data() + col.size()));
  }
  j["modes"] = std::move(columns);
  return j;
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      if (b == std::string::npos) {
        throw ConfigError("input", "empty field on line " + std::to_string(line_no));
      }
      double value = 0.0;
      const char* begin = field.data() + b;
      const char* end = field.data() + e + 1;
      const auto result = std::from_chars(begin, end, value);
      if (result.ec != std::errc() || result.ptr != end) {
        throw ConfigError("input", "non-numeric field '" + field + "' on line " +
                                       std::to_string(line_no));
      }
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("input", "ragged row on line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace infoop::io
