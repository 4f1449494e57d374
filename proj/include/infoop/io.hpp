#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "infoop/info_operator.hpp"
#include "infoop/spectral.hpp"

namespace infoop::io {

/// Formats a double with 17 significant digits (lossless round trip).
std::string format_double(double value);

/// Writes a row-major matrix, one comma-separated row per line.
void write_matrix_rows(std::ostream& out, const Matrix& m);

/// CSV with header `# info_operator n=<n>` followed by the dense rows.
void write_operator_csv(std::ostream& out, const InfoOperator& op);

/// {"n": n, "data": [row-major], "labels": [...]}.
nlohmann::json operator_to_json(const InfoOperator& op);
InfoOperator operator_from_json(const nlohmann::json& j);

/// First row eigenvalues, then one row per parameter component (k columns).
void write_modes_csv(std::ostream& out, const ModeSet& modes);
nlohmann::json modes_to_json(const ModeSet& modes);

/// Reads a square or rectangular numeric CSV. Lines starting with '#' are
/// skipped. Throws ConfigError on ragged or non-numeric input.
Matrix read_matrix_csv(std::istream& in);

/// Writes `text` to `path`, throwing std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace infoop::io
