#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "infoop/info_operator.hpp"

namespace infoop::cli {

// Read-only view of one table of a TOML or JSON configuration. Every key that
// is read is recorded, so that leftovers can be reported as unknown.
class ConfigTable {
 public:
  ConfigTable();

  // TOML unless the file ends in .json. Parse failures are ConfigError("config").
  static ConfigTable load(const std::string& path);
  static ConfigTable from_json(nlohmann::json root);

  // Sub-table; empty if absent.
  ConfigTable table(const std::string& key) const;

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  Index integer(const std::string& key, Index fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  // Top-level key names of this table.
  std::vector<std::string> keys() const;
  // Array of tables.
  std::vector<ConfigTable> tables(const std::string& key) const;

  // Throws ConfigError naming the first key of this table (or its sub-tables)
  // that was never read.
  void reject_unknown() const;

  // Dotted name of key inside this table.
  std::string path(const std::string& key) const;

 private:
  ConfigTable(std::shared_ptr<const nlohmann::json> root, const nlohmann::json* node, std::string prefix,
              std::shared_ptr<std::set<std::string>> used);
  const nlohmann::json* find(const std::string& key) const;

  std::shared_ptr<const nlohmann::json> root_;
  const nlohmann::json* node_;
  std::string prefix_;
  std::shared_ptr<std::set<std::string>> used_;
};

}  // namespace infoop::cli
