#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "infoop/error.hpp"

namespace infoop::cli {

namespace {

using nlohmann::json;

json to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(to_json(v));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw ConfigError("config", "dates and times are not supported");
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

}  // namespace

ConfigTable::ConfigTable() : ConfigTable(std::make_shared<const json>(json::object()), nullptr, "", nullptr) {
  node_ = root_.get();
}

ConfigTable::ConfigTable(std::shared_ptr<const json> root, const json* node, std::string prefix,
                         std::shared_ptr<std::set<std::string>> used)
    : root_(std::move(root)),
      node_(node),
      prefix_(std::move(prefix)),
      used_(used ? std::move(used) : std::make_shared<std::set<std::string>>()) {}

ConfigTable ConfigTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json root;
  if (ends_with(path, ".json")) {
    try {
      root = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
  } else {
    try {
      root = to_json(toml::parse(buffer.str(), path));
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "invalid TOML at line " << e.source().begin.line << ": " << e.description();
      throw ConfigError("config", msg.str());
    }
  }
  return from_json(std::move(root));
}

ConfigTable ConfigTable::from_json(json root) {
  if (!root.is_object()) throw ConfigError("config", "top level must be a table");
  auto shared = std::make_shared<const json>(std::move(root));
  const json* node = shared.get();
  return ConfigTable(std::move(shared), node, "", nullptr);
}

std::string ConfigTable::path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

const json* ConfigTable::find(const std::string& key) const {
  if (node_ == nullptr) return nullptr;
  const auto it = node_->find(key);
  if (it == node_->end()) return nullptr;
  used_->insert(path(key));
  return &*it;
}

ConfigTable ConfigTable::table(const std::string& key) const {
  const json* v = find(key);
  if (v == nullptr) return ConfigTable(root_, nullptr, path(key), used_);
  if (!v->is_object()) throw ConfigError(path(key), "expected a table");
  return ConfigTable(root_, v, path(key), used_);
}

std::vector<std::string> ConfigTable::keys() const {
  std::vector<std::string> out;
  if (node_ == nullptr) return out;
  for (const auto& item : node_->items()) out.push_back(item.key());
  return out;
}

bool ConfigTable::has(const std::string& key) const { return node_ != nullptr && node_->contains(key); }

double ConfigTable::number(const std::string& key, double fallback) const {
  const json* v = find(key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) throw ConfigError(path(key), "expected a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(path(key), "expected a finite number");
  return x;
}

Index ConfigTable::integer(const std::string& key, Index fallback) const {
  const json* v = find(key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
  return v->get<Index>();
}

std::uint64_t ConfigTable::seed(const std::string& key, std::uint64_t fallback) const {
  const json* v = find(key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
    throw ConfigError(path(key), "expected a nonnegative integer");
  }
  return v->get<std::uint64_t>();
}

std::string ConfigTable::text(const std::string& key, const std::string& fallback) const {
  const json* v = find(key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) throw ConfigError(path(key), "expected a string");
  return v->get<std::string>();
}

std::vector<double> ConfigTable::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const json* v = find(key);
  if (v == nullptr) return fallback;
  if (!v->is_array()) throw ConfigError(path(key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) throw ConfigError(path(key), "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<ConfigTable> ConfigTable::tables(const std::string& key) const {
  const json* v = find(key);
  std::vector<ConfigTable> out;
  if (v == nullptr) return out;
  if (!v->is_array()) throw ConfigError(path(key), "expected an array of tables");
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& item = (*v)[i];
    if (!item.is_object()) throw ConfigError(path(key), "expected an array of tables");
    out.push_back(ConfigTable(root_, &item, path(key) + "[" + std::to_string(i) + "]", used_));
  }
  return out;
}

void ConfigTable::reject_unknown() const {
  if (node_ == nullptr) return;
  for (const auto& [k, v] : node_->items()) {
    const std::string full = path(k);
    if (used_->count(full) == 0) throw ConfigError(full, "unknown key");
    if (v.is_object()) ConfigTable(root_, &v, full, used_).reject_unknown();
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_object()) ConfigTable(root_, &v[i], full + "[" + std::to_string(i) + "]", used_).reject_unknown();
      }
    }
  }
}

}  // namespace infoop::cli
