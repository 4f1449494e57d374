#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "infoop/info_operator.hpp"

namespace infoop::cli {

// Flag values; unset flags fall back to the config file, then to defaults.
struct Options {
  std::string command;
  std::optional<std::string> config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<Index> k;
  std::optional<double> tau;
  std::optional<double> rho;
  std::optional<std::string> blocks;
  std::optional<std::string> grid;
  std::optional<std::string> input;
  std::optional<std::string> metric;
  std::optional<Index> interest;
};

// Raised when the output directory or one of its files cannot be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Files written into the output directory, in emission order.
class Artifacts {
 public:
  explicit Artifacts(std::string dir);

  const std::string& dir() const noexcept { return dir_; }
  // Creates the directory and checks that it is writable; idempotent.
  void open();
  void write(const std::string& file, const std::string& content, const std::string& format,
             const std::string& description);
  const nlohmann::json& list() const noexcept { return list_; }

 private:
  std::string dir_;
  bool opened_ = false;
  nlohmann::json list_ = nlohmann::json::array();
};

// What a command reports back: the effective parameters (echoed into the
// manifest) and a short summary printed to stdout.
struct CommandResult {
  nlohmann::json echo;
  nlohmann::json summary;
};

// Each command reads and validates its section, opens the output directory
// before any heavy work, and writes its artifacts.
CommandResult beam_analytic(const Options& opt, const ConfigTable& section, Artifacts& art);
CommandResult beam_two_span(const Options& opt, const ConfigTable& section, Artifacts& art);
CommandResult fuse_benchmark(const Options& opt, const ConfigTable& section, Artifacts& art);
CommandResult damage2d(const Options& opt, const ConfigTable& section, Artifacts& art);
CommandResult modes(const Options& opt, const ConfigTable& section, Artifacts& art);
CommandResult weak_gain(const Options& opt, const ConfigTable& section, Artifacts& art);
CommandResult schur(const Options& opt, const ConfigTable& section, Artifacts& art);

// CSV helpers shared by the commands.
std::string csv_rows(const Matrix& m);
std::string field_csv(const Vector& field, Index ny, Index nx);

}  // namespace infoop::cli
