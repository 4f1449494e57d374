#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "infoop/error.hpp"
#include "infoop/io.hpp"

namespace infoop::cli {

namespace fs = std::filesystem;

Artifacts::Artifacts(std::string dir) : dir_(std::move(dir)) {}

void Artifacts::open() {
  if (opened_) return;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw OutputError("cannot create output directory '" + dir_ + "': " + ec.message());
  const fs::path probe = fs::path(dir_) / ".write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw OutputError("output directory '" + dir_ + "' is not writable");
  }
  fs::remove(probe, ec);
  opened_ = true;
}

void Artifacts::write(const std::string& file, const std::string& content, const std::string& format,
                      const std::string& description) {
  open();
  const fs::path path = fs::path(dir_) / file;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  f << content;
  f.close();
  if (!f) throw OutputError("cannot write '" + path.string() + "'");
  list_.push_back({{"file", file}, {"format", format}, {"description", description}});
}

std::string csv_rows(const Matrix& m) {
  std::ostringstream s;
  io::write_matrix_rows(s, m);
  return s.str();
}

std::string field_csv(const Vector& field, Index ny, Index nx) {
  if (field.size() != ny * nx) throw DimensionError("field size does not match the grid");
  std::ostringstream s;
  s << "# field ny=" << ny << " nx=" << nx << '\n';
  io::write_matrix_rows(s, field.reshaped<Eigen::RowMajor>(ny, nx));
  return s.str();
}

namespace {

using Handler = CommandResult (*)(const Options&, const ConfigTable&, Artifacts&);

struct CommandInfo {
  const char* section;
  const char* help;
  Handler handler;
};

const std::map<std::string, CommandInfo>& registry() {
  static const std::map<std::string, CommandInfo> commands{
      {"beam-analytic", {"beam", "closed-form single-span rotation-sensor kernel, density and modes", beam_analytic}},
      {"beam-two-span", {"two_span", "finite-element two-span kernel and density", beam_two_span}},
      {"fuse-benchmark", {"fusion", "static/dynamic/hybrid flexural-rigidity identification", fuse_benchmark}},
      {"damage2d", {"damage2d", "plane-stress damage field reconstruction in the leading modes", damage2d}},
      {"modes", {"modes", "eigenmodes of an information operator read from CSV", modes}},
      {"weak-gain", {"weak_gain", "weak-direction gain of candidate tilt sensors", weak_gain}},
      {"schur", {"schur", "nuisance-eliminated information of a joint operator read from CSV", schur}},
  };
  return commands;
}

template <class T>
void optional_flag(CLI::App* sub, const std::string& name, std::optional<T>& target, const std::string& help) {
  sub->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

int execute(const Options& opt, std::ostream& out) {
  const CommandInfo& info = registry().at(opt.command);
  const ConfigTable root = opt.config_path ? ConfigTable::load(*opt.config_path) : ConfigTable();
  for (const std::string& key : root.keys()) {
    bool known = false;
    for (const auto& [name, other] : registry()) known = known || key == other.section;
    if (!known) throw ConfigError(key, "unknown section");
  }
  const ConfigTable section = root.table(info.section);

  Artifacts art(opt.out);
  const CommandResult result = info.handler(opt, section, art);

  nlohmann::json manifest;
  manifest["command"] = opt.command;
  manifest["config_path"] = opt.config_path ? nlohmann::json(*opt.config_path) : nlohmann::json(nullptr);
  manifest["seed"] = result.echo.contains("seed") ? result.echo.at("seed") : nlohmann::json(nullptr);
  manifest["output_dir"] = opt.out;
  manifest["version"] = kVersion;
  nlohmann::json artifacts = art.list();
  artifacts.push_back({{"file", "manifest.json"}, {"format", "json"}, {"description", "this manifest"}});
  manifest["artifacts"] = artifacts;
  manifest["config"] = nlohmann::json{{info.section, result.echo}};
  art.write("manifest.json", manifest.dump(2) + "\n", "json", "this manifest");
  out << result.summary.dump(2) << '\n';
  return ExitCode::ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local information operators for structural inverse problems", "infoop"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  Options opt;
  for (const auto& [name, info] : registry()) {
    CLI::App* sub = app.add_subcommand(name, info.help);
    sub->callback([&opt, n = name] { opt.command = n; });
    optional_flag(sub, "--config", opt.config_path, "TOML or JSON configuration file");
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    if (name == "fuse-benchmark" || name == "damage2d") {
      optional_flag(sub, "--seed", opt.seed, "noise seed");
    }
    if (name == "beam-analytic" || name == "damage2d" || name == "modes") {
      optional_flag(sub, "--k", opt.k, "number of modes");
    }
    if (name == "beam-analytic" || name == "beam-two-span") {
      optional_flag(sub, "--rho", opt.rho, "sensor position as a fraction of the length");
      optional_flag(sub, "--grid", opt.grid, "grid or element count");
    }
    if (name == "damage2d") optional_flag(sub, "--grid", opt.grid, "cells as <ny>x<nx>");
    if (name == "fuse-benchmark") optional_flag(sub, "--blocks", opt.blocks, "static|dynamic|hybrid");
    if (name == "modes" || name == "weak-gain") optional_flag(sub, "--tau", opt.tau, "eigenvalue threshold");
    if (name == "modes" || name == "schur") optional_flag(sub, "--input", opt.input, "operator CSV");
    if (name == "modes") optional_flag(sub, "--metric", opt.metric, "euclidean|mass|prior");
    if (name == "schur") optional_flag(sub, "--interest", opt.interest, "number of parameters of interest");
  }

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::config_error;
  }

  try {
    return execute(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << '\n';
    return ExitCode::output_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::failure;
  }
}

}  // namespace infoop::cli
