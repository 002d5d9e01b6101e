#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shrinkage_lab/io.hpp"

namespace shrinkage_lab::cli {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kNumerical = 3 };

struct RunSpec {
  std::string command;
  Json params = Json::object();
  std::string output_path;  ///< empty: artifact goes to stdout, no sidecar
  std::string format = "csv";
};

/// Reads command parameters, records the resolved value of every key
/// (defaults included) and rejects keys nobody asked for.
class Params {
 public:
  explicit Params(Json given);

  bool has(const std::string& key) const;
  double real(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt);
  std::uint64_t seed(const std::string& key, std::uint64_t fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  std::vector<double> reals(const std::string& key,
                            std::optional<std::vector<double>> fallback = std::nullopt);
  Json raw(const std::string& key, std::optional<Json> fallback = std::nullopt);

  /// Overrides the resolved value of a key already read.
  void record(const std::string& key, Json value) { resolved_[key] = std::move(value); }

  /// Throws ConfigError naming the first unrecognised key.
  void finish() const;
  const Json& resolved() const noexcept { return resolved_; }

 private:
  const Json* lookup(const std::string& key);

  Json given_;
  Json resolved_ = Json::object();
  std::set<std::string> used_;
};

class Log {
 public:
  Log(std::ostream& out, bool quiet) : out_(out), quiet_(quiet) {}
  void stage(const std::string& what) const;

 private:
  std::ostream& out_;
  bool quiet_;
};

struct Artifact {
  Table table;
  Json info = Json::object();
};

struct Command {
  std::string name;
  std::string summary;
  /// Validates every parameter and returns the computation to run.
  std::function<std::function<Artifact(const Log&)>(Params&)> prepare;
};

const std::vector<Command>& commands();
std::string usage();

/// Executes one run. Errors are reported as a single JSON line on `err`.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err, bool quiet = false);
/// As run(), refusing to write over any of `inputs`.
int run_checked(const RunSpec& spec, const std::vector<std::string>& inputs, std::ostream& out,
                std::ostream& err, bool quiet = false);

/// Full command-line entry point.
int main(int argc, char** argv);

}  // namespace shrinkage_lab::cli
