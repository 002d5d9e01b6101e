#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cli/cli.hpp"
#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/parallel.hpp"

namespace shrinkage_lab::cli {

namespace {

namespace fs = std::filesystem;

void report(std::ostream& err, const std::string& kind, const std::string& message,
            const std::string& command) {
  Json j = {{"error", kind}, {"message", message}};
  if (!command.empty()) j["command"] = command;
  err << j.dump() << '\n' << std::flush;
}

const Command* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

bool same_file(const std::string& a, const std::string& b) {
  std::error_code ec;
  return fs::exists(a, ec) && fs::exists(b, ec) && fs::equivalent(a, b, ec);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out.flush()) throw ConfigError("failed writing \"" + path + "\"");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config \"" + path + "\"");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config \"" + path + "\" is not valid JSON: " + e.what());
  }
}

// value of --set / extra flags: JSON when it parses, a plain string otherwise
Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return text;
  }
}

std::string key_name(std::string key) {
  for (char& c : key)
    if (c == '-') c = '_';
  return key;
}

}  // namespace

std::string usage() {
  std::ostringstream out;
  out << "usage: shrinkage-lab <command> [--config FILE] [--set KEY=VALUE]... [--KEY VALUE]...\n"
         "                     [--output PATH] [--format csv|json] [--threads N] [--quiet]\n\n"
         "commands:\n";
  for (const auto& c : commands()) {
    out << "  " << c.name;
    for (std::size_t i = c.name.size(); i < 20; ++i) out << ' ';
    out << c.summary << '\n';
  }
  out << "\nParameters come from a JSON config (flat, or {\"command\", \"params\", ...}) and are\n"
         "overridden by --set or --KEY flags. A file output gets a sidecar <output>.config.json\n"
         "that reproduces it. Exit status: 0 ok, 2 configuration error, 3 numerical failure.\n";
  return out.str();
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err, bool quiet) {
  return run_checked(spec, {}, out, err, quiet);
}

int run_checked(const RunSpec& spec, const std::vector<std::string>& inputs, std::ostream& out,
                std::ostream& err, bool quiet) {
  const Log log(err, quiet);
  try {
    const Command* cmd = find_command(spec.command);
    if (!cmd) throw ConfigError("unknown command \"" + spec.command + "\"");
    if (spec.format != "csv" && spec.format != "json")
      throw ConfigError("format must be \"csv\" or \"json\"");
    for (const auto& in : inputs)
      if (!spec.output_path.empty() && same_file(in, spec.output_path))
        throw ConfigError("output \"" + spec.output_path + "\" would overwrite an input file");

    Params params(spec.params);
    const auto prepared = cmd->prepare(params);
    params.finish();

    Artifact artifact = prepared(log);
    if (!artifact.info.empty()) log.stage("summary " + artifact.info.dump());

    std::ostringstream body;
    if (spec.format == "csv") {
      artifact.table.write_csv(body);
    } else {
      Json doc = {{"command", spec.command}};
      const Json table = artifact.table.to_json();
      for (const auto& [k, v] : table.items()) doc[k] = v;
      doc["info"] = artifact.info;
      body << doc.dump(2) << '\n';
    }

    if (spec.output_path.empty()) {
      out << body.str() << std::flush;
      return kOk;
    }
    write_file(spec.output_path, body.str());
    const Json sidecar = {{"command", spec.command},
                          {"format", spec.format},
                          {"output", spec.output_path},
                          {"params", params.resolved()}};
    const std::string sidecar_path = spec.output_path + ".config.json";
    bool is_input = false;
    for (const auto& in : inputs) is_input = is_input || same_file(in, sidecar_path);
    if (is_input)
      log.stage("sidecar " + sidecar_path + " is the input config; left untouched");
    else
      write_file(sidecar_path, sidecar.dump(2) + "\n");
    log.stage("wrote " + spec.output_path);
    return kOk;
  } catch (const ConfigError& e) {
    report(err, "config", e.what(), spec.command);
    return kConfig;
  } catch (const DomainError& e) {
    report(err, "domain", e.what(), spec.command);
    return kNumerical;
  } catch (const EvaluationError& e) {
    report(err, "evaluation", e.what(), spec.command);
    return kNumerical;
  } catch (const ConvergenceError& e) {
    report(err, "convergence", e.what(), spec.command);
    return kNumerical;
  } catch (const Error& e) {
    report(err, "numerical", e.what(), spec.command);
    return kNumerical;
  } catch (const std::exception& e) {
    report(err, "internal", e.what(), spec.command);
    return kInternal;
  }
}

int main(int argc, char** argv) {
  if (argc <= 1) {
    std::cerr << usage();
    return kConfig;
  }

  // --KEY VALUE / --KEY=VALUE for anything that is not a fixed option becomes
  // --set KEY=VALUE, so a parameter value is never taken for the command
  static const std::set<std::string> fixed = {"--config", "--set", "--output", "--format",
                                              "--threads", "--quiet", "--help"};
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  std::vector<std::string> rewritten;
  while (!args.empty()) {
    std::string a = std::move(args.back());
    args.pop_back();
    const auto eq = a.find('=');
    const std::string name = a.substr(0, eq);
    if (a.rfind("--", 0) != 0 || a.size() < 3 || fixed.count(name)) {
      rewritten.push_back(std::move(a));
      continue;
    }
    if (eq != std::string::npos) {
      rewritten.insert(rewritten.end(), {"--set", key_name(name.substr(2)) + "=" + a.substr(eq + 1)});
    } else if (args.empty()) {
      report(std::cerr, "config", "flag \"" + a + "\" needs a value", "");
      return kConfig;
    } else {
      rewritten.insert(rewritten.end(), {"--set", key_name(a.substr(2)) + "=" + args.back()});
      args.pop_back();
    }
  }

  CLI::App app{"Spectral shrinkage laboratory", "shrinkage-lab"};
  std::string command, config_path, output, format, threads;
  std::vector<std::string> sets;
  bool quiet = false;
  app.add_option("command", command, "command to run");
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("-s,--set", sets, "override KEY=VALUE (VALUE parsed as JSON when possible)");
  app.add_option("-o,--output", output, "artifact path (default: stdout, no sidecar)");
  app.add_option("-f,--format", format, "csv or json");
  app.add_option("-j,--threads", threads, "worker thread cap");
  app.add_flag("-q,--quiet", quiet, "no stage log on stderr");
  app.set_help_flag("-h,--help", "print this help");
  app.footer(usage());

  try {
    std::reverse(rewritten.begin(), rewritten.end());
    app.parse(rewritten);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    report(std::cerr, "config", e.what(), command);
    return kConfig;
  }

  RunSpec spec;
  std::vector<std::string> inputs;
  try {
    if (!config_path.empty()) {
      inputs.push_back(config_path);
      Json cfg = read_json_file(config_path);
      if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
      auto take_string = [&](const char* key, std::string& into) {
        if (!cfg.contains(key)) return;
        if (!cfg[key].is_string()) throw ConfigError(std::string("config \"") + key + "\" must be a string");
        into = cfg[key].get<std::string>();
        cfg.erase(key);
      };
      take_string("command", spec.command);
      take_string("output", spec.output_path);
      take_string("format", spec.format);
      if (cfg.contains("params")) {
        if (!cfg["params"].is_object() || cfg.size() != 1)
          throw ConfigError("config with \"params\" may only add \"command\", \"output\" and \"format\"");
        spec.params = cfg["params"];
      } else {
        spec.params = cfg;
      }
    }
    if (!command.empty()) spec.command = command;
    if (!output.empty()) spec.output_path = output;
    if (!format.empty()) spec.format = format;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects KEY=VALUE, got \"" + s + "\"");
      spec.params[key_name(s.substr(0, eq))] = parse_value(s.substr(eq + 1));
    }
    if (spec.command.empty()) {
      std::cerr << usage();
      report(std::cerr, "config", "no command given", "");
      return kConfig;
    }
    if (threads.empty())
      if (const char* env = std::getenv("SHRINKAGE_LAB_THREADS")) threads = env;
    if (!threads.empty()) {
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(threads, &used);
        if (used != threads.size()) n = 0;
      } catch (const std::exception&) {
      }
      if (n < 1) throw ConfigError("thread count must be a positive integer, got \"" + threads + "\"");
      set_thread_count(n);
    }
  } catch (const ConfigError& e) {
    report(std::cerr, "config", e.what(), spec.command);
    return kConfig;
  }
  return run_checked(spec, inputs, std::cout, std::cerr, quiet);
}

}  // namespace shrinkage_lab::cli
