#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bloch/bloch.h"
#include "json.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string config;
  std::string out;
  std::string format;
  std::string tau;
  std::vector<std::string> set;
  long long seed = -1;
  int threads = 0;
  bool quiet = false;
};

int exit_for(bloch_status s) {
  switch (s) {
    case BLOCH_OK: return kExitPass;
    case BLOCH_ERR_CONFIG:
    case BLOCH_ERR_INVALID_ARGUMENT:
    case BLOCH_ERR_UNKNOWN_SUBCOMMAND: return kExitUsage;
    default: return kExitFail;
  }
}

int report_error(bloch_status s) {
  std::string msg = bloch_last_error();
  std::istringstream lines(msg);
  for (std::string line; std::getline(lines, line);) std::cerr << "error: " << line << "\n";
  if (msg.empty()) std::cerr << "error: status " << s << "\n";
  return exit_for(s);
}

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  ok = static_cast<bool>(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dir_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? "." : path.substr(0, slash);
}

std::string format_number(const nlohmann::json& v) {
  if (v.is_null()) return "-";
  if (v.is_string()) return v.get<std::string>();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
  return buf;
}

void print_reports(const char* report) {
  const auto arr = nlohmann::json::parse(report);
  for (const auto& r : arr) {
    std::string params;
    for (const auto& [k, v] : r["parameters"].items()) params += " " + k + "=" + format_number(v);
    std::cout << (r["pass"].get<bool>() ? "PASS " : "FAIL ") << r["name"].get<std::string>() << params
              << "  measured=" << format_number(r["measured_constant"])
              << "  bound=" << format_number(r["bound_claimed"]) << "\n";
  }
}

int run(const std::string& name, const Options& o) {
  std::string json = "{}";
  std::string base = ".";
  if (!o.config.empty()) {
    bool ok = false;
    json = read_file(o.config, ok);
    if (!ok) {
      std::cerr << "error: config: cannot read '" << o.config << "'\n";
      return kExitUsage;
    }
    base = dir_of(o.config);
  }

  bloch_session* s = nullptr;
  bloch_status st = bloch_session_create(json.c_str(), base.c_str(), &s);
  if (st != BLOCH_OK) return report_error(st);
  struct Guard {
    bloch_session* s;
    ~Guard() { bloch_session_destroy(s); }
  } guard{s};

  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set: expected key=value, got '" << kv << "'\n";
      return kExitUsage;
    }
    if ((st = bloch_session_set(s, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != BLOCH_OK)
      return report_error(st);
  }
  if (!o.tau.empty() && (st = bloch_session_set_tau(s, o.tau.c_str())) != BLOCH_OK) return report_error(st);
  if (o.seed >= 0 && (st = bloch_session_set_seed(s, static_cast<uint64_t>(o.seed))) != BLOCH_OK)
    return report_error(st);
  if (o.threads > 0 && (st = bloch_session_set_threads(s, o.threads)) != BLOCH_OK) return report_error(st);
  if ((!o.out.empty() || !o.format.empty()) &&
      (st = bloch_session_set_output(s, o.out.empty() ? nullptr : o.out.c_str(),
                                     o.format.empty() ? nullptr : o.format.c_str())) != BLOCH_OK)
    return report_error(st);

  if (name == "validate") {
    char* normalized = nullptr;
    char* hash = nullptr;
    if ((st = bloch_session_config(s, &normalized)) != BLOCH_OK) return report_error(st);
    if ((st = bloch_session_hash(s, &hash)) != BLOCH_OK) {
      bloch_string_free(normalized);
      return report_error(st);
    }
    if (!o.quiet) std::cout << normalized << "\n";
    std::cerr << "config ok, hash " << hash << "\n";
    bloch_string_free(normalized);
    bloch_string_free(hash);
    return kExitPass;
  }

  int passed = 0;
  char* report = nullptr;
  if ((st = bloch_session_run(s, name.c_str(), &passed, &report)) != BLOCH_OK) return report_error(st);
  if (!o.quiet) print_reports(report);
  bloch_string_free(report);
  return passed ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet-Bloch estimates on periodic manifolds"};
  app.set_version_flag("--version", std::string(bloch_version()));
  app.require_subcommand(1);

  Options o;
  std::string chosen;
  auto attach = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "JSON configuration file");
    sub->add_option("-o,--out", o.out, "output directory");
    sub->add_option("--format", o.format, "csv or json");
    sub->add_option("--seed", o.seed, "RNG seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tau", o.tau, "1,2,5 | 4..64 (doubling) | 4..20:2");
    sub->add_option("--set", o.set, "dotted field override key=value (repeatable)");
    sub->add_flag("-q,--quiet", o.quiet, "no per-check lines");
    sub->callback([&chosen, sub] { chosen = sub->get_name(); });
  };
  attach(app.add_subcommand("validate", "check a configuration and print it with defaults filled in"));
  for (std::size_t i = 0; i < bloch_subcommand_count(); ++i)
    attach(app.add_subcommand(bloch_subcommand_name(i), "run the experiment"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    return run(chosen, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
