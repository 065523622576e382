#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bloch/fields.hpp"

namespace bloch {

struct MetricConfig {
  enum class Kind { flat, transversal };
  Kind kind = Kind::flat;
  ScalarField conformal;                        // c; identically 1 when flat
  std::vector<std::vector<TrigPolynomial>> g0;  // (n-1) x (n-1), empty when flat
};

struct PotentialConfig {
  Potential potential;
  std::string file;  // samples: whitespace separated values, N^n of them
};

struct ExperimentConfig {
  int dimension = 3;
  int grid = 16;
  int J = 16;
  int K = 64;
  int K_max = 4;
  MetricConfig metric;
  PotentialConfig potential;
  std::vector<double> tau;                      // empty: subcommand default
  std::vector<std::vector<double>> theta_path;  // empty: theta1 over [0, 1] in steps of 1/20
  std::uint64_t seed = 1;
  int threads = 1;

  struct Tolerances {
    double zero = 1e-9;
    double quasiperiodicity = 1e-10;
    double unitarity = 1e-10;
    double direct_integral = 1e-8;
    double conformal = 1e-6;
  } tolerances;

  struct Lp {
    int restarts = 20;
    int iterations = 40;
  } lp;

  struct Series {
    int m_max = 100000;
    int m_exact = 240;
  } series;

  struct Bands {
    int count = 8;
    std::vector<int> half_width;  // empty: 3 per axis
  } bands;

  struct Gelfand {
    int cells = 2;
    int samples = 50;
  } gelfand;

  int cluster_max = 20;
  double split_epsilon = 0.0;  // 0: 1/(4 C0) from the measured resolvent bound
  int candidates = 100;
  int descent_steps = 20;
  double factor = 4.0;  // allowed max/min variation across sweeps

  std::string out_dir = "out";
  std::string format = "csv";
};

/// Every schema violation, one "field: message" line each.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Parses, defaults and checks a JSON document. `base_dir` resolves relative
/// file paths. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");

/// Sets a dotted field ("lp.restarts") in the JSON text before parsing; the
/// value is read as JSON when it parses, otherwise as a string.
std::string apply_override(const std::string& json_text, const std::string& path, const std::string& value);

/// Fully defaulted JSON; parse_config(normalized_json(c)) reproduces it.
std::string normalized_json(const ExperimentConfig& c);

/// FNV-1a 64 of normalized_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// "1,2,5,10", "4..64" (doubling) or "4..20:2" (arithmetic).
std::vector<double> parse_tau_list(const std::string& text);

/// Samples of the configured potential on the experiment grid.
std::vector<double> sample_potential(const ExperimentConfig& c);

}  // namespace bloch
