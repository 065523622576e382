#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bloch/estimates.hpp"
#include "bloch/gelfand.hpp"
#include "bloch/resolvent.hpp"

namespace bloch {

/// Rows of formatted cells under fixed column names.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void add(std::vector<std::string> cells);
  /// Shortest round-trip decimal for doubles.
  static std::string cell(double x);
  static std::string cell(long long x);
  static std::string cell(int x) { return cell(static_cast<long long>(x)); }
  static std::string cell(bool x) { return x ? "true" : "false"; }

  std::string csv() const;
  /// Array of objects; cells that parse as numbers or booleans are emitted unquoted.
  std::string json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// i_1..i_n (grid indices), re, im
Table grid_function_table(const TorusGrid& grid, std::span<const cplx> values);
/// row, col, re, im
Table operator_table(const Eigen::MatrixXcd& m);
/// tau, m, value, tail_bound, scaled (= value |tau|)
Table series_table(const std::vector<SeriesReport>& reports);
/// theta_1..theta_n, band_index, re_lambda, im_lambda
Table bands_table(const std::vector<BandRow>& rows);
/// tau, sigma_min, truncation_J, truncation_K
Table thomas_table(const ThomasScan& scan);

std::string reports_json(const std::vector<EstimateReport>& reports);

struct Manifest {
  std::string config_hash;
  std::string version;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::string subcommand;
  std::vector<std::string> artifacts;
};
std::string manifest_json(const Manifest& m);

/// UTC ISO 8601 with seconds.
std::string utc_timestamp();

/// Writes `table` as <dir>/<stem>.csv or .json; returns the file name.
std::string write_table(const Table& table, const std::string& dir, const std::string& stem,
                        const std::string& format);
void write_text(const std::string& path, const std::string& text);

}  // namespace bloch
