#include "bloch/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace bloch {

using nlohmann::json;

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("Table::add: cell count does not match the columns");
  rows_.push_back(std::move(cells));
}

std::string Table::cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string Table::cell(long long x) { return std::to_string(x); }

std::string Table::csv() const {
  std::string s;
  for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
  s += "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
    s += "\n";
  }
  return s;
}

std::string Table::json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows_) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string& c = r[i];
      if (c == "true" || c == "false") {
        o[columns_[i]] = c == "true";
        continue;
      }
      double x = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), x);
      if (res.ec == std::errc() && res.ptr == c.data() + c.size() && std::isfinite(x)) o[columns_[i]] = x;
      else o[columns_[i]] = c;
    }
    arr.push_back(o);
  }
  return arr.dump(2) + "\n";
}

Table grid_function_table(const TorusGrid& grid, std::span<const cplx> values) {
  if (values.size() != grid.size()) throw std::invalid_argument("grid_function_table: size mismatch");
  std::vector<std::string> cols;
  for (int a = 0; a < grid.dim(); ++a) cols.push_back("i_" + std::to_string(a + 1));
  cols.push_back("re");
  cols.push_back("im");
  Table t(cols);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row;
    for (int v : grid.multi_index(i)) row.push_back(Table::cell(v));
    row.push_back(Table::cell(values[i].real()));
    row.push_back(Table::cell(values[i].imag()));
    t.add(std::move(row));
  }
  return t;
}

Table operator_table(const Eigen::MatrixXcd& m) {
  Table t({"row", "col", "re", "im"});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      t.add({Table::cell(static_cast<long long>(i)), Table::cell(static_cast<long long>(j)),
             Table::cell(m(i, j).real()), Table::cell(m(i, j).imag())});
  return t;
}

Table series_table(const std::vector<SeriesReport>& reports) {
  Table t({"tau", "m", "value", "tail_bound", "scaled"});
  for (const auto& r : reports)
    t.add({Table::cell(r.tau), Table::cell(r.m_max), Table::cell(r.truncated_sum), Table::cell(r.tail_bound),
           Table::cell(r.truncated_sum * std::abs(r.tau))});
  return t;
}

Table bands_table(const std::vector<BandRow>& rows) {
  const std::size_t n = rows.empty() ? 0 : rows.front().theta.size();
  std::vector<std::string> cols;
  for (std::size_t a = 0; a < n; ++a) cols.push_back("theta_" + std::to_string(a + 1));
  cols.insert(cols.end(), {"band_index", "re_lambda", "im_lambda"});
  Table t(cols);
  for (const auto& r : rows)
    for (std::size_t b = 0; b < r.values.size(); ++b) {
      std::vector<std::string> row;
      for (double x : r.theta) row.push_back(Table::cell(x));
      row.push_back(Table::cell(static_cast<long long>(b)));
      row.push_back(Table::cell(r.values[b].real()));
      row.push_back(Table::cell(r.values[b].imag()));
      t.add(std::move(row));
    }
  return t;
}

Table thomas_table(const ThomasScan& scan) {
  Table t({"tau", "sigma_min", "truncation_J", "truncation_K"});
  for (const auto& r : scan.rows)
    t.add({Table::cell(r.tau), Table::cell(r.sigma_min), Table::cell(r.truncation_j), Table::cell(r.truncation_k)});
  return t;
}

namespace {

// JSON has no infinities; they become strings.
nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return Table::cell(x);
}

}  // namespace

std::string reports_json(const std::vector<EstimateReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.parameters) params[k] = number(v);
    nlohmann::json o = {{"name", r.name},
                        {"parameters", params},
                        {"measured_constant", number(r.measured_constant)},
                        {"bound_claimed", r.bound_claimed ? number(*r.bound_claimed) : nlohmann::json(nullptr)},
                        {"pass", r.pass},
                        {"note", r.note},
                        {"truncation_note", r.truncation_note}};
    arr.push_back(o);
  }
  return arr.dump(2) + "\n";
}

std::string manifest_json(const Manifest& m) {
  nlohmann::json o = {{"config_hash", m.config_hash}, {"version", m.version}, {"seed", m.seed},
                      {"started", m.started},         {"finished", m.finished}, {"subcommand", m.subcommand},
                      {"artifacts", m.artifacts}};
  return o.dump(2) + "\n";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string write_table(const Table& table, const std::string& dir, const std::string& stem,
                        const std::string& format) {
  if (format != "csv" && format != "json") throw std::invalid_argument("write_table: format must be csv or json");
  const std::string name = stem + "." + format;
  write_text((std::filesystem::path(dir) / name).string(), format == "csv" ? table.csv() : table.json());
  return name;
}

}  // namespace bloch
