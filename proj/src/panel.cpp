#include "chaos/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "chaos/error.hpp"

namespace chaos {

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year(year), std::chrono::month(month),
                                        std::chrono::day(day)};
  if (!ymd.ok()) throw ValidationError("invalid calendar date");
  days_ = std::chrono::sys_days(ymd);
}

Date Date::parse(std::string_view text) {
  auto bad = [&] { return ValidationError("invalid ISO-8601 date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* first = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc() || ptr != first + len) throw bad();
    return v;
  };
  const int y = field(0, 4);
  const int m = field(5, 2);
  const int d = field(8, 2);
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                                        std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok()) throw bad();
  return Date(std::chrono::sys_days(ymd));
}

std::string Date::to_string() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

namespace panel {
namespace {

void check_timestamps(const std::vector<Date>& ts, std::string_view what) {
  for (std::size_t t = 1; t < ts.size(); ++t) {
    if (!(ts[t - 1] < ts[t])) {
      throw ValidationError(std::string(what) + ": timestamps not strictly increasing at " +
                            ts[t].to_string());
    }
  }
}

void check_unique(const std::vector<std::string>& labels, std::string_view what) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw ValidationError(std::string(what) + ": duplicate label '" + l + "'");
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool parse_number(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

// One parsed CSV grid: labels from the header, one row per date.
struct Grid {
  std::vector<std::string> labels;
  std::vector<Date> dates;
  std::vector<std::size_t> line_numbers;
  std::vector<double> cells;  // row-major, dates x labels
};

Grid read_grid(std::istream& in, std::string_view source, bool positive_only) {
  Grid g;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  auto where = [&](std::size_t ln) { return std::string(source) + ":" + std::to_string(ln) + ": "; };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty() || view.front() == '#') continue;
    const auto fields = split_commas(view);

    if (!have_header) {
      if (fields.size() < 2) throw ValidationError(where(line_no) + "header needs a date column and at least one series");
      for (std::size_t c = 1; c < fields.size(); ++c) {
        if (fields[c].empty()) throw ValidationError(where(line_no) + "empty column label in header");
        g.labels.emplace_back(fields[c]);
      }
      check_unique(g.labels, where(line_no) + "header");
      have_header = true;
      continue;
    }

    if (fields.size() != g.labels.size() + 1) {
      throw ValidationError(where(line_no) + "expected " + std::to_string(g.labels.size() + 1) +
                            " fields, found " + std::to_string(fields.size()));
    }
    Date d;
    try {
      d = Date::parse(fields[0]);
    } catch (const ValidationError& e) {
      throw ValidationError(where(line_no) + e.what());
    }
    for (std::size_t c = 0; c < g.labels.size(); ++c) {
      const auto cell = fields[c + 1];
      double v = 0.0;
      const std::string at = where(line_no) + "column '" + g.labels[c] + "' on " + d.to_string() + ": ";
      if (cell.empty()) throw ValidationError(at + "missing value");
      if (!parse_number(cell, v)) throw ValidationError(at + "cannot parse '" + std::string(cell) + "'");
      if (positive_only && !(v > 0.0)) {
        throw ValidationError(at + "price " + std::string(cell) + " is not strictly positive");
      }
      g.cells.push_back(v);
    }
    g.dates.push_back(d);
    g.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ValidationError(std::string(source) + ": no header row");
  return g;
}

// Sorts rows by date and rejects duplicates. Returns the values as a
// labels x dates matrix.
Eigen::MatrixXd sorted_matrix(Grid& g, std::string_view source) {
  const std::size_t rows = g.dates.size();
  const std::size_t cols = g.labels.size();
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.dates[a] < g.dates[b]; });
  for (std::size_t k = 1; k < rows; ++k) {
    if (g.dates[order[k]] == g.dates[order[k - 1]]) {
      throw ValidationError(std::string(source) + ":" + std::to_string(g.line_numbers[order[k]]) +
                            ": duplicate date " + g.dates[order[k]].to_string() + " (first seen on line " +
                            std::to_string(g.line_numbers[order[k - 1]]) + ")");
    }
  }
  Eigen::MatrixXd m(cols, rows);
  std::vector<Date> dates(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    const std::size_t r = order[k];
    dates[k] = g.dates[r];
    for (std::size_t c = 0; c < cols; ++c) m(c, k) = g.cells[r * cols + c];
  }
  g.dates = std::move(dates);
  return m;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

PricePanel::PricePanel(std::vector<std::string> asset_ids, std::vector<Date> timestamps,
                       Eigen::MatrixXd prices)
    : asset_ids_(std::move(asset_ids)), timestamps_(std::move(timestamps)), prices_(std::move(prices)) {
  if (asset_ids_.size() < 2) throw ValidationError("price panel needs at least 2 assets");
  if (timestamps_.size() < 2) throw ValidationError("price panel needs at least 2 dates");
  if (static_cast<std::size_t>(prices_.rows()) != asset_ids_.size() ||
      static_cast<std::size_t>(prices_.cols()) != timestamps_.size()) {
    throw ValidationError("price matrix shape does not match labels and dates");
  }
  check_unique(asset_ids_, "price panel");
  check_timestamps(timestamps_, "price panel");
  for (Eigen::Index t = 0; t < prices_.cols(); ++t) {
    for (Eigen::Index i = 0; i < prices_.rows(); ++i) {
      const double v = prices_(i, t);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError("price for '" + asset_ids_[i] + "' on " + timestamps_[t].to_string() +
                              " is not a finite positive number");
      }
    }
  }
}

ReturnPanel::ReturnPanel(std::vector<std::string> asset_ids, std::vector<Date> timestamps,
                         Eigen::MatrixXd returns)
    : asset_ids_(std::move(asset_ids)), timestamps_(std::move(timestamps)), returns_(std::move(returns)) {
  if (asset_ids_.empty() || timestamps_.empty()) throw ValidationError("empty return panel");
  if (static_cast<std::size_t>(returns_.rows()) != asset_ids_.size() ||
      static_cast<std::size_t>(returns_.cols()) != timestamps_.size()) {
    throw ValidationError("return matrix shape does not match labels and dates");
  }
  check_unique(asset_ids_, "return panel");
  check_timestamps(timestamps_, "return panel");
  if (!(returns_.array() > 0.0).all() || !returns_.allFinite()) {
    throw ValidationError("returns must be finite and strictly positive");
  }
}

SeriesTable::SeriesTable(std::vector<std::string> names, std::vector<Date> timestamps,
                         Eigen::MatrixXd values)
    : names_(std::move(names)), timestamps_(std::move(timestamps)), values_(std::move(values)) {
  if (names_.size() < 2) throw ValidationError("series table needs at least 2 series");
  if (timestamps_.empty()) throw ValidationError("series table has no dates");
  if (static_cast<std::size_t>(values_.rows()) != names_.size() ||
      static_cast<std::size_t>(values_.cols()) != timestamps_.size()) {
    throw ValidationError("series matrix shape does not match names and dates");
  }
  check_unique(names_, "series table");
  check_timestamps(timestamps_, "series table");
  if (!values_.allFinite()) throw ValidationError("series table contains non-finite values");
}

std::size_t SeriesTable::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("unknown series '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

ReturnPanel gross_returns(const PricePanel& panel) {
  if (panel.dates() < 2) throw InsufficientData("gross returns need at least 2 dates");
  const auto& p = panel.prices();
  const Eigen::Index T = p.cols();
  Eigen::MatrixXd r = p.rightCols(T - 1).array() / p.leftCols(T - 1).array();
  std::vector<Date> ts(panel.timestamps().begin() + 1, panel.timestamps().end());
  return ReturnPanel(panel.asset_ids(), std::move(ts), std::move(r));
}

PricePanel read_price_panel(std::istream& in, std::string_view source) {
  Grid g = read_grid(in, source, /*positive_only=*/true);
  Eigen::MatrixXd m = sorted_matrix(g, source);
  return PricePanel(std::move(g.labels), std::move(g.dates), std::move(m));
}

PricePanel load_price_panel(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_price_panel(in, path.string());
}

SeriesTable read_series_table(std::istream& in, std::string_view source) {
  Grid g = read_grid(in, source, /*positive_only=*/false);
  Eigen::MatrixXd m = sorted_matrix(g, source);
  return SeriesTable(std::move(g.labels), std::move(g.dates), std::move(m));
}

SeriesTable load_series_table(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_series_table(in, path.string());
}

SeriesTable align_and_join(const std::vector<SeriesTable>& tables) {
  if (tables.empty()) throw ContractViolation("align_and_join needs at least one table");

  std::vector<Date> common = tables.front().timestamps();
  for (std::size_t k = 1; k < tables.size(); ++k) {
    std::vector<Date> next;
    const auto& ts = tables[k].timestamps();
    std::set_intersection(common.begin(), common.end(), ts.begin(), ts.end(), std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) throw AlignmentError("tables share no common dates");

  std::vector<std::string> names;
  std::set<std::string> seen;
  Eigen::Index rows = 0;
  for (const auto& t : tables) {
    for (const auto& n : t.names()) {
      if (!seen.insert(n).second) throw ValidationError("column name collision on '" + n + "'");
      names.push_back(n);
    }
    rows += static_cast<Eigen::Index>(t.series());
  }

  Eigen::MatrixXd values(rows, static_cast<Eigen::Index>(common.size()));
  Eigen::Index row0 = 0;
  for (const auto& t : tables) {
    const auto& ts = t.timestamps();
    std::size_t src = 0;
    for (std::size_t c = 0; c < common.size(); ++c) {
      while (ts[src] < common[c]) ++src;
      values.block(row0, static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t.series()), 1) =
          t.values().col(static_cast<Eigen::Index>(src));
    }
    row0 += static_cast<Eigen::Index>(t.series());
  }
  return SeriesTable(std::move(names), std::move(common), std::move(values));
}

SeriesTable log_transform(const SeriesTable& table) {
  if (!(table.values().array() > 0.0).all()) {
    throw ValidationError("log transform requires strictly positive values");
  }
  return SeriesTable(table.names(), table.timestamps(), table.values().array().log().matrix());
}

SeriesTable difference(const SeriesTable& table) {
  const Eigen::Index T = static_cast<Eigen::Index>(table.length());
  if (T < 2) throw InsufficientData("differencing needs at least 2 dates");
  const auto& v = table.values();
  Eigen::MatrixXd d = v.rightCols(T - 1) - v.leftCols(T - 1);
  std::vector<Date> ts(table.timestamps().begin() + 1, table.timestamps().end());
  return SeriesTable(table.names(), std::move(ts), std::move(d));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw InternalError("number formatting failed");
  return std::string(buf, ptr);
}

namespace {

void write_grid(std::ostream& out, const std::vector<std::string>& labels, const std::vector<Date>& dates,
                const Eigen::MatrixXd& m, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "date";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t t = 0; t < dates.size(); ++t) {
    out << dates[t].to_string();
    for (Eigen::Index k = 0; k < m.rows(); ++k) out << ',' << format_double(m(k, static_cast<Eigen::Index>(t)));
    out << '\n';
  }
}

}  // namespace

void write_series_table(std::ostream& out, const SeriesTable& table, const std::vector<std::string>& comments) {
  write_grid(out, table.names(), table.timestamps(), table.values(), comments);
}

void write_price_panel(std::ostream& out, const PricePanel& panel, const std::vector<std::string>& comments) {
  write_grid(out, panel.asset_ids(), panel.timestamps(), panel.prices(), comments);
}

}  // namespace panel
}  // namespace chaos
