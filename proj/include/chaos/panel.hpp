#pragma once
// Multi-asset price panels and multivariate index series.
//
// Panels are immutable value objects validated on construction. Matrices are
// column-major with one column per date, so the cross-section at a date is
// contiguous in memory.

#include <chrono>
#include <compare>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace chaos {

/// Calendar date (no time of day).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Parses YYYY-MM-DD. Throws ValidationError on anything else.
  static Date parse(std::string_view text);

  std::chrono::sys_days days() const noexcept { return days_; }
  std::string to_string() const;
  Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

namespace panel {

/// N assets by T dates of strictly positive prices.
class PricePanel {
 public:
  /// prices is N x T (rows = assets). Throws ValidationError on any
  /// invariant violation.
  PricePanel(std::vector<std::string> asset_ids, std::vector<Date> timestamps,
             Eigen::MatrixXd prices);

  std::size_t assets() const noexcept { return asset_ids_.size(); }
  std::size_t dates() const noexcept { return timestamps_.size(); }
  const std::vector<std::string>& asset_ids() const noexcept { return asset_ids_; }
  const std::vector<Date>& timestamps() const noexcept { return timestamps_; }
  const Eigen::MatrixXd& prices() const noexcept { return prices_; }

 private:
  std::vector<std::string> asset_ids_;
  std::vector<Date> timestamps_;
  Eigen::MatrixXd prices_;
};

/// Gross returns r_i(t) = C_i(t) / C_i(t-1), stamped with the later date.
class ReturnPanel {
 public:
  ReturnPanel(std::vector<std::string> asset_ids, std::vector<Date> timestamps,
              Eigen::MatrixXd returns);

  std::size_t assets() const noexcept { return asset_ids_.size(); }
  std::size_t periods() const noexcept { return timestamps_.size(); }
  const std::vector<std::string>& asset_ids() const noexcept { return asset_ids_; }
  const std::vector<Date>& timestamps() const noexcept { return timestamps_; }
  /// N x T', column t is the return vector of period t.
  const Eigen::MatrixXd& returns() const noexcept { return returns_; }

 private:
  std::vector<std::string> asset_ids_;
  std::vector<Date> timestamps_;
  Eigen::MatrixXd returns_;
};

/// K named series observed on a common date grid.
class SeriesTable {
 public:
  /// values is K x T (rows = series).
  SeriesTable(std::vector<std::string> names, std::vector<Date> timestamps,
              Eigen::MatrixXd values);

  std::size_t series() const noexcept { return names_.size(); }
  std::size_t length() const noexcept { return timestamps_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<Date>& timestamps() const noexcept { return timestamps_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Index of a series by name; throws ValidationError when absent.
  std::size_t index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::vector<Date> timestamps_;
  Eigen::MatrixXd values_;
};

ReturnPanel gross_returns(const PricePanel& panel);

/// CSV layout: header row `date,<label>,...`, one row per date. Lines starting
/// with '#' are comments. Rows may appear in any date order.
PricePanel load_price_panel(const std::filesystem::path& path);
PricePanel read_price_panel(std::istream& in, std::string_view source = "<stream>");

SeriesTable load_series_table(const std::filesystem::path& path);
SeriesTable read_series_table(std::istream& in, std::string_view source = "<stream>");

/// Inner join on dates; columns concatenated in input order.
SeriesTable align_and_join(const std::vector<SeriesTable>& tables);

/// Natural log of every value (values must be > 0).
SeriesTable log_transform(const SeriesTable& table);
/// First differences; drops the first date.
SeriesTable difference(const SeriesTable& table);

/// Writers emit 17 significant digits, so values round-trip exactly.
/// Each `comments` entry becomes a leading `# ...` line.
void write_series_table(std::ostream& out, const SeriesTable& table,
                        const std::vector<std::string>& comments = {});
void write_price_panel(std::ostream& out, const PricePanel& panel,
                       const std::vector<std::string>& comments = {});

/// Decimal text with 17 significant digits; parses back to exactly v.
std::string format_double(double v);

}  // namespace panel
}  // namespace chaos
