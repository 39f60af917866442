#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lrsim {

using Date = std::chrono::year_month_day;

/// How a return was formed from consecutive prices. Needed by end_return.
enum class ReturnKind { simple, log };

[[nodiscard]] std::string to_string(ReturnKind kind);
[[nodiscard]] ReturnKind return_kind_from_string(const std::string& s);

/// Daily closing prices as read from disk, before returns are formed.
struct PriceSeries {
  std::vector<double> prices;
  std::vector<Date> dates;  // empty or same length as prices
  std::string source_label;

  /// Throws DataError unless all prices are positive and finite and there are
  /// at least two of them.
  void validate() const;
};

/// A dated sequence of nonzero daily returns.
///
/// Zero returns are dropped when the series is built and only their count is
/// kept, because every downstream statistic is defined on nonzero returns.
class ReturnSeries {
 public:
  /// Throws DataError if any value is zero or non-finite, if fewer than two
  /// values remain, or if dates are present but not strictly increasing or of
  /// a different length.
  explicit ReturnSeries(std::vector<double> values, std::vector<Date> dates = {},
                        std::string source_label = {}, ReturnKind kind = ReturnKind::simple,
                        std::size_t zeros_removed = 0);

  /// Builds a series from raw values, dropping exact zeros (and their dates)
  /// and recording how many were dropped.
  [[nodiscard]] static ReturnSeries from_raw(std::span<const double> raw, std::span<const Date> dates,
                                             std::string source_label, ReturnKind kind);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const std::vector<Date>& dates() const noexcept { return dates_; }
  [[nodiscard]] bool has_dates() const noexcept { return !dates_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] const std::string& source_label() const noexcept { return source_label_; }
  [[nodiscard]] ReturnKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t zeros_removed() const noexcept { return zeros_removed_; }

 private:
  std::vector<double> values_;
  std::vector<Date> dates_;
  std::string source_label_;
  ReturnKind kind_;
  std::size_t zeros_removed_;
};

/// What the file holds. `automatic` takes prices if the value column header
/// contains "price" or "close", returns otherwise.
enum class SeriesContent { automatic, prices, returns };

struct CsvFormat {
  char delimiter = ',';
  SeriesContent content = SeriesContent::automatic;
  ReturnKind kind = ReturnKind::simple;  // provenance for return files
};

using LoadedSeries = std::variant<PriceSeries, ReturnSeries>;

/// Reads a CSV with a header row and either one column (values) or two
/// (date, value). Dates are ISO YYYY-MM-DD. Number parsing ignores the locale.
/// Throws DataError on I/O failure or an empty series and ParseError (with the
/// 1-based row number) on the first malformed row.
[[nodiscard]] LoadedSeries load_series(const std::filesystem::path& path, const CsvFormat& format = {});

/// Convenience wrapper: loads either kind and converts prices with `method`.
[[nodiscard]] ReturnSeries load_returns(const std::filesystem::path& path, const CsvFormat& format = {});

/// Simple (p_t/p_{t-1} - 1) or log (ln p_t/p_{t-1}) returns; zero returns are
/// removed and counted. Each return carries the date of its closing price.
[[nodiscard]] ReturnSeries to_returns(const PriceSeries& prices, ReturnKind method);

/// Rotates the series cyclically by an offset drawn uniformly from
/// {0, ..., n-1}: a periodic extension in both directions with a random origin.
[[nodiscard]] ReturnSeries stationary_embed(const ReturnSeries& series, std::uint64_t seed);

/// Rotation by a fixed offset (the deterministic part of stationary_embed).
[[nodiscard]] ReturnSeries rotate(const ReturnSeries& series, std::size_t offset);

/// Offset stationary_embed draws for this seed and length.
[[nodiscard]] std::size_t embedding_offset(std::size_t n, std::uint64_t seed);

/// Writes "date,return" (or "return" when undated) with round-trip precision.
void save_returns(const std::filesystem::path& path, const ReturnSeries& series);

/// Multi-path output: `wide` has one column per path, `long` has rows
/// run_id,t,value with t starting at 1.
enum class PathLayout { wide, long_format };
void save_paths(const std::filesystem::path& path, std::span<const std::vector<double>> paths,
                PathLayout layout);

/// Shortest decimal text that parses back to exactly `v`.
[[nodiscard]] std::string format_double(double v);
[[nodiscard]] std::optional<double> parse_double(std::string_view text);
[[nodiscard]] std::optional<Date> parse_date(std::string_view text);
[[nodiscard]] std::string format_date(const Date& d);

}  // namespace lrsim
