#include "lrsim/series_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lrsim/errors.hpp"
#include "lrsim/rng.hpp"

namespace lrsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_dates(const std::vector<Date>& dates, std::size_t n) {
  if (dates.empty()) return;
  if (dates.size() != n) throw DataError("dates and values differ in length");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(std::chrono::sys_days(dates[i - 1]) < std::chrono::sys_days(dates[i])))
      throw DataError("dates are not strictly increasing at position " + std::to_string(i + 1));
  }
}

}  // namespace

std::string to_string(ReturnKind kind) { return kind == ReturnKind::log ? "log" : "simple"; }

ReturnKind return_kind_from_string(const std::string& s) {
  if (s == "simple") return ReturnKind::simple;
  if (s == "log") return ReturnKind::log;
  throw ConfigError("unknown return kind '" + s + "' (expected simple or log)");
}

void PriceSeries::validate() const {
  if (prices.size() < 2) throw DataError("empty series: need at least two prices");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!std::isfinite(prices[i]) || prices[i] <= 0.0)
      throw DataError("price at position " + std::to_string(i + 1) + " is not positive");
  }
  check_dates(dates, prices.size());
}

ReturnSeries::ReturnSeries(std::vector<double> values, std::vector<Date> dates, std::string source_label,
                           ReturnKind kind, std::size_t zeros_removed)
    : values_(std::move(values)),
      dates_(std::move(dates)),
      source_label_(std::move(source_label)),
      kind_(kind),
      zeros_removed_(zeros_removed) {
  if (values_.size() < 2) throw DataError("empty series: need at least two nonzero returns");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] == 0.0)
      throw DataError("return at position " + std::to_string(i + 1) + " is zero or not finite");
  }
  check_dates(dates_, values_.size());
}

ReturnSeries ReturnSeries::from_raw(std::span<const double> raw, std::span<const Date> dates,
                                    std::string source_label, ReturnKind kind) {
  if (!dates.empty() && dates.size() != raw.size()) throw DataError("dates and values differ in length");
  std::vector<double> values;
  std::vector<Date> kept_dates;
  values.reserve(raw.size());
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == 0.0) {
      ++zeros;
      continue;
    }
    values.push_back(raw[i]);
    if (!dates.empty()) kept_dates.push_back(dates[i]);
  }
  return ReturnSeries(std::move(values), std::move(kept_dates), std::move(source_label), kind, zeros);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<Date> parse_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc() && ptr == text.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

LoadedSeries load_series(const std::filesystem::path& path, const CsvFormat& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  if (in.bad()) throw DataError("read failure on " + path.string());
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError("empty series: " + path.string() + " has no header");

  auto header = split(lines.front(), format.delimiter);
  if (header.size() != 1 && header.size() != 2)
    throw ParseError(1, "expected one column (value) or two columns (date, value)");
  const bool dated = header.size() == 2;
  bool prices = format.content == SeriesContent::prices;
  if (format.content == SeriesContent::automatic) {
    const auto name = lower(header.back());
    prices = name.find("price") != std::string::npos || name.find("close") != std::string::npos;
  }

  std::vector<double> values;
  std::vector<Date> dates;
  values.reserve(lines.size());
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const auto fields = split(lines[row], format.delimiter);
    if (fields.size() != header.size())
      throw ParseError(row + 1, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    if (dated) {
      const auto d = parse_date(fields[0]);
      if (!d) throw ParseError(row + 1, "invalid date '" + std::string(fields[0]) + "'");
      dates.push_back(*d);
    }
    const auto v = parse_double(fields.back());
    if (!v) throw ParseError(row + 1, "non-numeric value '" + std::string(fields.back()) + "'");
    values.push_back(*v);
  }
  if (values.empty()) throw DataError("empty series: " + path.string() + " has no data rows");

  const auto label = path.filename().string();
  if (prices) {
    PriceSeries p{std::move(values), std::move(dates), label};
    p.validate();
    return p;
  }
  return ReturnSeries::from_raw(values, dates, label, format.kind);
}

ReturnSeries load_returns(const std::filesystem::path& path, const CsvFormat& format) {
  auto loaded = load_series(path, format);
  if (auto* r = std::get_if<ReturnSeries>(&loaded)) return std::move(*r);
  return to_returns(std::get<PriceSeries>(loaded), format.kind);
}

ReturnSeries to_returns(const PriceSeries& prices, ReturnKind method) {
  prices.validate();
  std::vector<double> raw(prices.prices.size() - 1);
  for (std::size_t t = 1; t < prices.prices.size(); ++t) {
    const double ratio = prices.prices[t] / prices.prices[t - 1];
    raw[t - 1] = method == ReturnKind::log ? std::log(ratio) : ratio - 1.0;
  }
  std::span<const Date> dates;
  if (!prices.dates.empty()) dates = std::span<const Date>(prices.dates).subspan(1);
  return ReturnSeries::from_raw(raw, dates, prices.source_label, method);
}

std::size_t embedding_offset(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x5EED}));
  return static_cast<std::size_t>(rng.below(n));
}

ReturnSeries rotate(const ReturnSeries& series, std::size_t offset) {
  const auto n = series.size();
  offset %= n;
  std::vector<double> v(series.values().begin(), series.values().end());
  std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(offset), v.end());
  // A rotated series no longer has a calendar; dates are dropped.
  return ReturnSeries(std::move(v), {}, series.source_label(), series.kind(), series.zeros_removed());
}

ReturnSeries stationary_embed(const ReturnSeries& series, std::uint64_t seed) {
  return rotate(series, embedding_offset(series.size(), seed));
}

void save_returns(const std::filesystem::path& path, const ReturnSeries& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << (series.has_dates() ? "date,return\n" : "return\n");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.has_dates()) out << format_date(series.dates()[i]) << ',';
    out << format_double(series[i]) << '\n';
  }
  if (!out) throw DataError("write failure on " + path.string());
}

void save_paths(const std::filesystem::path& path, std::span<const std::vector<double>> paths, PathLayout layout) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  if (layout == PathLayout::long_format) {
    out << "run_id,t,value\n";
    for (std::size_t r = 0; r < paths.size(); ++r)
      for (std::size_t t = 0; t < paths[r].size(); ++t)
        out << r << ',' << t + 1 << ',' << format_double(paths[r][t]) << '\n';
  } else {
    std::size_t len = 0;
    for (std::size_t r = 0; r < paths.size(); ++r) {
      out << (r ? "," : "") << "path_" << r;
      len = std::max(len, paths[r].size());
    }
    out << '\n';
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t r = 0; r < paths.size(); ++r) {
        if (r) out << ',';
        if (t < paths[r].size()) out << format_double(paths[r][t]);
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("write failure on " + path.string());
}

}  // namespace lrsim
