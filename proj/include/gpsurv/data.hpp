#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gpsurv/error.hpp"

namespace gpsurv {

// One right-censored record: observed time y = min(T, C), event flag and
// covariate vector.
struct Subject {
  double y = 0.0;
  int delta = 0;
  std::vector<double> x;

  friend bool operator==(const Subject&, const Subject&) = default;
};

// Immutable once built; derived quantities are computed at construction.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<Subject> subjects, std::vector<std::string> covariate_names)
      : subjects_(std::move(subjects)), names_(std::move(covariate_names)) {
    p_ = subjects_.empty() ? names_.size() : subjects_.front().x.size();
    for (const auto& s : subjects_) {
      y_max_ = std::max(y_max_, s.y);
      if (s.delta == 1) event_times_.push_back(s.y);
    }
    std::sort(event_times_.begin(), event_times_.end());
    event_times_.erase(std::unique(event_times_.begin(), event_times_.end()),
                       event_times_.end());
    if (names_.empty()) {
      for (std::size_t m = 0; m < p_; ++m) names_.push_back("x" + std::to_string(m + 1));
    }
  }

  const std::vector<Subject>& subjects() const noexcept { return subjects_; }
  const Subject& operator[](std::size_t i) const { return subjects_[i]; }
  std::size_t size() const noexcept { return subjects_.size(); }
  std::size_t p() const noexcept { return p_; }
  double y_max() const noexcept { return y_max_; }
  // Sorted distinct times with delta = 1.
  const std::vector<double>& event_times() const noexcept { return event_times_; }
  const std::vector<std::string>& covariate_names() const noexcept { return names_; }

  std::size_t n_events() const {
    return static_cast<std::size_t>(std::count_if(
        subjects_.begin(), subjects_.end(), [](const Subject& s) { return s.delta == 1; }));
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.subjects_ == b.subjects_ && a.names_ == b.names_;
  }

 private:
  std::vector<Subject> subjects_;
  std::vector<std::string> names_;
  std::size_t p_ = 0;
  double y_max_ = 0.0;
  std::vector<double> event_times_;
};

// Column mapping for CSV ingestion. An empty covariate list means "every
// column other than time/event, in header order".
struct CsvSchema {
  std::string time_column = "time";
  std::string event_column = "event";
  std::vector<std::string> covariates;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Parses CSV text into a Dataset. Rows are kept in file order; blank lines
// are skipped. Negative times are rejected here; the remaining invariants
// are checked by validate_dataset.
inline Dataset parse_dataset(std::string_view text, const CsvSchema& schema = {}) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto pos = text.find('\n', start);
      const auto line = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
      if (!detail::trim(line).empty()) lines.push_back(line);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }
  if (lines.empty()) throw SchemaError("empty input: header row required");

  auto header = detail::split_commas(lines.front());
  if (!header.empty() && header.front().starts_with("\xEF\xBB\xBF")) header.front().remove_prefix(3);

  auto find_column = [&](std::string_view name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t time_col = find_column(schema.time_column);
  const std::size_t event_col = find_column(schema.event_column);

  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  if (schema.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == time_col || c == event_col) continue;
      cov_cols.push_back(c);
      cov_names.emplace_back(header[c]);
    }
  } else {
    for (const auto& name : schema.covariates) {
      cov_cols.push_back(find_column(name));
      cov_names.push_back(name);
    }
  }

  std::vector<Subject> subjects;
  subjects.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = detail::split_commas(lines[r]);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       r);
    }
    auto numeric = [&](std::size_t c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v) {
        throw ParseError("non-numeric value '" + std::string(cells[c]) + "' in column '" +
                             std::string(header[c]) + "'",
                         r);
      }
      return *v;
    };
    Subject s;
    s.y = numeric(time_col);
    if (s.y < 0.0) throw ValidationError("negative time at row " + std::to_string(r));
    const double ev = numeric(event_col);
    if (ev != 0.0 && ev != 1.0) throw ParseError("event indicator must be 0 or 1", r);
    s.delta = static_cast<int>(ev);
    s.x.reserve(cov_cols.size());
    for (auto c : cov_cols) s.x.push_back(numeric(c));
    subjects.push_back(std::move(s));
  }
  return Dataset(std::move(subjects), std::move(cov_names));
}

// Checks every Dataset invariant required for fitting and returns the input.
inline const Dataset& validate_dataset(const Dataset& d) {
  const std::size_t p = d.p();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& s = d[i];
    const std::string where = "subject " + std::to_string(i + 1);
    if (s.x.size() != p) {
      throw ValidationError(where + ": covariate dimension " + std::to_string(s.x.size()) +
                            " != " + std::to_string(p));
    }
    if (!std::isfinite(s.y) || s.y < 0.0) throw ValidationError(where + ": invalid time");
    if (s.delta != 0 && s.delta != 1) throw ValidationError(where + ": event must be 0 or 1");
    if (s.delta == 1 && s.y == 0.0) throw ValidationError(where + ": event at time 0");
    for (double v : s.x) {
      if (!std::isfinite(v)) throw ValidationError(where + ": non-finite covariate");
    }
  }
  if (d.size() == 0) throw ValidationError("dataset has no subjects");
  if (d.event_times().empty()) throw ValidationError("no events: all subjects are censored");
  if (!(d.y_max() > 0.0)) throw ValidationError("maximum follow-up time must be positive");
  return d;
}

// Shortest round-trippable decimal representation, so that parse(write(d)) == d.
inline std::string write_dataset(const Dataset& d) {
  std::string out = "time,event";
  for (const auto& name : d.covariate_names()) out += "," + name;
  out += '\n';
  for (const auto& s : d.subjects()) {
    out += detail::format_double(s.y);
    out += s.delta == 1 ? ",1" : ",0";
    for (double v : s.x) out += "," + detail::format_double(v);
    out += '\n';
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Dataset load_dataset(const std::string& path, const CsvSchema& schema = {}) {
  Dataset d = parse_dataset(read_text_file(path), schema);
  validate_dataset(d);
  return d;
}

// FNV-1a over the canonical serialization; identifies "the same dataset"
// across fit outputs.
inline std::uint64_t dataset_fingerprint(const Dataset& d) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : write_dataset(d)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace gpsurv
