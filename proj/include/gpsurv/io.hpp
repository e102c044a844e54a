#pragma once

#include <charconv>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gpsurv/data.hpp"
#include "gpsurv/diagnostics.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/rjmcmc.hpp"

namespace gpsurv {

// Samples file, one whitespace-separated record per retained draw:
//
//   iteration log_lik p beta_1..beta_p J s_1..s_J s_max h_1..h_{J+1}
//
// Lines starting with '#' are comments. Numbers use the shortest decimal
// form that round-trips, so re-reading a file reproduces the draws exactly.
inline std::string write_samples(const SampleChain& chain) {
  std::string out = "# gpsurv samples v1\n";
  out += "# seed=" + std::to_string(chain.seed) + " stream=" + std::to_string(chain.stream) + "\n";
  out += "# acceptance";
  for (std::size_t m = 0; m < 4; ++m) {
    out += " " + std::string(kMoveNames[m]) + "=" + std::to_string(chain.acceptance[m].accepted) +
           "/" + std::to_string(chain.acceptance[m].proposed);
  }
  out += "\n# fields: iteration log_lik p beta[p] J s[J] s_max h[J+1]\n";
  for (std::size_t r = 0; r < chain.size(); ++r) {
    const auto& s = chain.samples[r];
    out += std::to_string(chain.iterations[r]);
    out += ' ' + detail::format_double(chain.log_lik[r]);
    out += ' ' + std::to_string(s.beta.size());
    for (double b : s.beta) out += ' ' + detail::format_double(b);
    out += ' ' + std::to_string(s.partition.J());
    for (double v : s.partition.interior()) out += ' ' + detail::format_double(v);
    out += ' ' + detail::format_double(s.partition.s_max());
    for (double v : s.h) out += ' ' + detail::format_double(v);
    out += '\n';
  }
  return out;
}

// Parses a samples file. Errors cite the 1-based record index.
inline SampleChain read_samples(std::string_view text) {
  SampleChain chain;
  std::size_t record = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = detail::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with("# seed=")) {
        std::istringstream meta{std::string(line.substr(2))};
        std::string tok;
        while (meta >> tok) {
          if (tok.starts_with("seed=")) chain.seed = std::stoull(tok.substr(5));
          if (tok.starts_with("stream=")) chain.stream = std::stoull(tok.substr(7));
        }
      }
      continue;
    }
    ++record;
    std::vector<std::string_view> tok;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto next = line.find_first_of(" \t", pos);
      const auto piece = line.substr(pos, next == std::string_view::npos ? next : next - pos);
      if (!piece.empty()) tok.push_back(piece);
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    std::size_t at = 0;
    auto number = [&]() -> double {
      if (at >= tok.size()) throw ParseError("truncated sample record", record, "record");
      const auto v = detail::parse_double(tok[at++]);
      if (!v) throw ParseError("malformed number in sample record", record, "record");
      return *v;
    };
    auto count = [&]() -> std::size_t {
      const double v = number();
      if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ParseError("malformed count in sample record", record, "record");
      }
      return static_cast<std::size_t>(v);
    };
    try {
      const std::size_t iter = count();
      const double ll = number();
      ModelState s;
      s.beta.resize(count());
      for (auto& b : s.beta) b = number();
      std::vector<double> interior(count());
      for (auto& v : interior) v = number();
      const double s_max = number();
      s.partition = TimePartition(interior, s_max);
      s.h.resize(interior.size() + 1);
      for (auto& v : s.h) v = number();
      if (at != tok.size()) throw ParseError("trailing fields in sample record", record, "record");
      s.check();
      chain.iterations.push_back(iter);
      chain.log_lik.push_back(ll);
      chain.samples.push_back(std::move(s));
    } catch (const DomainError& e) {
      throw ParseError(std::string("invalid sample record: ") + e.what(), record, "record");
    }
  }
  if (chain.samples.empty()) throw ParseError("samples file has no records", 0, "record");
  return chain;
}

inline std::string write_curve_csv(const GridCurve& c) {
  std::string out = "t,mean,lower,upper\n";
  for (std::size_t g = 0; g < c.grid.size(); ++g) {
    out += detail::format_double(c.grid[g]) + ',' + detail::format_double(c.mean[g]) + ',' +
           detail::format_double(c.lower[g]) + ',' + detail::format_double(c.upper[g]) + '\n';
  }
  return out;
}

inline std::string write_j_posterior_csv(const PartitionPosterior& pp) {
  std::size_t total = 0;
  for (auto c : pp.j_counts) total += c;
  std::string out = "J,count,probability\n";
  for (std::size_t J = 0; J < pp.j_counts.size(); ++J) {
    out += std::to_string(J) + ',' + std::to_string(pp.j_counts[J]) + ',' +
           detail::format_double(static_cast<double>(pp.j_counts[J]) / static_cast<double>(total)) +
           '\n';
  }
  return out;
}

inline std::string write_split_histogram_csv(const PartitionPosterior& pp) {
  std::string out = "bin_left,bin_right,mass\n";
  for (std::size_t b = 0; b < pp.split_mass.size(); ++b) {
    out += detail::format_double(pp.bin_edges[b]) + ',' + detail::format_double(pp.bin_edges[b + 1]) +
           ',' + detail::format_double(pp.split_mass[b]) + '\n';
  }
  return out;
}

inline std::string write_psrf_csv(const PsrfReport& rep) {
  std::string out = "parameter,psrf,monitored,flagged\n";
  for (const auto& r : rep.rows) {
    out += r.parameter + ',' + detail::format_double(r.value) + ',' + (r.monitored ? "1" : "0") +
           ',' + (r.flagged ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace gpsurv
