#include "crimepass/common.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace crimepass {

std::optional<int> parse_month(std::string_view text) {
  if (text.empty()) return std::nullopt;
  auto dash = text.find('-', 1); // skip a leading sign
  if (dash == std::string_view::npos) {
    auto v = parse_int(text);
    if (!v) return std::nullopt;
    return static_cast<int>(*v);
  }
  auto year = parse_int(text.substr(0, dash));
  if (!year) return std::nullopt;
  auto rest = text.substr(dash + 1);
  auto dash2 = rest.find('-');
  auto mon = parse_int(dash2 == std::string_view::npos ? rest : rest.substr(0, dash2));
  if (!mon || *mon < 1 || *mon > 12) return std::nullopt;
  if (dash2 != std::string_view::npos) {
    auto day = parse_int(rest.substr(dash2 + 1));
    if (!day || *day < 1 || *day > 31) return std::nullopt;
  }
  return static_cast<int>(*year) * 12 + static_cast<int>(*mon) - 1;
}

std::string format_month(int month_index) {
  int year = month_index / 12;
  int mon = month_index % 12;
  if (mon < 0) {
    mon += 12;
    --year;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, mon + 1);
  return buf;
}

std::optional<double> parse_double(std::string_view text) {
  double v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view text) {
  long long v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

double nearest_rank_percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(ErrorKind::Internal, "percentile of empty series");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  rank = std::min(std::max<std::size_t>(rank, 1), sorted.size());
  return sorted[rank - 1];
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace crimepass
