#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crimepass {

enum class ErrorKind {
  Config,
  Io,
  MalformedRow,
  UnknownStore,
  NonPositiveQuantity,
  OutOfRangeCoordinate,
  NonPositivePrice,
  NoDefinedSubcategory,
  UniverseTooSmall,
  AllZeroRevenue,
  NoCleanControls,
  EmptyPanel,
  RankDeficient,
  SingleCluster,
  UndefinedLimit,
  NonPositiveRho,
  NegativePSFactor,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Months are integer indices: year*12 + (month-1). Accepts "YYYY-MM",
// "YYYY-MM-DD", or a bare integer index.
std::optional<int> parse_month(std::string_view text);

// Inverse of parse_month for the "YYYY-MM" form.
std::string format_month(int month_index);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Shortest round-trip decimal representation; used for all CSV output so
// artifacts are byte-stable.
std::string format_double(double v);

// Nearest-rank percentile of a sorted vector, p in [0,1].
double nearest_rank_percentile(const std::vector<double>& sorted, double p);

// FNV-1a, used for config hashes embedded in artifacts.
std::uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::uint64_t v);

} // namespace crimepass
