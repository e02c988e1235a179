#pragma once

#include <vector>

#include "crimepass/tables.hpp"

namespace crimepass::spatial {

// Sphere radius used for all geodesic distances, in miles.
inline constexpr double kEarthRadiusMiles = 3958.7613;

/// Great-circle (haversine) distance in miles between two lat/lon points
/// given in degrees.
double geodesic_distance(double lat_a, double lon_a, double lat_b, double lon_b);

// Symmetric store-by-store distance matrix in miles, zero diagonal.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  static DistanceMatrix build(const StoreTable& stores, int threads = 1);

  double operator()(int a, int b) const { return d_[static_cast<std::size_t>(a) * n_ + b]; }
  int size() const { return n_; }

private:
  int n_ = 0;
  std::vector<double> d_;
};

/// Non-victimized stores strictly within `rival_radius` miles of store j.
/// `victimized[s]` marks stores with at least one own incident; those are
/// excluded regardless of distance.
std::vector<int> rival_set(int j, const DistanceMatrix& dist,
                           const std::vector<std::uint8_t>& victimized,
                           double rival_radius = 5.0);

/// Control candidates in the closed ring inner <= d <= outer around store j.
std::vector<int> control_donut(int j, const DistanceMatrix& dist, double inner = 30.0,
                               double outer = 60.0);

struct MarketSets {
  std::vector<int> rivals;
  std::vector<int> control_candidates;
};

/// Rank-based variant: rivals are the `rival_k` nearest stores, candidates the
/// `ctrl_lo`-th through `ctrl_hi`-th nearest (inclusive). Ties break by
/// distance then store index. Requires at least ctrl_hi other stores.
MarketSets rank_based_sets(int j, const DistanceMatrix& dist, int rival_k = 20,
                           int ctrl_lo = 150, int ctrl_hi = 250);

/// Herfindahl-Hirschman index: sum of squared revenue shares. Revenues must be
/// nonnegative with at least one strictly positive.
double hhi(const std::vector<double>& market_revenues);

} // namespace crimepass::spatial
