#include "crimepass/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crimepass/parallel.hpp"

namespace crimepass::spatial {

double geodesic_distance(double lat_a, double lon_a, double lat_b, double lon_b) {
  constexpr double deg = std::numbers::pi / 180.0;
  double phi1 = lat_a * deg;
  double phi2 = lat_b * deg;
  double dphi = (lat_b - lat_a) * deg;
  double dlam = (lon_b - lon_a) * deg;
  double s1 = std::sin(dphi / 2.0);
  double s2 = std::sin(dlam / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

DistanceMatrix DistanceMatrix::build(const StoreTable& stores, int threads) {
  DistanceMatrix m;
  m.n_ = stores.size();
  m.d_.assign(static_cast<std::size_t>(m.n_) * m.n_, 0.0);
  auto n = static_cast<std::size_t>(m.n_);
  parallel_for(n, threads, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double d = geodesic_distance(stores.latitude[a], stores.longitude[a], stores.latitude[b],
                                   stores.longitude[b]);
      m.d_[a * n + b] = d;
    }
  });
  // mirror the upper triangle so symmetry is exact
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) m.d_[b * n + a] = m.d_[a * n + b];
  return m;
}

std::vector<int> rival_set(int j, const DistanceMatrix& dist,
                           const std::vector<std::uint8_t>& victimized, double rival_radius) {
  std::vector<int> out;
  for (int s = 0; s < dist.size(); ++s) {
    if (s == j || victimized[s]) continue;
    if (dist(j, s) < rival_radius) out.push_back(s);
  }
  return out;
}

std::vector<int> control_donut(int j, const DistanceMatrix& dist, double inner, double outer) {
  std::vector<int> out;
  for (int s = 0; s < dist.size(); ++s) {
    if (s == j) continue;
    double d = dist(j, s);
    if (d >= inner && d <= outer) out.push_back(s);
  }
  return out;
}

MarketSets rank_based_sets(int j, const DistanceMatrix& dist, int rival_k, int ctrl_lo,
                           int ctrl_hi) {
  int others = dist.size() - 1;
  if (others < ctrl_hi)
    fail(ErrorKind::UniverseTooSmall,
         "rank-based sets need at least " + std::to_string(ctrl_hi) + " other stores, have " +
             std::to_string(others));
  std::vector<int> order;
  order.reserve(others);
  for (int s = 0; s < dist.size(); ++s)
    if (s != j) order.push_back(s);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double da = dist(j, a), db = dist(j, b);
    if (da != db) return da < db;
    return a < b;
  });
  MarketSets sets;
  for (int r = 0; r < rival_k && r < others; ++r) sets.rivals.push_back(order[r]);
  for (int r = ctrl_lo; r <= ctrl_hi; ++r) sets.control_candidates.push_back(order[r - 1]);
  return sets;
}

double hhi(const std::vector<double>& market_revenues) {
  double total = 0;
  for (double r : market_revenues) {
    if (r < 0) fail(ErrorKind::Internal, "negative revenue in HHI market");
    total += r;
  }
  if (total <= 0) fail(ErrorKind::AllZeroRevenue, "HHI market has no positive revenue");
  double h = 0;
  for (double r : market_revenues) {
    double share = r / total;
    h += share * share;
  }
  return h;
}

} // namespace crimepass::spatial
