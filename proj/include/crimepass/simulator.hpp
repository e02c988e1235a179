#pragma once

#include <cstdint>
#include <vector>

#include "crimepass/tables.hpp"

namespace crimepass::simulator {

enum class Layout { UniformBox, ClusteredTowns };

// Data-generating process. Treatment effects are injected multiplicatively
// into product-level log prices, so recovering them exercises the whole
// index-and-estimation chain rather than a shortcut.
struct DgpConfig {
  int n_stores = 500;
  int n_months = 46;
  int start_month = 2018 * 12 + 2; // 2018-03
  std::uint64_t seed = 1;

  Layout layout = Layout::ClusteredTowns;
  double box_lat_min = 45.8, box_lat_max = 48.8;
  double box_lon_min = -124.0, box_lon_max = -117.5;
  int towns = 12;
  double town_sigma_miles = 3.0;
  int urban_towns = 3;

  double products_per_store_mean = 60.0;
  int n_categories = 4;
  int n_producers = 20;
  double presence_prob = 0.95;

  double base_price = 27.93;
  double price_sigma_product = 0.35; // cross-product dispersion of base prices
  double store_markup_sigma = 0.08;
  double ar1_coefficient = 0.3;  // store-month log price noise
  double ar1_sigma = 0.01;
  double product_noise_sigma = 0.04; // product-month idiosyncratic log noise
  double seasonal_amplitude = 0.0;

  double crime_hazard = 0.003; // per store-month
  double crime_q4_multiplier = 1.0;
  double robbery_share = 0.8;

  std::vector<double> victim_effect; // per-lag log-point increments
  std::vector<double> rival_effect;
  double effect_radius_miles = 5.0;

  double wholesale_base_ratio = 0.45;
  double wholesale_sigma = 0.02;          // product-store-month log cost noise
  double wholesale_own_passthrough = 1.67; // dollars per dollar
  double wholesale_rival_response = 0.0;   // response to 0-5 mile rivals' costs
  double rival_cost_bin_miles = 5.0;

  double quantity_mean = 40.0;
  double quantity_sigma = 0.3;
  double wholesale_quantity_jitter = 0.2;
};

struct GroundTruth {
  // cumulative log price-level effects by months since treatment
  std::vector<double> victim_cum;
  std::vector<double> rival_cum;
  DgpConfig config;
};

struct SimulatedMarket {
  Dataset data;
  GroundTruth truth;
};

/// Validates a config; throws on non-finite paths, negative scales, or
/// impossible counts.
void validate(const DgpConfig& config);

/// Deterministic synthetic market. Random streams are partitioned per store,
/// so draws for existing stores do not move when stores are added, and
/// per-store generation parallelizes without affecting output.
SimulatedMarket generate(const DgpConfig& config, int threads = 1);

/// Analytic cumulative effect path implied by a per-lag increment path:
/// E_L is the prefix sum, constant once the path is exhausted. Pre-event
/// effects are zero by construction.
std::vector<double> oracle_path(const std::vector<double>& increments, int k);

} // namespace crimepass::simulator
