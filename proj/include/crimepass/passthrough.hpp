#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crimepass/spatial.hpp"
#include "crimepass/tables.hpp"

namespace crimepass::passthrough {

enum class Variant {
  FdDollars, // first differences of dollar unit prices and costs
  Levels,    // dollar levels with store-product fixed effects
  FdLogs     // first differences of logs (elasticities)
};

// Product-level rows: own price and cost terms plus per-5-mile-bin averages
// of competitors' cost terms for the same product. A bin value exists only
// if at least one competitor in the bin has the covariate defined that month.
struct Panel {
  int n_bins = 9;
  double bin_width = 5.0;
  Variant variant = Variant::FdDollars;
  std::vector<int> store, product, month;
  std::vector<double> own_price; // dp / p / dlog p depending on the variant
  std::vector<double> own_cost;  // dw / w / dlog w
  std::vector<double> bins;      // row-major n_bins values, NaN when absent

  std::size_t rows() const { return store.size(); }
  double bin(std::size_t row, int r) const { return bins[row * n_bins + r]; }
};

struct BuildOptions {
  int n_bins = 9;
  double bin_width = 5.0;
  Variant variant = Variant::FdDollars;
  // rows restricted to these stores (empty = all); competitors always come
  // from the full store universe
  std::vector<std::uint8_t> row_stores;
};

/// Assembles the product-level panel. Rows require the own cost covariate;
/// missing rival bins stay NaN and are handled listwise at estimation time.
Panel build_panel(const ProductMonthPanel& pm, const spatial::DistanceMatrix& dist,
                  const BuildOptions& options);

struct Spec {
  int included_bins = 9; // 0 = own-cost-only specification
  bool region_time_fe = false;
  double region_grid_degrees = 0.5;
  const std::vector<std::vector<double>>* controls = nullptr; // row-aligned extra columns
  std::vector<std::string> control_names;
};

struct Estimate {
  double own = 0, own_se = 0;
  std::vector<double> bin_beta, bin_se;
  std::vector<double> cum, cum_se; // prefix sums of the bin coefficients
  Eigen::MatrixXd vcov;            // own + included bins block
  std::size_t n = 0;
  int clusters = 0;
};

/// First-difference (or level) pass-through regression with month fixed
/// effects, clustered by store. Rows missing any included bin are dropped
/// listwise. Level variants absorb store-product effects via alternating
/// projections.
Estimate estimate(const Panel& panel, const StoreTable& stores, const Spec& spec);

/// Prefix sums of the bin coefficients with linear-combination standard
/// errors; vcov must be the (own + bins) block with bins starting at 1.
void cumulative_bin_sums(Estimate& est);

} // namespace crimepass::passthrough
