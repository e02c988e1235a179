#pragma once

#include <optional>
#include <vector>

#include "crimepass/tables.hpp"

namespace crimepass::indexes {

enum class WeightYear { Calendar, FiscalJuly };

// Year bucket used for annual weight shares. Fiscal years run July-June.
int weight_year_of(int month, WeightYear mode);

// One matched product entering a month-over-month subcategory relative.
// `annual_value` is the product's annual revenue (price/quantity index) or
// wholesale expenditure (cost index) used for the share weight.
struct MatchedProduct {
  double prior = 0;
  double current = 0;
  double annual_value = 0;
};

/// Log of the weighted geometric mean of current/prior ratios, with weights
/// renormalized over the matched set. Absent when nothing matched or all
/// matched annual values are zero. Throws NonPositivePrice on a matched
/// ratio with a non-positive leg.
std::optional<double> subcategory_log_relative(const std::vector<MatchedProduct>& matched);

/// Aggregates defined subcategory log relatives with annual subcategory
/// weights, renormalized over the defined set. Absent when no subcategory is
/// defined or all defined ones carry zero weight (the month becomes a gap).
std::optional<double> store_log_index(const std::vector<std::pair<double, double>>& rel_and_weight);

// Per-store annual weight shares, exposed for direct inspection in tests and
// exports. Shares are within-(store, subcategory, year) for products and
// within-(store, year) across subcategories.
struct WeightTable {
  // parallel arrays sorted by (year, product) / (year, subcategory)
  std::vector<int> product_year, product_id;
  std::vector<double> product_share;
  std::vector<int> subcat_year, subcat_id;
  std::vector<double> subcat_share;
};

enum class WeightMeasure { Revenue, WholesaleExpenditure };

WeightTable compute_weights(const ProductMonthPanel& panel, const ProductCatalog& catalog,
                            int store, WeightMeasure measure, WeightYear year_mode);

struct StoreMonthSeries {
  SeriesTable log_price;
  SeriesTable log_quantity;
  SeriesTable log_cost;
};

struct IndexOptions {
  WeightYear weight_year = WeightYear::Calendar;
  int threads = 1;
};

/// Builds the three store-level log index series (price, quantity, wholesale
/// cost) over panel.month_min..month_max. Gap months are NaN; first
/// differences never bridge gaps.
StoreMonthSeries compute_indexes(const ProductMonthPanel& panel, const ProductCatalog& catalog,
                                 int n_stores, const IndexOptions& options = {});

/// Clamps a series at pooled nearest-rank percentile bounds across all
/// store-months with defined values.
SeriesTable winsorize_series(const SeriesTable& series, double lower = 0.005,
                             double upper = 0.995);

} // namespace crimepass::indexes
