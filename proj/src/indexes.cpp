#include "crimepass/indexes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "crimepass/parallel.hpp"

namespace crimepass::indexes {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

} // namespace

int weight_year_of(int month, WeightYear mode) {
  return mode == WeightYear::Calendar ? floor_div(month, 12) : floor_div(month - 6, 12);
}

std::optional<double> subcategory_log_relative(const std::vector<MatchedProduct>& matched) {
  if (matched.empty()) return std::nullopt;
  double total = 0;
  for (const auto& m : matched) total += m.annual_value;
  if (total <= 0) return std::nullopt;
  double log_rel = 0;
  for (const auto& m : matched) {
    if (m.prior <= 0 || m.current <= 0)
      fail(ErrorKind::NonPositivePrice, "matched product with non-positive value in relative");
    log_rel += (m.annual_value / total) * std::log(m.current / m.prior);
  }
  return log_rel;
}

std::optional<double> store_log_index(
    const std::vector<std::pair<double, double>>& rel_and_weight) {
  if (rel_and_weight.empty()) return std::nullopt;
  double total = 0;
  for (const auto& [rel, w] : rel_and_weight) total += w;
  if (total <= 0) return std::nullopt;
  double log_index = 0;
  for (const auto& [rel, w] : rel_and_weight) log_index += (w / total) * rel;
  return log_index;
}

WeightTable compute_weights(const ProductMonthPanel& panel, const ProductCatalog& catalog,
                            int store, WeightMeasure measure, WeightYear year_mode) {
  std::map<std::pair<int, int>, double> product_totals; // (year, product)
  std::map<std::pair<int, int>, double> subcat_totals;  // (year, subcat)
  auto begin = panel.store_begin[store];
  auto end = panel.store_begin[static_cast<std::size_t>(store) + 1];
  for (auto i = begin; i < end; ++i) {
    const auto& cell = panel.cells[i];
    int year = weight_year_of(cell.month, year_mode);
    double value = measure == WeightMeasure::Revenue ? cell.retail_revenue
                                                     : cell.wholesale_expenditure;
    product_totals[{year, cell.product}] += value;
    subcat_totals[{year, catalog.subcategory[cell.product]}] += value;
  }
  std::map<int, double> year_totals;
  for (const auto& [key, v] : subcat_totals) year_totals[key.first] += v;

  WeightTable table;
  for (const auto& [key, v] : product_totals) {
    auto [year, product] = key;
    double denom = subcat_totals[{year, catalog.subcategory[product]}];
    table.product_year.push_back(year);
    table.product_id.push_back(product);
    table.product_share.push_back(denom > 0 ? v / denom : 0.0);
  }
  for (const auto& [key, v] : subcat_totals) {
    auto [year, subcat] = key;
    double denom = year_totals[year];
    table.subcat_year.push_back(year);
    table.subcat_id.push_back(subcat);
    table.subcat_share.push_back(denom > 0 ? v / denom : 0.0);
  }
  return table;
}

namespace {

enum class Outcome { Price, Quantity, Cost };

double cell_value(const ProductMonthCell& cell, Outcome outcome) {
  switch (outcome) {
    case Outcome::Price: return cell.retail_price;
    case Outcome::Quantity: return cell.retail_quantity;
    case Outcome::Cost: return cell.wholesale_price;
  }
  return kNaN;
}

long long year_key(int year, int id) { return static_cast<long long>(year) * (1ll << 32) + id; }

void compute_store_series(const ProductMonthPanel& panel, const ProductCatalog& catalog,
                          int store, WeightYear year_mode, StoreMonthSeries& out) {
  auto begin = panel.store_begin[store];
  auto end = panel.store_begin[static_cast<std::size_t>(store) + 1];
  if (begin == end) return;

  int month_min = panel.month_min;
  int n_months = panel.month_max - panel.month_min + 1;

  // month slices stay product-sorted because cells are sorted by
  // (store, product, month)
  std::vector<std::vector<const ProductMonthCell*>> by_month(n_months);
  std::unordered_map<long long, double> annual_rev, annual_exp;          // (year, product)
  std::unordered_map<long long, double> subcat_rev, subcat_exp;          // (year, subcat)
  for (auto i = begin; i < end; ++i) {
    const auto& cell = panel.cells[i];
    by_month[cell.month - month_min].push_back(&cell);
    int year = weight_year_of(cell.month, year_mode);
    annual_rev[year_key(year, cell.product)] += cell.retail_revenue;
    annual_exp[year_key(year, cell.product)] += cell.wholesale_expenditure;
    int subcat = catalog.subcategory[cell.product];
    subcat_rev[year_key(year, subcat)] += cell.retail_revenue;
    subcat_exp[year_key(year, subcat)] += cell.wholesale_expenditure;
  }

  std::unordered_map<int, std::vector<MatchedProduct>> per_subcat;
  std::vector<std::pair<double, double>> rel_and_weight;
  std::vector<int> subcats;

  for (Outcome outcome : {Outcome::Price, Outcome::Quantity, Outcome::Cost}) {
    const auto& product_annual = outcome == Outcome::Cost ? annual_exp : annual_rev;
    const auto& subcat_annual = outcome == Outcome::Cost ? subcat_exp : subcat_rev;
    SeriesTable& series = outcome == Outcome::Price      ? out.log_price
                          : outcome == Outcome::Quantity ? out.log_quantity
                                                         : out.log_cost;
    for (int m = 1; m < n_months; ++m) {
      const auto& prev = by_month[m - 1];
      const auto& cur = by_month[m];
      if (prev.empty() || cur.empty()) continue;
      int year = weight_year_of(month_min + m, year_mode);

      per_subcat.clear();
      std::size_t a = 0, b = 0;
      while (a < prev.size() && b < cur.size()) {
        if (prev[a]->product < cur[b]->product) {
          ++a;
        } else if (cur[b]->product < prev[a]->product) {
          ++b;
        } else {
          double v0 = cell_value(*prev[a], outcome);
          double v1 = cell_value(*cur[b], outcome);
          if (!is_missing(v0) && !is_missing(v1)) {
            auto it = product_annual.find(year_key(year, prev[a]->product));
            double av = it == product_annual.end() ? 0.0 : it->second;
            per_subcat[catalog.subcategory[prev[a]->product]].push_back(
                MatchedProduct{v0, v1, av});
          }
          ++a;
          ++b;
        }
      }
      if (per_subcat.empty()) continue;

      subcats.clear();
      for (const auto& [sc_id, _] : per_subcat) subcats.push_back(sc_id);
      std::sort(subcats.begin(), subcats.end());
      rel_and_weight.clear();
      for (int sc_id : subcats) {
        auto rel = subcategory_log_relative(per_subcat[sc_id]);
        if (!rel) continue;
        auto it = subcat_annual.find(year_key(year, sc_id));
        rel_and_weight.emplace_back(*rel, it == subcat_annual.end() ? 0.0 : it->second);
      }
      auto log_index = store_log_index(rel_and_weight);
      if (log_index) series.at(store, month_min + m) = *log_index;
    }
  }
}

} // namespace

StoreMonthSeries compute_indexes(const ProductMonthPanel& panel, const ProductCatalog& catalog,
                                 int n_stores, const IndexOptions& options) {
  StoreMonthSeries out;
  int lo = panel.month_min;
  int hi = std::max(panel.month_max, panel.month_min);
  out.log_price = SeriesTable::empty(n_stores, lo, hi);
  out.log_quantity = SeriesTable::empty(n_stores, lo, hi);
  out.log_cost = SeriesTable::empty(n_stores, lo, hi);
  if (panel.cells.empty()) return out;
  parallel_for(static_cast<std::size_t>(n_stores), options.threads, [&](std::size_t s) {
    compute_store_series(panel, catalog, static_cast<int>(s), options.weight_year, out);
  });
  return out;
}

SeriesTable winsorize_series(const SeriesTable& series, double lower, double upper) {
  std::vector<double> pooled;
  pooled.reserve(series.values.size());
  for (double v : series.values)
    if (!is_missing(v)) pooled.push_back(v);
  SeriesTable out = series;
  if (pooled.empty()) return out;
  std::sort(pooled.begin(), pooled.end());
  double lo = nearest_rank_percentile(pooled, lower);
  double hi = nearest_rank_percentile(pooled, upper);
  for (double& v : out.values)
    if (!is_missing(v)) v = std::clamp(v, lo, hi);
  return out;
}

} // namespace crimepass::indexes
