#include "crimepass/passthrough.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "crimepass/estimator.hpp"

namespace crimepass::passthrough {

namespace {

struct ProductCell {
  int store;
  int month;
  double price;
  double wholesale; // NaN when absent
};

// own-covariate pair (price term, cost term) for one store-product-month
// under the requested variant; NaN marks an undefined term
struct Terms {
  double price = kNaN;
  double cost = kNaN;
};

Terms make_terms(const ProductCell* prev, const ProductCell& cur, Variant variant) {
  Terms t;
  switch (variant) {
    case Variant::FdDollars:
      if (prev) {
        t.price = cur.price - prev->price;
        if (!is_missing(cur.wholesale) && !is_missing(prev->wholesale))
          t.cost = cur.wholesale - prev->wholesale;
      }
      break;
    case Variant::Levels:
      t.price = cur.price;
      t.cost = cur.wholesale;
      break;
    case Variant::FdLogs:
      if (prev && cur.price > 0 && prev->price > 0) t.price = std::log(cur.price / prev->price);
      if (prev && !is_missing(cur.wholesale) && !is_missing(prev->wholesale) &&
          cur.wholesale > 0 && prev->wholesale > 0)
        t.cost = std::log(cur.wholesale / prev->wholesale);
      break;
  }
  return t;
}

} // namespace

Panel build_panel(const ProductMonthPanel& pm, const spatial::DistanceMatrix& dist,
                  const BuildOptions& options) {
  Panel panel;
  panel.n_bins = options.n_bins;
  panel.bin_width = options.bin_width;
  panel.variant = options.variant;

  int max_product = -1;
  for (const auto& cell : pm.cells) max_product = std::max(max_product, cell.product);
  std::vector<std::vector<ProductCell>> by_product(static_cast<std::size_t>(max_product) + 1);
  for (const auto& cell : pm.cells)
    by_product[cell.product].push_back(
        {cell.store, cell.month, cell.retail_price, cell.wholesale_price});

  bool restrict_rows = !options.row_stores.empty();
  std::vector<double> bin_sum(options.n_bins), bin_count(options.n_bins);

  for (auto& cells : by_product) {
    if (cells.empty()) continue;
    // cells arrive sorted by (store, month); derive per-month cost terms for
    // binning and per-row candidates in one walk
    std::unordered_map<int, std::vector<std::pair<int, double>>> cost_by_month;
    std::unordered_map<int, std::vector<std::pair<int, Terms>>> rows_by_month;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const ProductCell* prev =
          (i > 0 && cells[i - 1].store == cells[i].store && cells[i - 1].month == cells[i].month - 1)
              ? &cells[i - 1]
              : nullptr;
      Terms t = make_terms(prev, cells[i], options.variant);
      if (!is_missing(t.cost)) cost_by_month[cells[i].month].emplace_back(cells[i].store, t.cost);
      bool eligible = !restrict_rows || options.row_stores[cells[i].store];
      if (eligible && !is_missing(t.cost) && !is_missing(t.price))
        rows_by_month[cells[i].month].emplace_back(cells[i].store, t);
    }

    std::vector<int> months;
    months.reserve(rows_by_month.size());
    for (const auto& [m, _] : rows_by_month) months.push_back(m);
    std::sort(months.begin(), months.end());
    for (int m : months) {
      auto& rows = rows_by_month[m];
      std::sort(rows.begin(), rows.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      const auto& costs = cost_by_month[m];
      for (const auto& [store, terms] : rows) {
        std::fill(bin_sum.begin(), bin_sum.end(), 0.0);
        std::fill(bin_count.begin(), bin_count.end(), 0.0);
        for (const auto& [other, cost] : costs) {
          if (other == store) continue;
          double d = dist(store, other);
          int bin = static_cast<int>(d / options.bin_width);
          if (bin < 0 || bin >= options.n_bins) continue;
          bin_sum[bin] += cost;
          bin_count[bin] += 1.0;
        }
        panel.store.push_back(store);
        panel.product.push_back(static_cast<int>(&cells - by_product.data()));
        panel.month.push_back(m);
        panel.own_price.push_back(terms.price);
        panel.own_cost.push_back(terms.cost);
        for (int r = 0; r < options.n_bins; ++r)
          panel.bins.push_back(bin_count[r] > 0 ? bin_sum[r] / bin_count[r] : kNaN);
      }
    }
  }
  return panel;
}

Estimate estimate(const Panel& panel, const StoreTable& stores, const Spec& spec) {
  int R = std::min(spec.included_bins, panel.n_bins);
  std::size_t n_controls = spec.controls ? spec.controls->size() : 0;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    bool ok = true;
    for (int r = 0; r < R && ok; ++r) ok = !is_missing(panel.bin(i, r));
    if (ok) keep.push_back(i);
  }
  if (keep.empty()) fail(ErrorKind::EmptyPanel, "pass-through panel has no usable rows");

  auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd design(n, 1 + R + static_cast<Eigen::Index>(n_controls));
  Eigen::VectorXd outcome(n);
  std::vector<int> month_fe(keep.size());
  std::vector<int> clusters(keep.size());
  std::vector<int> unit_fe;    // store-product cells for the level variant
  std::vector<int> region_fe;  // region x month when requested

  std::unordered_map<long long, int> unit_ids;
  auto region_of = [&](int store) {
    int gx = static_cast<int>(std::floor(stores.latitude[store] / spec.region_grid_degrees));
    int gy = static_cast<int>(std::floor(stores.longitude[store] / spec.region_grid_degrees));
    return gx * 1447 + gy;
  };
  std::unordered_map<long long, int> region_ids;

  if (panel.variant == Variant::Levels) unit_fe.resize(keep.size());
  if (spec.region_time_fe) region_fe.resize(keep.size());

  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t row = keep[static_cast<std::size_t>(i)];
    outcome[i] = panel.own_price[row];
    design(i, 0) = panel.own_cost[row];
    for (int r = 0; r < R; ++r) design(i, 1 + r) = panel.bin(row, r);
    for (std::size_t c = 0; c < n_controls; ++c)
      design(i, 1 + R + static_cast<Eigen::Index>(c)) = (*spec.controls)[c][row];
    month_fe[static_cast<std::size_t>(i)] = panel.month[row];
    clusters[static_cast<std::size_t>(i)] = panel.store[row];
    if (!unit_fe.empty()) {
      long long key = static_cast<long long>(panel.store[row]) * (1ll << 32) + panel.product[row];
      auto [it, _] = unit_ids.emplace(key, static_cast<int>(unit_ids.size()));
      unit_fe[static_cast<std::size_t>(i)] = it->second;
    }
    if (!region_fe.empty()) {
      long long key =
          static_cast<long long>(region_of(panel.store[row])) * (1ll << 32) + panel.month[row];
      auto [it, _] = region_ids.emplace(key, static_cast<int>(region_ids.size()));
      region_fe[static_cast<std::size_t>(i)] = it->second;
    }
  }

  std::vector<std::string> names;
  names.push_back("own_cost");
  for (int r = 1; r <= R; ++r) names.push_back("rival_cost_bin" + std::to_string(r));
  for (const auto& name : spec.control_names) names.push_back(name);

  std::vector<std::vector<int>> fe_keys;
  if (!unit_fe.empty()) fe_keys.push_back(unit_fe);
  fe_keys.push_back(month_fe);
  if (!region_fe.empty()) fe_keys.push_back(region_fe);

  auto fit = estimator::demeaned_ls(std::move(design), std::move(outcome), {}, fe_keys, clusters,
                                    names);

  Estimate est;
  est.own = fit.beta[0];
  est.own_se = std::sqrt(fit.vcov(0, 0));
  for (int r = 1; r <= R; ++r) {
    est.bin_beta.push_back(fit.beta[r]);
    est.bin_se.push_back(std::sqrt(fit.vcov(r, r)));
  }
  est.vcov = fit.vcov.topLeftCorner(1 + R, 1 + R);
  est.n = fit.n;
  est.clusters = fit.clusters;
  cumulative_bin_sums(est);
  return est;
}

void cumulative_bin_sums(Estimate& est) {
  est.cum.clear();
  est.cum_se.clear();
  auto R = static_cast<Eigen::Index>(est.bin_beta.size());
  for (Eigen::Index r = 1; r <= R; ++r) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(est.vcov.rows());
    double sum = 0;
    for (Eigen::Index i = 1; i <= r; ++i) {
      a[i] = 1.0;
      sum += est.bin_beta[static_cast<std::size_t>(i - 1)];
    }
    est.cum.push_back(sum);
    est.cum_se.push_back(std::sqrt(std::max(0.0, a.dot(est.vcov * a))));
  }
}

} // namespace crimepass::passthrough
