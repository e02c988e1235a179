#include "crimepass/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "crimepass/csv.hpp"
#include "crimepass/ingest.hpp"
#include "crimepass/parallel.hpp"

namespace crimepass::pipeline {

namespace fs = std::filesystem;
using config::Outcome;
using config::PipelineConfig;
using stacking::TreatmentGroup;

struct Pipeline::Cache {
  bool have_dataset = false;
  Dataset dataset;
  simulator::GroundTruth truth;
  bool have_truth = false;

  bool have_panel = false;
  ProductMonthPanel panel;

  bool have_series = false;
  indexes::StoreMonthSeries series;
  std::map<int, SeriesTable> winsorized; // per outcome enum value

  bool have_dist = false;
  spatial::DistanceMatrix dist;

  bool have_cohorts = false;
  stacking::CohortAssignment cohorts;
  stacking::SubExperimentSet subs;

  bool have_revenue = false;
  SeriesTable revenue;
};

Pipeline::Pipeline(PipelineConfig config, std::string out_dir)
    : config_(std::move(config)), out_dir_(std::move(out_dir)), cache_(new Cache) {
  fs::create_directories(out_dir_);
}

int Pipeline::threads() const {
  return threads_override_ >= 0 ? threads_override_ : config_.threads;
}

const Dataset& Pipeline::dataset() {
  if (!cache_->have_dataset) {
    if (config_.simulate) {
      auto market = simulator::generate(*config_.simulate, threads());
      cache_->dataset = std::move(market.data);
      cache_->truth = std::move(market.truth);
      cache_->have_truth = true;
    } else {
      ingest::Options options;
      options.sample_start = config_.sample_start;
      options.sample_end = config_.sample_end;
      cache_->dataset = ingest::ingest_tables(*config_.stores_csv, *config_.transactions_csv,
                                              *config_.crimes_csv, options);
    }
    cache_->have_dataset = true;
  }
  return cache_->dataset;
}

const ProductMonthPanel& Pipeline::panel() {
  if (!cache_->have_panel) {
    cache_->panel = ingest::build_product_month_panel(dataset());
    cache_->have_panel = true;
  }
  return cache_->panel;
}

const indexes::StoreMonthSeries& Pipeline::series() {
  if (!cache_->have_series) {
    indexes::IndexOptions options;
    options.weight_year = config_.weight_year;
    options.threads = threads();
    cache_->series = indexes::compute_indexes(panel(), dataset().products,
                                              dataset().stores.size(), options);
    cache_->have_series = true;
  }
  return cache_->series;
}

const spatial::DistanceMatrix& Pipeline::distances() {
  if (!cache_->have_dist) {
    cache_->dist = spatial::DistanceMatrix::build(dataset().stores, threads());
    cache_->have_dist = true;
  }
  return cache_->dist;
}

const SeriesTable& Pipeline::revenue_by_month() {
  if (!cache_->have_revenue) {
    const auto& pm = panel();
    cache_->revenue = SeriesTable::empty(dataset().stores.size(), pm.month_min,
                                         std::max(pm.month_min, pm.month_max));
    for (auto& v : cache_->revenue.values) v = 0.0;
    for (const auto& cell : pm.cells)
      cache_->revenue.at(cell.store, cell.month) += cell.retail_revenue;
    cache_->have_revenue = true;
  }
  return cache_->revenue;
}

namespace {

stacking::StackingConfig base_stacking_config(const PipelineConfig& config) {
  stacking::StackingConfig sc;
  sc.k = config.window_k;
  sc.market = config.market;
  sc.contamination = config.contamination;
  return sc;
}

const SeriesTable& outcome_series(const indexes::StoreMonthSeries& series, Outcome outcome) {
  switch (outcome) {
    case Outcome::Price: return series.log_price;
    case Outcome::Quantity: return series.log_quantity;
    case Outcome::Cost: return series.log_cost;
  }
  return series.log_price;
}

} // namespace

const stacking::CohortAssignment& Pipeline::cohorts() {
  if (!cache_->have_cohorts) {
    auto sc = base_stacking_config(config_);
    cache_->cohorts = stacking::assign_cohorts(dataset().stores, distances(), dataset().crimes, sc);
    cache_->subs = stacking::build_all_sub_experiments(cache_->cohorts, dataset().stores,
                                                       distances(), dataset().crimes, sc);
    cache_->have_cohorts = true;
  }
  return cache_->cohorts;
}

const stacking::SubExperimentSet& Pipeline::sub_experiments() {
  cohorts();
  return cache_->subs;
}

stacking::StackedPanel Pipeline::stacked(TreatmentGroup group, Outcome outcome, bool winsorized) {
  auto sc = base_stacking_config(config_);
  const SeriesTable* s = &outcome_series(series(), outcome);
  if (winsorized) {
    auto key = static_cast<int>(outcome);
    auto it = cache_->winsorized.find(key);
    if (it == cache_->winsorized.end())
      it = cache_->winsorized
               .emplace(key, indexes::winsorize_series(*s, config_.winsor_lower,
                                                       config_.winsor_upper))
               .first;
    s = &it->second;
  }
  return stacking::stack(sub_experiments(), cohorts(), *s, group, sc);
}

estimator::EffectPath Pipeline::estimate_baseline(TreatmentGroup group, Outcome outcome) {
  return estimator::fit_distributed_lag(stacked(group, outcome));
}

namespace {

std::string hash_comment(const PipelineConfig& config) {
  return "config_hash=" + config.config_hash;
}

void write_dataset_csvs(const Dataset& data, const std::string& dir,
                        const std::string& comment) {
  {
    csv::Writer w(dir + "/stores.csv",
                  {"store_id", "latitude", "longitude", "firm_id", "urban_flag"}, comment);
    for (int s = 0; s < data.stores.size(); ++s)
      w.row({data.stores.id[s], format_double(data.stores.latitude[s]),
             format_double(data.stores.longitude[s]), data.stores.firm_id[s],
             data.stores.urban[s] ? "1" : "0"});
  }
  {
    csv::Writer w(dir + "/transactions.csv",
                  {"store_id", "product_producer", "product_category", "product_name",
                   "unit_weight", "month", "retail_revenue", "retail_quantity",
                   "wholesale_expenditure", "wholesale_quantity"},
                  comment);
    const auto& products = data.products;
    for (const auto& t : data.transactions) {
      w.row({data.stores.id[t.store], products.producer[t.product],
             products.category[t.product], products.name[t.product],
             is_missing(products.unit_weight[t.product])
                 ? std::string()
                 : format_double(products.unit_weight[t.product]),
             format_month(t.month), format_double(t.retail_revenue),
             format_double(t.retail_quantity), format_double(t.wholesale_expenditure),
             format_double(t.wholesale_quantity)});
    }
  }
  {
    csv::Writer w(dir + "/crimes.csv", {"store_id", "month", "kind"}, comment);
    for (const auto& c : data.crimes)
      w.row({data.stores.id[c.store], format_month(c.month),
             c.kind == CrimeKind::Robbery ? "robbery" : "burglary"});
  }
}

} // namespace

void Pipeline::run_simulate() {
  if (!config_.simulate)
    fail(ErrorKind::Config, "simulate stage requires a 'simulate' config block");
  dataset();
  write_dataset_csvs(cache_->dataset, out_dir_, hash_comment(config_));
  csv::Writer w(out_dir_ + "/ground_truth.csv", {"group", "L", "true_E_L"},
                hash_comment(config_));
  for (std::size_t L = 0; L < cache_->truth.victim_cum.size(); ++L)
    w.row({"victimized", std::to_string(L), format_double(cache_->truth.victim_cum[L])});
  for (std::size_t L = 0; L < cache_->truth.rival_cum.size(); ++L)
    w.row({"rivals", std::to_string(L), format_double(cache_->truth.rival_cum[L])});
}

void Pipeline::run_index() {
  const auto& s = series();
  const auto& stores = dataset().stores;
  csv::Writer w(out_dir_ + "/indexes.csv",
                {"store_id", "month", "log_price_index", "log_quantity_index", "log_cost_index"},
                hash_comment(config_));
  auto field = [](double v) { return is_missing(v) ? std::string() : format_double(v); };
  for (int store = 0; store < stores.size(); ++store) {
    for (int m = s.log_price.month_min; m <= s.log_price.month_max; ++m) {
      double p = s.log_price.at(store, m);
      double q = s.log_quantity.at(store, m);
      double c = s.log_cost.at(store, m);
      if (is_missing(p) && is_missing(q) && is_missing(c)) continue;
      w.row({stores.id[store], format_month(m), field(p), field(q), field(c)});
    }
  }
}

void Pipeline::run_stack() {
  const auto& stores = dataset().stores;
  cohorts();
  {
    csv::Writer w(out_dir_ + "/market_sets.csv", {"incident_id", "store_id", "role"},
                  hash_comment(config_));
    for (const auto& sub : cache_->subs.subs) {
      std::string incident = stores.id[sub.victim] + "@" + format_month(sub.month);
      w.row({incident, stores.id[sub.victim], "victim"});
      for (int s : sub.treated_rivals) w.row({incident, stores.id[s], "rival"});
      for (int s : sub.controls) w.row({incident, stores.id[s], "control"});
    }
  }
  {
    csv::Writer w(out_dir_ + "/dropped_incidents.csv", {"incident_id", "reason"},
                  hash_comment(config_));
    for (const auto& drop : cache_->subs.dropped) {
      const auto& ev = cache_->cohorts.events[drop.event];
      w.row({stores.id[ev.victim] + "@" + format_month(ev.month), drop.reason});
    }
  }
  for (auto group : config_.groups) {
    for (auto outcome : config_.outcomes) {
      auto panel = stacked(group, outcome);
      std::vector<std::string> header = {"d", "store_id", "month", "outcome"};
      for (int l = -config_.window_k + 1; l <= config_.window_k; ++l)
        header.push_back("dT_l" + std::string(l < 0 ? "m" : "") + std::to_string(std::abs(l)));
      header.push_back("weight");
      csv::Writer w(out_dir_ + "/stacked_" + config::group_name(group) + "_" +
                        config::outcome_name(outcome) + ".csv",
                    header, hash_comment(config_));
      std::vector<std::string> fields;
      for (std::size_t i = 0; i < panel.rows(); ++i) {
        fields.clear();
        fields.push_back(std::to_string(panel.sub[i]));
        fields.push_back(stores.id[panel.store[i]]);
        fields.push_back(format_month(panel.month[i]));
        fields.push_back(format_double(panel.outcome[i]));
        for (int l = -config_.window_k + 1; l <= config_.window_k; ++l)
          fields.push_back(panel.lag[i] == l ? "1" : "0");
        fields.push_back(format_double(panel.weight[i]));
        w.row(fields);
      }
    }
  }
}

void write_effect_path_csv(const std::string& path, const EffectPathRows& rows,
                           const std::string& config_hash) {
  csv::Writer w(path, {"outcome", "group", "kind", "L", "estimate", "se", "n", "clusters"},
                "config_hash=" + config_hash);
  const auto& p = rows.path;
  auto emit = [&](const std::string& kind, int L, double est, double se) {
    w.row({rows.outcome, rows.group, kind, std::to_string(L), format_double(est),
           format_double(se), std::to_string(p.n), std::to_string(p.clusters)});
  };
  for (std::size_t i = 0; i < p.lags.size(); ++i)
    emit("beta", p.lags[i], p.beta[static_cast<Eigen::Index>(i)],
         std::sqrt(std::max(0.0, p.vcov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)))));
  for (int L = 0; L <= p.k; ++L) emit("E", L, p.cum_effect[L], p.cum_se[L]);
  for (int L = 2; L <= p.k; ++L)
    emit("P", -L, p.pre_effect[static_cast<std::size_t>(L) - 2],
         p.pre_se[static_cast<std::size_t>(L) - 2]);
}

namespace {

struct ControlsTable {
  std::vector<std::string> names;
  std::map<std::pair<int, int>, std::vector<double>> values; // (store, month)
};

ControlsTable load_controls(const std::string& path, const StoreTable& stores) {
  ControlsTable table;
  csv::Reader reader(path);
  auto c_store = reader.column("store_id");
  auto c_month = reader.column("month");
  for (std::size_t i = 0; i < reader.header().size(); ++i)
    if (i != c_store && i != c_month) table.names.push_back(reader.header()[i]);
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    int store = stores.lookup(fields[c_store]);
    if (store < 0)
      fail(ErrorKind::UnknownStore, path + ": unknown store_id '" + fields[c_store] + "'");
    auto month = parse_month(fields[c_month]);
    if (!month) fail(ErrorKind::MalformedRow, path + ": bad month '" + fields[c_month] + "'");
    std::vector<double> row;
    for (std::size_t i = 0; i < reader.header().size(); ++i) {
      if (i == c_store || i == c_month) continue;
      auto v = parse_double(fields[i]);
      if (!v) fail(ErrorKind::MalformedRow, path + ": non-numeric control value");
      row.push_back(*v);
    }
    table.values[{store, *month}] = std::move(row);
  }
  return table;
}

// Rows without control values drop out listwise.
std::pair<stacking::StackedPanel, std::vector<std::vector<double>>> merge_controls(
    const stacking::StackedPanel& panel, const ControlsTable& controls) {
  stacking::StackedPanel out;
  out.k = panel.k;
  out.sub_event = panel.sub_event;
  out.sub_victim = panel.sub_victim;
  out.sub_month = panel.sub_month;
  out.sub_treated = panel.sub_treated;
  std::vector<std::vector<double>> columns(controls.names.size());
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    auto it = controls.values.find({panel.store[i], panel.month[i]});
    if (it == controls.values.end()) continue;
    out.sub.push_back(panel.sub[i]);
    out.store.push_back(panel.store[i]);
    out.month.push_back(panel.month[i]);
    out.outcome.push_back(panel.outcome[i]);
    out.lag.push_back(panel.lag[i]);
    out.weight.push_back(panel.weight[i]);
    for (std::size_t c = 0; c < columns.size(); ++c) columns[c].push_back(it->second[c]);
  }
  return {std::move(out), std::move(columns)};
}

} // namespace

void Pipeline::run_estimate() {
  const auto& stores = dataset().stores;
  auto sc = base_stacking_config(config_);
  int sample_start = config_.sample_start.value_or(panel().month_min);
  int sample_end = config_.sample_end.value_or(panel().month_max);

  auto emit = [&](const std::string& outcome, const std::string& group,
                  const std::string& variant, const estimator::EffectPath& path) {
    EffectPathRows rows{outcome, group, variant, path};
    std::string name = "effect_path_" + outcome + "_" + group;
    if (!variant.empty()) name += "__" + variant;
    write_effect_path_csv(out_dir_ + "/" + name + ".csv", rows, config_.config_hash);
  };

  for (auto outcome : config_.outcomes) {
    for (auto group : config_.groups) {
      std::string oname = config::outcome_name(outcome);
      std::string gname = config::group_name(group);

      auto base_panel = stacked(group, outcome);
      auto baseline = estimator::fit_distributed_lag(base_panel);
      emit(oname, gname, "", baseline);

      if (config_.robustness.winsorize) {
        auto fit = estimator::fit_distributed_lag(stacked(group, outcome, true));
        emit(oname, gname, "winsorized", fit);
      }
      if (config_.robustness.placebo) {
        auto shifted = stacking::placebo_shift(dataset().crimes, config_.placebo_offset);
        auto cohorts2 = stacking::assign_cohorts(stores, distances(), shifted, sc);
        auto subs2 =
            stacking::build_all_sub_experiments(cohorts2, stores, distances(), shifted, sc);
        auto panel2 = stacking::stack(subs2, cohorts2, outcome_series(series(), outcome), group, sc);
        emit(oname, gname, "placebo", estimator::fit_distributed_lag(panel2));
      }
      stacking::StackedPanel balanced;
      if (config_.robustness.balanced || config_.robustness.wing_weights)
        balanced = stacking::balanced_filter(base_panel, sample_start, sample_end);
      if (config_.robustness.balanced)
        emit(oname, gname, "balanced", estimator::fit_distributed_lag(balanced));
      if (config_.robustness.wing_weights) {
        // weights mirror the balanced-sample column when balancing is on
        const auto& src = config_.robustness.balanced ? balanced : base_panel;
        auto weighted = stacking::wing_weights(src);
        estimator::FitOptions options;
        options.use_weights = true;
        std::string variant = config_.robustness.balanced ? "balanced_wing" : "wing";
        emit(oname, gname, variant, estimator::fit_distributed_lag(weighted, options));
      }
      if (config_.robustness.multi_treatment && group == TreatmentGroup::Victimized) {
        auto sc2 = sc;
        sc2.victim_mode = stacking::VictimMode::MultiTreatment;
        auto cohorts2 = stacking::assign_cohorts(stores, distances(), dataset().crimes, sc2);
        auto subs2 = stacking::build_all_sub_experiments(cohorts2, stores, distances(),
                                                         dataset().crimes, sc2);
        auto panel2 =
            stacking::stack(subs2, cohorts2, outcome_series(series(), outcome), group, sc2);
        emit(oname, gname, "multi_treatment", estimator::fit_distributed_lag(panel2));
      }
      if (config_.robustness.single_rival_treatment && group == TreatmentGroup::Rivals) {
        auto sc2 = sc;
        sc2.rival_mode = stacking::RivalMode::CensorBeforeSecond;
        auto cohorts2 = stacking::assign_cohorts(stores, distances(), dataset().crimes, sc2);
        auto subs2 = stacking::build_all_sub_experiments(cohorts2, stores, distances(),
                                                         dataset().crimes, sc2);
        auto panel2 =
            stacking::stack(subs2, cohorts2, outcome_series(series(), outcome), group, sc2);
        emit(oname, gname, "single_rival", estimator::fit_distributed_lag(panel2));
      }
      if (config_.robustness.single_intensity_rivals && group == TreatmentGroup::Rivals) {
        auto sc2 = sc;
        sc2.exclude_multi_intensity_rivals = true;
        auto cohorts2 = stacking::assign_cohorts(stores, distances(), dataset().crimes, sc2);
        auto subs2 = stacking::build_all_sub_experiments(cohorts2, stores, distances(),
                                                         dataset().crimes, sc2);
        auto panel2 =
            stacking::stack(subs2, cohorts2, outcome_series(series(), outcome), group, sc2);
        emit(oname, gname, "single_intensity", estimator::fit_distributed_lag(panel2));
      }
      if (config_.robustness.twfe) {
        auto panel2 = stacking::twfe_panel(cohorts(), outcome_series(series(), outcome), group, sc);
        emit(oname, gname, "twfe", estimator::fit_distributed_lag(panel2));
      }
      if (config_.controls_csv) {
        auto controls = load_controls(*config_.controls_csv, stores);
        auto [panel2, columns] = merge_controls(base_panel, controls);
        estimator::FitOptions options;
        options.controls = &columns;
        options.control_names = controls.names;
        emit(oname, gname, "controls", estimator::fit_distributed_lag(panel2, options));
      }

      for (const auto& rule_name : config_.heterogeneity) {
        stacking::SplitRule rule = rule_name == "chain" ? stacking::SplitRule::Chain
                                   : rule_name == "hhi" ? stacking::SplitRule::Hhi
                                                        : stacking::SplitRule::HhiUrbanAdjusted;
        stacking::SplitContext ctx;
        ctx.stores = &stores;
        ctx.dist = &distances();
        ctx.revenue = &revenue_by_month();
        ctx.market_radius = config_.market.rival_radius;
        auto split = stacking::heterogeneity_split(base_panel, rule, ctx);
        std::string low = rule_name == "chain" ? rule_name + "_independent" : rule_name + "_low";
        std::string high = rule_name == "chain" ? rule_name + "_chain" : rule_name + "_high";
        if (split.first.rows() > 0)
          emit(oname, gname, low, estimator::fit_distributed_lag(split.first));
        if (split.second.rows() > 0)
          emit(oname, gname, high, estimator::fit_distributed_lag(split.second));
      }
    }
  }
}

passthrough::Estimate Pipeline::passthrough_estimate() {
  passthrough::BuildOptions options;
  options.n_bins = config_.passthrough.bins;
  options.bin_width = config_.passthrough.bin_width_miles;
  options.variant = config_.passthrough.variant;
  if (config_.passthrough.sample == config::PassthroughSample::Affected) {
    const auto& co = cohorts();
    options.row_stores.assign(dataset().stores.size(), 0);
    bool any = false;
    for (int s = 0; s < dataset().stores.size(); ++s) {
      bool affected = co.ever_victimized[s] || co.rival_cohort_month[s] >= 0;
      options.row_stores[s] = affected;
      any = any || affected;
    }
    if (!any)
      fail(ErrorKind::EmptyPanel,
           "no affected stores for the pass-through sample; use passthrough.sample = \"all\"");
  }
  auto pt_panel = passthrough::build_panel(panel(), distances(), options);
  passthrough::Spec spec;
  spec.included_bins = config_.passthrough.bins;
  spec.region_time_fe = config_.passthrough.region_time_fe;
  spec.region_grid_degrees = config_.passthrough.region_grid_degrees;
  return passthrough::estimate(pt_panel, dataset().stores, spec);
}

void Pipeline::run_passthrough() {
  if (!config_.passthrough.enabled)
    fail(ErrorKind::Config, "passthrough stage requires passthrough.enabled = true");
  auto est = passthrough_estimate();
  csv::Writer w(out_dir_ + "/passthrough.csv", {"term", "estimate", "se", "n", "clusters"},
                hash_comment(config_));
  auto row = [&](const std::string& term, double estimate, double se) {
    w.row({term, format_double(estimate), format_double(se), std::to_string(est.n),
           std::to_string(est.clusters)});
  };
  row("own_cost", est.own, est.own_se);
  for (std::size_t r = 0; r < est.bin_beta.size(); ++r)
    row("rival_cost_bin" + std::to_string(r + 1), est.bin_beta[r], est.bin_se[r]);
  for (std::size_t r = 0; r < est.cum.size(); ++r)
    row("cum_bin" + std::to_string(r + 1), est.cum[r], est.cum_se[r]);
}

void Pipeline::run_welfare() {
  if (!config_.welfare.enabled)
    fail(ErrorKind::Config, "welfare stage requires a 'welfare' config block");
  const auto& wc = config_.welfare;
  double rho = wc.rho ? *wc.rho : welfare::passthrough_rate(*wc.primitives);
  double tau = wc.tau ? *wc.tau : welfare::hidden_unit_tax(*wc.semi_elasticity, wc.mean_price, rho);
  auto report = welfare::welfare_effects(tau, rho, wc.theta, wc.annual_units, wc.mean_price);

  {
    csv::Writer w(out_dir_ + "/welfare_report.csv", {"field", "value"}, hash_comment(config_));
    auto row = [&](const std::string& field, double value) {
      w.row({field, format_double(value)});
    };
    row("tau", report.tau);
    row("rho", report.rho);
    row("theta", report.theta);
    row("annual_units", report.annual_units);
    row("mean_price", report.mean_price);
    row("price_change", report.price_change);
    row("consumer_surplus", report.consumer_surplus);
    row("producer_surplus", report.producer_surplus);
    row("total_harm", report.total_harm);
    row("fictional_revenue", report.fictional_revenue);
    row("excess_burden", report.excess_burden);
    row("incidence", report.incidence);
    row("consumer_share", report.consumer_share);
  }
  {
    std::ofstream out(out_dir_ + "/welfare_report.txt");
    char buf[256];
    out << "Hidden unit tax welfare report\n";
    out << "==============================\n";
    std::snprintf(buf, sizeof(buf),
                  "inputs: tau=$%.4f/unit, rho=%.4f $/$, theta=%.4f, q=%.0f units/yr, "
                  "mean price=$%.2f\n",
                  report.tau, report.rho, report.theta, report.annual_units, report.mean_price);
    out << buf;
    std::snprintf(buf, sizeof(buf), "unit price change:        $%.4f\n", report.price_change);
    out << buf;
    std::snprintf(buf, sizeof(buf), "consumer surplus:        %+.3f M$/yr\n",
                  report.consumer_surplus / 1e6);
    out << buf;
    std::snprintf(buf, sizeof(buf), "producer surplus:        %+.3f M$/yr\n",
                  report.producer_surplus / 1e6);
    out << buf;
    std::snprintf(buf, sizeof(buf), "total harm:               %.3f M$/yr\n",
                  report.total_harm / 1e6);
    out << buf;
    std::snprintf(buf, sizeof(buf), "fictional tax revenue:    %.3f M$/yr\n",
                  report.fictional_revenue / 1e6);
    out << buf;
    std::snprintf(buf, sizeof(buf), "excess burden:            %.3f M$/yr\n",
                  report.excess_burden / 1e6);
    out << buf;
    std::snprintf(buf, sizeof(buf), "incidence (CS/PS):        %.4f\n", report.incidence);
    out << buf;
    std::snprintf(buf, sizeof(buf), "consumer share:           %.1f%%\n",
                  100.0 * report.consumer_share);
    out << buf;
  }
  if (wc.sweep) {
    auto rows = welfare::sensitivity_sweep(tau, rho, wc.annual_units, wc.mean_price,
                                           wc.sweep_theta_lo, wc.sweep_theta_hi, wc.sweep_steps);
    csv::Writer w(out_dir_ + "/welfare_sweep.csv",
                  {"theta", "rho", "consumer_surplus", "producer_surplus", "excess_burden",
                   "incidence", "consumer_share", "incidence_increased"},
                  hash_comment(config_));
    for (const auto& r : rows)
      w.row({format_double(r.theta), format_double(r.rho),
             format_double(r.report.consumer_surplus), format_double(r.report.producer_surplus),
             format_double(r.report.excess_burden), format_double(r.report.incidence),
             format_double(r.report.consumer_share), r.incidence_increased ? "1" : "0"});
  }
}

void Pipeline::run_report() {
  std::vector<std::string> csvs;
  for (const auto& entry : fs::directory_iterator(out_dir_)) {
    auto name = entry.path().filename().string();
    if (name.rfind("effect_path_", 0) == 0 && entry.path().extension() == ".csv")
      csvs.push_back(entry.path().string());
  }
  std::sort(csvs.begin(), csvs.end());
  std::set<std::string> hashes;
  for (const auto& path : csvs) {
    csv::Reader reader(path);
    hashes.insert(reader.comment());
  }
  if (hashes.size() > 1)
    fail(ErrorKind::Config, "report inputs carry mixed config hashes; rerun the pipeline");
  if (!config_.figures) return;
  for (const auto& path : csvs) {
    auto svg = path.substr(0, path.size() - 4) + ".svg";
    render_effect_path_svg(path, svg);
  }
}

void Pipeline::run(const std::string& stage) {
  if (stage == "simulate") run_simulate();
  else if (stage == "index") run_index();
  else if (stage == "stack") run_stack();
  else if (stage == "estimate") run_estimate();
  else if (stage == "passthrough") run_passthrough();
  else if (stage == "welfare") run_welfare();
  else if (stage == "report") run_report();
  else if (stage == "all") {
    if (config_.simulate) run_simulate();
    run_index();
    run_stack();
    run_estimate();
    if (config_.passthrough.enabled) run_passthrough();
    if (config_.welfare.enabled) run_welfare();
    run_report();
  } else {
    fail(ErrorKind::Config,
         "unknown stage '" + stage +
             "'; expected simulate, index, stack, estimate, passthrough, welfare, report, or all");
  }
}

} // namespace crimepass::pipeline
