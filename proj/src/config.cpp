#include "crimepass/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace crimepass::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& detail) {
  fail(ErrorKind::Config, "config field '" + path + "': " + detail);
}

double number_at(const json& j, const std::string& path, const char* key, double fallback,
                 bool* present = nullptr) {
  if (!j.contains(key)) {
    if (present) *present = false;
    return fallback;
  }
  if (present) *present = true;
  if (!j[key].is_number()) bad(path + "." + key, "expected a number");
  return j[key].get<double>();
}

int int_at(const json& j, const std::string& path, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) bad(path + "." + key, "expected an integer");
  return j[key].get<int>();
}

bool bool_at(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) bad(path + "." + key, "expected true or false");
  return j[key].get<bool>();
}

std::string string_at(const json& j, const std::string& path, const char* key,
                      const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) bad(path + "." + key, "expected a string");
  return j[key].get<std::string>();
}

int month_at(const json& j, const std::string& path, const char* key) {
  std::string raw = j[key].is_string() ? j[key].get<std::string>()
                                       : std::to_string(j[key].get<long long>());
  auto m = parse_month(raw);
  if (!m) bad(path + "." + key, "expected a month like 2018-03 or an integer index");
  return *m;
}

welfare::ExtReal ext_at(const json& j, const std::string& path, const char* key,
                        welfare::ExtReal fallback) {
  if (!j.contains(key)) return fallback;
  if (j[key].is_string()) {
    auto s = j[key].get<std::string>();
    if (s == "inf" || s == "infinity") return welfare::ExtReal::infinity();
    bad(path + "." + key, "expected a number or \"inf\"");
  }
  if (!j[key].is_number()) bad(path + "." + key, "expected a number or \"inf\"");
  return welfare::ExtReal::finite(j[key].get<double>());
}

simulator::DgpConfig parse_simulate(const json& j, std::uint64_t seed) {
  simulator::DgpConfig c;
  c.seed = seed;
  const std::string p = "simulate";
  c.n_stores = int_at(j, p, "stores", c.n_stores);
  c.n_months = int_at(j, p, "months", c.n_months);
  if (j.contains("start_month")) c.start_month = month_at(j, p, "start_month");
  if (j.contains("layout")) {
    auto layout = string_at(j, p, "layout", "clustered_towns");
    if (layout == "uniform_box") c.layout = simulator::Layout::UniformBox;
    else if (layout == "clustered_towns") c.layout = simulator::Layout::ClusteredTowns;
    else bad(p + ".layout", "expected uniform_box or clustered_towns");
  }
  c.box_lat_min = number_at(j, p, "box_lat_min", c.box_lat_min);
  c.box_lat_max = number_at(j, p, "box_lat_max", c.box_lat_max);
  c.box_lon_min = number_at(j, p, "box_lon_min", c.box_lon_min);
  c.box_lon_max = number_at(j, p, "box_lon_max", c.box_lon_max);
  c.towns = int_at(j, p, "towns", c.towns);
  c.town_sigma_miles = number_at(j, p, "town_sigma_miles", c.town_sigma_miles);
  c.urban_towns = int_at(j, p, "urban_towns", c.urban_towns);
  c.products_per_store_mean = number_at(j, p, "products_per_store", c.products_per_store_mean);
  c.n_categories = int_at(j, p, "categories", c.n_categories);
  c.n_producers = int_at(j, p, "producers", c.n_producers);
  c.presence_prob = number_at(j, p, "presence_prob", c.presence_prob);
  c.base_price = number_at(j, p, "base_price", c.base_price);
  c.price_sigma_product = number_at(j, p, "price_sigma_product", c.price_sigma_product);
  c.store_markup_sigma = number_at(j, p, "store_markup_sigma", c.store_markup_sigma);
  c.ar1_coefficient = number_at(j, p, "ar1_coefficient", c.ar1_coefficient);
  c.ar1_sigma = number_at(j, p, "ar1_sigma", c.ar1_sigma);
  c.product_noise_sigma = number_at(j, p, "product_noise_sigma", c.product_noise_sigma);
  c.seasonal_amplitude = number_at(j, p, "seasonal_amplitude", c.seasonal_amplitude);
  c.crime_hazard = number_at(j, p, "crime_hazard", c.crime_hazard);
  c.crime_q4_multiplier = number_at(j, p, "crime_q4_multiplier", c.crime_q4_multiplier);
  c.robbery_share = number_at(j, p, "robbery_share", c.robbery_share);
  if (j.contains("victim_effect")) c.victim_effect = j["victim_effect"].get<std::vector<double>>();
  if (j.contains("rival_effect")) c.rival_effect = j["rival_effect"].get<std::vector<double>>();
  c.effect_radius_miles = number_at(j, p, "effect_radius_miles", c.effect_radius_miles);
  c.wholesale_base_ratio = number_at(j, p, "wholesale_base_ratio", c.wholesale_base_ratio);
  c.wholesale_sigma = number_at(j, p, "wholesale_sigma", c.wholesale_sigma);
  c.wholesale_own_passthrough =
      number_at(j, p, "wholesale_own_passthrough", c.wholesale_own_passthrough);
  c.wholesale_rival_response =
      number_at(j, p, "wholesale_rival_response", c.wholesale_rival_response);
  c.quantity_mean = number_at(j, p, "quantity_mean", c.quantity_mean);
  c.quantity_sigma = number_at(j, p, "quantity_sigma", c.quantity_sigma);
  c.wholesale_quantity_jitter =
      number_at(j, p, "wholesale_quantity_jitter", c.wholesale_quantity_jitter);
  return c;
}

} // namespace

PipelineConfig parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }

  PipelineConfig c;
  c.config_hash = to_hex(fnv1a64(j.dump()));
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  c.threads = int_at(j, "", "threads", 0);

  bool has_inputs = j.contains("inputs");
  bool has_sim = j.contains("simulate");
  if (has_inputs == has_sim)
    fail(ErrorKind::Config, "config must contain exactly one of 'inputs' and 'simulate'");
  if (has_inputs) {
    const auto& in = j["inputs"];
    for (const char* key : {"stores", "transactions", "crimes"})
      if (!in.contains(key) || !in[key].is_string())
        bad(std::string("inputs.") + key, "expected a file path");
    c.stores_csv = in["stores"].get<std::string>();
    c.transactions_csv = in["transactions"].get<std::string>();
    c.crimes_csv = in["crimes"].get<std::string>();
  } else {
    c.simulate = parse_simulate(j["simulate"], c.seed);
  }

  if (j.contains("sample")) {
    const auto& s = j["sample"];
    if (s.contains("start")) c.sample_start = month_at(s, "sample", "start");
    if (s.contains("end")) c.sample_end = month_at(s, "sample", "end");
  }
  if (c.simulate) {
    c.sample_start = c.simulate->start_month;
    c.sample_end = c.simulate->start_month + c.simulate->n_months - 1;
  }

  c.window_k = int_at(j, "", "window_k", c.window_k);
  if (c.window_k < 1) bad("window_k", "must be >= 1");

  if (j.contains("market")) {
    const auto& m = j["market"];
    auto mode = string_at(m, "market", "mode", "rings");
    if (mode == "rings") c.market.mode = stacking::BoundaryMode::Rings;
    else if (mode == "ranks") c.market.mode = stacking::BoundaryMode::Ranks;
    else if (mode == "urban_rural") c.market.mode = stacking::BoundaryMode::UrbanRural;
    else bad("market.mode", "expected rings, ranks, or urban_rural");
    c.market.rival_radius = number_at(m, "market", "rival_radius_miles", c.market.rival_radius);
    c.market.control_inner = number_at(m, "market", "control_inner_miles", c.market.control_inner);
    c.market.control_outer = number_at(m, "market", "control_outer_miles", c.market.control_outer);
    c.market.rank_rival_k = int_at(m, "market", "rank_rival_k", c.market.rank_rival_k);
    c.market.rank_ctrl_lo = int_at(m, "market", "rank_control_lo", c.market.rank_ctrl_lo);
    c.market.rank_ctrl_hi = int_at(m, "market", "rank_control_hi", c.market.rank_ctrl_hi);
    c.market.urban_inner = number_at(m, "market", "urban_inner_miles", c.market.urban_inner);
    c.market.urban_outer = number_at(m, "market", "urban_outer_miles", c.market.urban_outer);
  }

  auto contamination = string_at(j, "", "contamination", "main");
  if (contamination == "main") c.contamination = stacking::ContaminationMode::Main;
  else if (contamination == "strict") c.contamination = stacking::ContaminationMode::Strict;
  else bad("contamination", "expected main or strict");

  auto wyear = string_at(j, "", "weighting_year", "calendar");
  if (wyear == "calendar") c.weight_year = indexes::WeightYear::Calendar;
  else if (wyear == "fiscal_july") c.weight_year = indexes::WeightYear::FiscalJuly;
  else bad("weighting_year", "expected calendar or fiscal_july");

  if (j.contains("outcomes")) {
    c.outcomes.clear();
    for (const auto& o : j["outcomes"]) {
      auto s = o.get<std::string>();
      if (s == "price") c.outcomes.push_back(Outcome::Price);
      else if (s == "quantity") c.outcomes.push_back(Outcome::Quantity);
      else if (s == "cost") c.outcomes.push_back(Outcome::Cost);
      else bad("outcomes", "expected price, quantity, or cost, got '" + s + "'");
    }
  }
  if (j.contains("groups")) {
    c.groups.clear();
    for (const auto& g : j["groups"]) {
      auto s = g.get<std::string>();
      if (s == "victimized") c.groups.push_back(stacking::TreatmentGroup::Victimized);
      else if (s == "rivals") c.groups.push_back(stacking::TreatmentGroup::Rivals);
      else bad("groups", "expected victimized or rivals, got '" + s + "'");
    }
  }

  if (j.contains("robustness")) {
    const auto& r = j["robustness"];
    c.robustness.winsorize = bool_at(r, "robustness", "winsorize", false);
    c.robustness.placebo = bool_at(r, "robustness", "placebo", false);
    c.robustness.balanced = bool_at(r, "robustness", "balanced", false);
    c.robustness.wing_weights = bool_at(r, "robustness", "wing_weights", false);
    c.robustness.multi_treatment = bool_at(r, "robustness", "multi_treatment", false);
    c.robustness.single_rival_treatment =
        bool_at(r, "robustness", "single_rival_treatment", false);
    c.robustness.single_intensity_rivals =
        bool_at(r, "robustness", "single_intensity_rivals", false);
    c.robustness.twfe = bool_at(r, "robustness", "twfe", false);
  }
  if (j.contains("winsorize_bounds")) {
    const auto& w = j["winsorize_bounds"];
    c.winsor_lower = number_at(w, "winsorize_bounds", "lower", c.winsor_lower);
    c.winsor_upper = number_at(w, "winsorize_bounds", "upper", c.winsor_upper);
    if (!(c.winsor_lower >= 0 && c.winsor_upper <= 1 && c.winsor_lower <= c.winsor_upper))
      bad("winsorize_bounds", "need 0 <= lower <= upper <= 1");
  }
  c.placebo_offset = int_at(j, "", "placebo_offset_months", c.placebo_offset);

  if (j.contains("heterogeneity")) {
    for (const auto& h : j["heterogeneity"]) {
      auto s = h.get<std::string>();
      if (s != "chain" && s != "hhi" && s != "hhi_urban_adjusted")
        bad("heterogeneity", "expected chain, hhi, or hhi_urban_adjusted, got '" + s + "'");
      c.heterogeneity.push_back(s);
    }
  }
  if (j.contains("controls_csv")) c.controls_csv = j["controls_csv"].get<std::string>();

  if (j.contains("passthrough")) {
    const auto& p = j["passthrough"];
    c.passthrough.enabled = bool_at(p, "passthrough", "enabled", true);
    c.passthrough.bins = int_at(p, "passthrough", "bins", c.passthrough.bins);
    if (c.passthrough.bins < 0) bad("passthrough.bins", "must be >= 0");
    c.passthrough.bin_width_miles =
        number_at(p, "passthrough", "bin_width_miles", c.passthrough.bin_width_miles);
    auto variant = string_at(p, "passthrough", "variant", "fd_dollars");
    if (variant == "fd_dollars") c.passthrough.variant = passthrough::Variant::FdDollars;
    else if (variant == "levels") c.passthrough.variant = passthrough::Variant::Levels;
    else if (variant == "fd_logs") c.passthrough.variant = passthrough::Variant::FdLogs;
    else bad("passthrough.variant", "expected fd_dollars, levels, or fd_logs");
    auto sample = string_at(p, "passthrough", "sample", "affected");
    if (sample == "affected") c.passthrough.sample = PassthroughSample::Affected;
    else if (sample == "all") c.passthrough.sample = PassthroughSample::All;
    else bad("passthrough.sample", "expected affected or all");
    c.passthrough.region_time_fe = bool_at(p, "passthrough", "region_time_fe", false);
    c.passthrough.region_grid_degrees =
        number_at(p, "passthrough", "region_grid_degrees", c.passthrough.region_grid_degrees);
  }

  if (j.contains("welfare")) {
    const auto& w = j["welfare"];
    c.welfare.enabled = true;
    bool present = false;
    double v = number_at(w, "welfare", "tau", 0, &present);
    if (present) c.welfare.tau = v;
    v = number_at(w, "welfare", "semi_elasticity", 0, &present);
    if (present) c.welfare.semi_elasticity = v;
    v = number_at(w, "welfare", "rho", 0, &present);
    if (present) c.welfare.rho = v;
    if (w.contains("primitives")) {
      const auto& pr = w["primitives"];
      welfare::MarketPrimitives prim;
      prim.demand_elasticity = number_at(pr, "welfare.primitives", "demand_elasticity", 1.0);
      prim.supply_elasticity =
          ext_at(pr, "welfare.primitives", "supply_elasticity", welfare::ExtReal::infinity());
      prim.conduct = number_at(pr, "welfare.primitives", "theta", 0.0);
      prim.inverse_marginal_surplus = ext_at(pr, "welfare.primitives", "inverse_marginal_surplus",
                                             welfare::ExtReal::infinity());
      prim.conduct_elasticity =
          ext_at(pr, "welfare.primitives", "conduct_elasticity", welfare::ExtReal::infinity());
      c.welfare.primitives = prim;
    }
    c.welfare.theta = number_at(w, "welfare", "theta", 0.0);
    c.welfare.annual_units = number_at(w, "welfare", "annual_units", 0.0);
    c.welfare.mean_price = number_at(w, "welfare", "mean_price", 0.0);
    if (w.contains("sweep")) {
      const auto& s = w["sweep"];
      c.welfare.sweep = true;
      c.welfare.sweep_theta_lo = number_at(s, "welfare.sweep", "theta_lo", 0.0);
      c.welfare.sweep_theta_hi = number_at(s, "welfare.sweep", "theta_hi", 1.0);
      c.welfare.sweep_steps = int_at(s, "welfare.sweep", "steps", 20);
    }
    if (!c.welfare.rho && !c.welfare.primitives)
      bad("welfare", "needs either 'rho' or 'primitives'");
    if (!c.welfare.tau && !c.welfare.semi_elasticity)
      bad("welfare", "needs either 'tau' or 'semi_elasticity' (with mean_price)");
  }

  c.figures = bool_at(j, "", "figures", true);
  return c;
}

PipelineConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::Price: return "price";
    case Outcome::Quantity: return "quantity";
    case Outcome::Cost: return "cost";
  }
  return "?";
}

const char* group_name(stacking::TreatmentGroup group) {
  return group == stacking::TreatmentGroup::Victimized ? "victimized" : "rivals";
}

} // namespace crimepass::config
