#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crimepass/indexes.hpp"
#include "crimepass/simulator.hpp"
#include "crimepass/stacking.hpp"
#include "crimepass/welfare.hpp"

namespace crimepass::config {

enum class Outcome { Price, Quantity, Cost };

struct RobustnessToggles {
  bool winsorize = false;
  bool placebo = false;
  bool balanced = false;
  bool wing_weights = false;
  bool multi_treatment = false;
  bool single_rival_treatment = false;
  bool single_intensity_rivals = false;
  bool twfe = false;
};

enum class PassthroughSample { Affected, All };

struct PassthroughConfig {
  bool enabled = false;
  int bins = 9;
  double bin_width_miles = 5.0;
  passthrough::Variant variant = passthrough::Variant::FdDollars;
  PassthroughSample sample = PassthroughSample::Affected;
  bool region_time_fe = false;
  double region_grid_degrees = 0.5;
};

struct WelfareConfig {
  bool enabled = false;
  std::optional<double> tau;             // direct unit tax
  std::optional<double> semi_elasticity; // else derived from these
  std::optional<double> rho;             // direct pass-through rate
  std::optional<welfare::MarketPrimitives> primitives;
  double theta = 0;
  double annual_units = 0;
  double mean_price = 0;
  bool sweep = false;
  double sweep_theta_lo = 0.0, sweep_theta_hi = 1.0;
  int sweep_steps = 20;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  int threads = 0; // 0 = hardware concurrency

  // exactly one of the two input modes
  std::optional<std::string> stores_csv, transactions_csv, crimes_csv;
  std::optional<simulator::DgpConfig> simulate;

  std::optional<int> sample_start, sample_end;
  int window_k = 6;
  stacking::MarketConfig market;
  stacking::ContaminationMode contamination = stacking::ContaminationMode::Main;
  indexes::WeightYear weight_year = indexes::WeightYear::Calendar;

  std::vector<Outcome> outcomes = {Outcome::Price};
  std::vector<stacking::TreatmentGroup> groups = {stacking::TreatmentGroup::Victimized,
                                                  stacking::TreatmentGroup::Rivals};
  RobustnessToggles robustness;
  double winsor_lower = 0.005, winsor_upper = 0.995;
  int placebo_offset = -12;
  std::vector<std::string> heterogeneity; // "chain", "hhi", "hhi_urban_adjusted"
  std::optional<std::string> controls_csv;

  PassthroughConfig passthrough;
  WelfareConfig welfare;
  bool figures = true;

  std::string config_hash; // canonical-form FNV-1a, set at parse time
};

/// Parses and validates a JSON config document. Field errors name the path
/// to the bad value.
PipelineConfig parse(const std::string& json_text);
PipelineConfig parse_file(const std::string& path);

const char* outcome_name(Outcome outcome);
const char* group_name(stacking::TreatmentGroup group);

} // namespace crimepass::config
