#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crimepass/config.hpp"
#include "crimepass/estimator.hpp"
#include "crimepass/passthrough.hpp"

namespace crimepass::pipeline {

// End-to-end orchestration. Stages run in order and reuse in-memory results;
// every artifact CSV embeds the config hash. With a fixed config and seed,
// artifacts are byte-identical across reruns and worker counts.
class Pipeline {
public:
  Pipeline(config::PipelineConfig config, std::string out_dir);

  void set_threads(int threads) { threads_override_ = threads; }

  // stage is one of: simulate, index, stack, estimate, passthrough, welfare,
  // report, all
  void run(const std::string& stage);

  const config::PipelineConfig& config() const { return config_; }
  const std::string& out_dir() const { return out_dir_; }

  // in-memory accessors used by tests and the acceptance suite
  const Dataset& dataset();
  const ProductMonthPanel& panel();
  const indexes::StoreMonthSeries& series();
  const spatial::DistanceMatrix& distances();
  const stacking::CohortAssignment& cohorts();
  const stacking::SubExperimentSet& sub_experiments();
  stacking::StackedPanel stacked(stacking::TreatmentGroup group, config::Outcome outcome,
                                 bool winsorized = false);
  estimator::EffectPath estimate_baseline(stacking::TreatmentGroup group, config::Outcome outcome);
  passthrough::Estimate passthrough_estimate();
  const SeriesTable& revenue_by_month();

private:
  struct Cache;
  void run_simulate();
  void run_index();
  void run_stack();
  void run_estimate();
  void run_passthrough();
  void run_welfare();
  void run_report();
  int threads() const;

  config::PipelineConfig config_;
  std::string out_dir_;
  int threads_override_ = -1;
  std::unique_ptr<Cache> cache_;
};

// Effect-path artifact rows (one CSV per specification variant).
struct EffectPathRows {
  std::string outcome;
  std::string group;
  std::string variant; // empty for the baseline
  estimator::EffectPath path;
};

void write_effect_path_csv(const std::string& path, const EffectPathRows& rows,
                           const std::string& config_hash);

/// Renders an effect-path CSV as an SVG figure with a 90% confidence band
/// (1.645 standard errors).
void render_effect_path_svg(const std::string& csv_path, const std::string& svg_path);

} // namespace crimepass::pipeline
