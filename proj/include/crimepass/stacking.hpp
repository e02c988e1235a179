#pragma once

#include <climits>
#include <string>
#include <vector>

#include "crimepass/spatial.hpp"
#include "crimepass/tables.hpp"

namespace crimepass::stacking {

enum class BoundaryMode { Rings, Ranks, UrbanRural };
enum class ContaminationMode { Main, Strict };
enum class VictimMode { FirstOnly, MultiTreatment };
enum class RivalMode { KeepAfterLater, CensorBeforeSecond };
enum class TreatmentGroup { Victimized, Rivals };

struct MarketConfig {
  BoundaryMode mode = BoundaryMode::Rings;
  double rival_radius = 5.0;
  double control_inner = 30.0;
  double control_outer = 60.0;
  int rank_rival_k = 20;
  int rank_ctrl_lo = 150;
  int rank_ctrl_hi = 250;
  // UrbanRural keeps the 5-mile rival ring but tightens the control ring for
  // urban victims.
  double urban_inner = 10.0;
  double urban_outer = 30.0;
};

struct StackingConfig {
  int k = 6; // window half-width; the event window spans 2k+1 months
  MarketConfig market;
  ContaminationMode contamination = ContaminationMode::Main;
  VictimMode victim_mode = VictimMode::FirstOnly;
  RivalMode rival_mode = RivalMode::KeepAfterLater;
  bool exclude_multi_intensity_rivals = false;
};

struct TreatmentEvent {
  int victim = -1;
  int month = 0;
};

struct CohortAssignment {
  // Sub-experiment events ordered chronologically, ties broken by victim
  // store id.
  std::vector<TreatmentEvent> events;
  std::vector<std::vector<int>> victim_event_months; // retained treatments per store
  std::vector<int> victim_censor_from;               // INT_MAX when never censored
  std::vector<std::uint8_t> ever_victimized;
  std::vector<int> rival_cohort_month; // -1 when the store is never a rival
  std::vector<int> rival_cohort_event; // event index assigning the cohort
  std::vector<int> rival_censor_from;  // INT_MAX unless rival censoring is on
  std::vector<std::uint8_t> rival_multi_intensity;
};

/// Treatment timing. Victims are treated at their first incident and, in the
/// default mode, censored from their second incident onward. Rivals take the
/// month of their first nearby incident as cohort and are kept afterwards
/// unless rival censoring is requested.
CohortAssignment assign_cohorts(const StoreTable& stores, const spatial::DistanceMatrix& dist,
                                const std::vector<CrimeIncident>& crimes,
                                const StackingConfig& config);

struct SubExperiment {
  int event = -1; // index into CohortAssignment::events
  int victim = -1;
  int month = 0;
  std::vector<int> candidates;     // after the distance criterion only
  std::vector<int> controls;       // after all inclusion criteria
  std::vector<int> treated_rivals; // rivals whose cohort is this event
};

struct DroppedSubExperiment {
  int event = -1;
  std::string reason;
};

struct SubExperimentSet {
  std::vector<SubExperiment> subs;
  std::vector<DroppedSubExperiment> dropped;
};

/// Clean-control construction for one event. Candidates come from the
/// configured boundary rule; a candidate is removed when it has an own
/// treatment window overlapping this event's window, or when its rival
/// cohort window overlaps (strict mode instead removes every store within
/// the inner control boundary of any crime with an overlapping window).
/// Two 2k+1 windows overlap iff |t_h - t_j| <= 2k. Throws NoCleanControls
/// when nothing survives.
SubExperiment build_sub_experiment(int event, const CohortAssignment& cohorts,
                                   const StoreTable& stores, const spatial::DistanceMatrix& dist,
                                   const std::vector<CrimeIncident>& crimes,
                                   const StackingConfig& config);

/// All sub-experiments; ones without clean controls are dropped with a
/// logged reason.
SubExperimentSet build_all_sub_experiments(const CohortAssignment& cohorts,
                                           const StoreTable& stores,
                                           const spatial::DistanceMatrix& dist,
                                           const std::vector<CrimeIncident>& crimes,
                                           const StackingConfig& config);

// Stacked panel rows ordered by (sub, store, month). `lag` holds the active
// treatment-adoption lag l in [-k+1, k], or kNoLag for control rows and the
// window's earliest treated month.
inline constexpr int kNoLag = INT_MIN;

struct StackedPanel {
  int k = 6;
  std::vector<int> sub;
  std::vector<int> store;
  std::vector<int> month;
  std::vector<double> outcome;
  std::vector<int> lag;
  std::vector<double> weight;

  // per-sub metadata (indexed by the dense sub ids used in rows)
  std::vector<int> sub_event;
  std::vector<int> sub_victim;
  std::vector<int> sub_month;
  std::vector<std::vector<int>> sub_treated;

  std::size_t rows() const { return outcome.size(); }
};

/// Concatenates per-event datasets over the event window [t-k, t+k],
/// restricted to months with a defined outcome and to uncensored store
/// months. Store-months recycled across sub-experiments appear once per
/// sub-experiment.
StackedPanel stack(const SubExperimentSet& subs, const CohortAssignment& cohorts,
                   const SeriesTable& outcome, TreatmentGroup group, const StackingConfig& config);

/// Keeps sub-experiments whose full window fits in [sample_start, sample_end]
/// and treated stores reporting at least 75% of window months.
StackedPanel balanced_filter(const StackedPanel& panel, int sample_start, int sample_end);

/// Sample weights equalizing treatment shares across sub-experiments:
/// treated rows weigh 1, control rows in sub-experiment d weigh
/// (treated_d/control_d) * (pooled control/pooled treated).
StackedPanel wing_weights(const StackedPanel& panel);

enum class SplitRule { Chain, Hhi, HhiUrbanAdjusted };

struct SplitContext {
  const StoreTable* stores = nullptr;
  const spatial::DistanceMatrix* dist = nullptr;
  // store-by-month revenue totals used for HHI shares
  const SeriesTable* revenue = nullptr;
  double market_radius = 5.0;
  int hhi_window = 12; // months preceding the event month
};

struct SplitPanels {
  StackedPanel first;  // independent / low concentration
  StackedPanel second; // chain / high concentration
  std::vector<double> sub_hhi; // defined for the HHI rules
};

/// Partitions treated stores (and with them sub-experiments in the victim
/// specification) while preserving each sub-experiment's original control
/// group. Chain status is firm size >= 3; HHI splits at the median of
/// victim-market HHIs, median going to the high-concentration side.
SplitPanels heterogeneity_split(const StackedPanel& panel, SplitRule rule,
                                const SplitContext& context);

/// Shifts every incident by `offset` months (default one year earlier); the
/// rest of the pipeline runs unchanged on the shifted table.
std::vector<CrimeIncident> placebo_shift(const std::vector<CrimeIncident>& crimes,
                                         int offset = -12);

/// Canonical two-way fixed-effects arrangement: one pseudo sub-experiment
/// with calendar-time effects only. The victimized specification excludes
/// rival stores and vice versa; all other stores serve as controls.
StackedPanel twfe_panel(const CohortAssignment& cohorts, const SeriesTable& outcome,
                        TreatmentGroup group, const StackingConfig& config);

} // namespace crimepass::stacking
