#include "crimepass/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace crimepass::stacking {

namespace {

// Crimes collapsed to distinct (victim, month) pairs, chronological with
// store-id tie-break. Same-month repeat incidents at one store count once
// for treatment timing.
std::vector<TreatmentEvent> distinct_incidents(const StoreTable& stores,
                                               const std::vector<CrimeIncident>& crimes) {
  std::set<std::pair<int, int>> seen;
  std::vector<TreatmentEvent> out;
  for (const auto& c : crimes) {
    if (seen.emplace(c.store, c.month).second) out.push_back({c.store, c.month});
  }
  std::sort(out.begin(), out.end(), [&](const TreatmentEvent& a, const TreatmentEvent& b) {
    if (a.month != b.month) return a.month < b.month;
    return stores.id[a.victim] < stores.id[b.victim];
  });
  return out;
}

bool windows_overlap(int t_a, int t_b, int k) { return std::abs(t_a - t_b) <= 2 * k; }

// Spatial rival set of a victim store under the configured boundary rule,
// before the never-victimized filter.
std::vector<int> raw_rival_set(int victim, const spatial::DistanceMatrix& dist,
                               const MarketConfig& market) {
  if (market.mode == BoundaryMode::Ranks) {
    auto sets = spatial::rank_based_sets(victim, dist, market.rank_rival_k, market.rank_ctrl_lo,
                                         market.rank_ctrl_hi);
    return sets.rivals;
  }
  std::vector<int> out;
  for (int s = 0; s < dist.size(); ++s)
    if (s != victim && dist(victim, s) < market.rival_radius) out.push_back(s);
  return out;
}

} // namespace

CohortAssignment assign_cohorts(const StoreTable& stores, const spatial::DistanceMatrix& dist,
                                const std::vector<CrimeIncident>& crimes,
                                const StackingConfig& config) {
  int n = stores.size();
  CohortAssignment out;
  out.victim_event_months.assign(n, {});
  out.victim_censor_from.assign(n, INT_MAX);
  out.ever_victimized.assign(n, 0);
  out.rival_cohort_month.assign(n, -1);
  out.rival_cohort_event.assign(n, -1);
  out.rival_censor_from.assign(n, INT_MAX);
  out.rival_multi_intensity.assign(n, 0);

  auto incidents = distinct_incidents(stores, crimes);
  std::vector<std::vector<int>> own_months(n);
  for (const auto& inc : incidents) {
    own_months[inc.victim].push_back(inc.month);
    out.ever_victimized[inc.victim] = 1;
  }

  // victim treatments: first incident always; later incidents become extra
  // treatments only in multi mode and only with non-overlapping windows
  for (int s = 0; s < n; ++s) {
    auto& months = own_months[s];
    if (months.empty()) continue;
    auto& retained = out.victim_event_months[s];
    retained.push_back(months.front());
    for (std::size_t i = 1; i < months.size(); ++i) {
      if (config.victim_mode == VictimMode::MultiTreatment) {
        bool clean = std::none_of(retained.begin(), retained.end(), [&](int e) {
          return windows_overlap(e, months[i], config.k);
        });
        if (clean) retained.push_back(months[i]);
      }
    }
    if (config.victim_mode == VictimMode::FirstOnly && months.size() > 1)
      out.victim_censor_from[s] = months[1];
  }

  for (const auto& inc : incidents) {
    bool is_treatment =
        std::find(out.victim_event_months[inc.victim].begin(),
                  out.victim_event_months[inc.victim].end(),
                  inc.month) != out.victim_event_months[inc.victim].end();
    if (is_treatment) out.events.push_back(inc);
  }

  // rival cohorts from the first nearby incident; event order breaks
  // same-month ties
  std::vector<std::vector<int>> nearby_months(n);
  for (std::size_t e = 0; e < incidents.size(); ++e) {
    auto rivals = raw_rival_set(incidents[e].victim, dist, config.market);
    for (int s : rivals) {
      if (out.ever_victimized[s]) continue;
      nearby_months[s].push_back(incidents[e].month);
      if (out.rival_cohort_month[s] < 0) {
        out.rival_cohort_month[s] = incidents[e].month;
        // map to the index in the retained events list
        for (std::size_t ev = 0; ev < out.events.size(); ++ev) {
          if (out.events[ev].victim == incidents[e].victim &&
              out.events[ev].month == incidents[e].month) {
            out.rival_cohort_event[s] = static_cast<int>(ev);
            break;
          }
        }
      }
    }
  }
  for (int s = 0; s < n; ++s) {
    auto& months = nearby_months[s];
    if (months.empty()) continue;
    for (std::size_t i = 1; i < months.size(); ++i)
      if (months[i] == months[i - 1]) out.rival_multi_intensity[s] = 1;
    if (config.rival_mode == RivalMode::CensorBeforeSecond && months.size() > 1)
      out.rival_censor_from[s] = months[1] - 1;
  }
  return out;
}

namespace {

std::vector<int> candidate_set(const SubExperiment& sub, const CohortAssignment& cohorts,
                               const StoreTable& stores, const spatial::DistanceMatrix& dist,
                               const MarketConfig& market) {
  (void)cohorts;
  switch (market.mode) {
    case BoundaryMode::Rings:
      return spatial::control_donut(sub.victim, dist, market.control_inner, market.control_outer);
    case BoundaryMode::Ranks: {
      auto sets = spatial::rank_based_sets(sub.victim, dist, market.rank_rival_k,
                                           market.rank_ctrl_lo, market.rank_ctrl_hi);
      return sets.control_candidates;
    }
    case BoundaryMode::UrbanRural: {
      bool urban = stores.has_urban && stores.urban[sub.victim];
      double inner = urban ? market.urban_inner : market.control_inner;
      double outer = urban ? market.urban_outer : market.control_outer;
      return spatial::control_donut(sub.victim, dist, inner, outer);
    }
  }
  return {};
}

// Inner boundary used for strict contamination around a given victim.
double contamination_radius(int victim, const StoreTable& stores, const MarketConfig& market) {
  if (market.mode == BoundaryMode::UrbanRural && stores.has_urban && stores.urban[victim])
    return market.urban_inner;
  return market.control_inner;
}

} // namespace

SubExperiment build_sub_experiment(int event, const CohortAssignment& cohorts,
                                   const StoreTable& stores, const spatial::DistanceMatrix& dist,
                                   const std::vector<CrimeIncident>& crimes,
                                   const StackingConfig& config) {
  SubExperiment sub;
  sub.event = event;
  sub.victim = cohorts.events[event].victim;
  sub.month = cohorts.events[event].month;
  sub.candidates = candidate_set(sub, cohorts, stores, dist, config.market);

  auto incidents = distinct_incidents(stores, crimes);

  for (int s : sub.candidates) {
    // own treatment window must not overlap this event's window
    bool dirty = std::any_of(cohorts.victim_event_months[s].begin(),
                             cohorts.victim_event_months[s].end(),
                             [&](int e) { return windows_overlap(e, sub.month, config.k); });
    if (!dirty && config.contamination == ContaminationMode::Main) {
      // rival cohort window must not overlap either; rivals of later nearby
      // crimes stay eligible because cohorts come from the first one only
      int rc = cohorts.rival_cohort_month[s];
      dirty = rc >= 0 && windows_overlap(rc, sub.month, config.k);
    } else if (!dirty && config.contamination == ContaminationMode::Strict) {
      // any store near any crime with an overlapping window is contaminated
      for (const auto& inc : incidents) {
        if (!windows_overlap(inc.month, sub.month, config.k)) continue;
        if (s != inc.victim &&
            dist(s, inc.victim) < contamination_radius(inc.victim, stores, config.market)) {
          dirty = true;
          break;
        }
      }
    }
    if (!dirty) sub.controls.push_back(s);
  }

  for (int s = 0; s < stores.size(); ++s) {
    if (cohorts.rival_cohort_event[s] != event) continue;
    if (config.exclude_multi_intensity_rivals && cohorts.rival_multi_intensity[s]) continue;
    sub.treated_rivals.push_back(s);
  }

  if (sub.controls.empty())
    fail(ErrorKind::NoCleanControls, "no clean controls for incident at store '" +
                                         stores.id[sub.victim] + "' month " +
                                         format_month(sub.month));
  return sub;
}

SubExperimentSet build_all_sub_experiments(const CohortAssignment& cohorts,
                                           const StoreTable& stores,
                                           const spatial::DistanceMatrix& dist,
                                           const std::vector<CrimeIncident>& crimes,
                                           const StackingConfig& config) {
  SubExperimentSet out;
  for (std::size_t e = 0; e < cohorts.events.size(); ++e) {
    try {
      out.subs.push_back(
          build_sub_experiment(static_cast<int>(e), cohorts, stores, dist, crimes, config));
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::NoCleanControls) throw;
      out.dropped.push_back({static_cast<int>(e), err.what()});
    }
  }
  return out;
}

StackedPanel stack(const SubExperimentSet& subs, const CohortAssignment& cohorts,
                   const SeriesTable& outcome, TreatmentGroup group,
                   const StackingConfig& config) {
  StackedPanel panel;
  panel.k = config.k;
  int k = config.k;

  std::vector<int> members;
  for (const auto& sub : subs.subs) {
    std::vector<int> treated;
    if (group == TreatmentGroup::Victimized) {
      treated.push_back(sub.victim);
    } else {
      treated = sub.treated_rivals;
      if (treated.empty()) continue; // nothing identified by this event
    }
    int d = static_cast<int>(panel.sub_event.size());
    panel.sub_event.push_back(sub.event);
    panel.sub_victim.push_back(sub.victim);
    panel.sub_month.push_back(sub.month);
    panel.sub_treated.push_back(treated);

    members = treated;
    members.insert(members.end(), sub.controls.begin(), sub.controls.end());
    std::sort(members.begin(), members.end());

    for (int s : members) {
      bool is_treated = std::binary_search(treated.begin(), treated.end(), s);
      for (int t = sub.month - k; t <= sub.month + k; ++t) {
        if (!outcome.in_range(t)) continue;
        if (t >= cohorts.victim_censor_from[s]) continue;
        if (t >= cohorts.rival_censor_from[s]) continue;
        double y = outcome.at(s, t);
        if (is_missing(y)) continue;
        int lag = kNoLag;
        if (is_treated) {
          int l = t - sub.month;
          if (l >= -k + 1 && l <= k) lag = l;
        }
        panel.sub.push_back(d);
        panel.store.push_back(s);
        panel.month.push_back(t);
        panel.outcome.push_back(y);
        panel.lag.push_back(lag);
        panel.weight.push_back(1.0);
      }
    }
  }
  return panel;
}

StackedPanel balanced_filter(const StackedPanel& panel, int sample_start, int sample_end) {
  int k = panel.k;
  int window = 2 * k + 1;
  std::size_t n_subs = panel.sub_event.size();

  std::vector<std::uint8_t> sub_ok(n_subs, 0);
  for (std::size_t d = 0; d < n_subs; ++d) {
    int e = panel.sub_month[d];
    sub_ok[d] = (e - k >= sample_start && e + k <= sample_end) ? 1 : 0;
  }

  // months reported per treated store within its window
  std::map<std::pair<int, int>, int> treated_months; // (sub, store) -> count
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    int d = panel.sub[i];
    if (!sub_ok[d]) continue;
    const auto& treated = panel.sub_treated[d];
    if (std::find(treated.begin(), treated.end(), panel.store[i]) != treated.end())
      ++treated_months[{d, panel.store[i]}];
  }

  StackedPanel out;
  out.k = panel.k;
  std::vector<int> new_id(n_subs, -1);
  for (std::size_t d = 0; d < n_subs; ++d) {
    if (!sub_ok[d]) continue;
    std::vector<int> treated;
    for (int s : panel.sub_treated[d]) {
      auto it = treated_months.find({static_cast<int>(d), s});
      int reported = it == treated_months.end() ? 0 : it->second;
      if (static_cast<double>(reported) >= 0.75 * window) treated.push_back(s);
    }
    if (treated.empty()) continue;
    new_id[d] = static_cast<int>(out.sub_event.size());
    out.sub_event.push_back(panel.sub_event[d]);
    out.sub_victim.push_back(panel.sub_victim[d]);
    out.sub_month.push_back(panel.sub_month[d]);
    out.sub_treated.push_back(treated);
  }

  for (std::size_t i = 0; i < panel.rows(); ++i) {
    int d = panel.sub[i];
    if (new_id[d] < 0) continue;
    int s = panel.store[i];
    const auto& old_treated = panel.sub_treated[d];
    const auto& kept_treated = out.sub_treated[new_id[d]];
    bool was_treated =
        std::find(old_treated.begin(), old_treated.end(), s) != old_treated.end();
    if (was_treated &&
        std::find(kept_treated.begin(), kept_treated.end(), s) == kept_treated.end())
      continue; // treated store dropped for under-reporting
    out.sub.push_back(new_id[d]);
    out.store.push_back(s);
    out.month.push_back(panel.month[i]);
    out.outcome.push_back(panel.outcome[i]);
    out.lag.push_back(panel.lag[i]);
    out.weight.push_back(panel.weight[i]);
  }
  return out;
}

StackedPanel wing_weights(const StackedPanel& panel) {
  std::size_t n_subs = panel.sub_event.size();
  std::vector<double> treated_rows(n_subs, 0), control_rows(n_subs, 0);
  std::vector<std::uint8_t> row_treated(panel.rows(), 0);
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    int d = panel.sub[i];
    const auto& treated = panel.sub_treated[d];
    bool is_treated =
        std::find(treated.begin(), treated.end(), panel.store[i]) != treated.end();
    row_treated[i] = is_treated;
    (is_treated ? treated_rows[d] : control_rows[d]) += 1.0;
  }
  double pooled_treated = std::accumulate(treated_rows.begin(), treated_rows.end(), 0.0);
  double pooled_control = std::accumulate(control_rows.begin(), control_rows.end(), 0.0);

  StackedPanel out = panel;
  if (pooled_treated <= 0 || pooled_control <= 0) return out;
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    int d = panel.sub[i];
    if (row_treated[i] || control_rows[d] <= 0) {
      out.weight[i] = 1.0;
    } else {
      out.weight[i] =
          (treated_rows[d] / control_rows[d]) * (pooled_control / pooled_treated);
    }
  }
  return out;
}

namespace {

double interpolated_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n == 0) fail(ErrorKind::Internal, "median of empty set");
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double market_hhi(int victim, int event_month, const SplitContext& ctx) {
  std::vector<double> revenues;
  const auto& rev = *ctx.revenue;
  for (int s = 0; s < ctx.dist->size(); ++s) {
    if (s != victim && (*ctx.dist)(victim, s) >= ctx.market_radius) continue;
    double total = 0;
    for (int t = event_month - ctx.hhi_window; t < event_month; ++t) {
      if (!rev.in_range(t)) continue;
      double v = rev.at(s, t);
      if (!is_missing(v)) total += v;
    }
    revenues.push_back(total);
  }
  return spatial::hhi(revenues);
}

} // namespace

SplitPanels heterogeneity_split(const StackedPanel& panel, SplitRule rule,
                                const SplitContext& context) {
  std::size_t n_subs = panel.sub_event.size();
  SplitPanels out;
  out.first.k = out.second.k = panel.k;

  std::vector<int> firm_sizes;
  if (rule == SplitRule::Chain) firm_sizes = context.stores->firm_sizes();

  std::vector<double> hhi_of_sub(n_subs, kNaN);
  std::vector<std::uint8_t> high_side(n_subs, 0);
  if (rule == SplitRule::Hhi || rule == SplitRule::HhiUrbanAdjusted) {
    for (std::size_t d = 0; d < n_subs; ++d)
      hhi_of_sub[d] = market_hhi(panel.sub_victim[d], panel.sub_month[d], context);
    out.sub_hhi = hhi_of_sub;
    if (rule == SplitRule::Hhi) {
      double med = interpolated_median(hhi_of_sub);
      for (std::size_t d = 0; d < n_subs; ++d) high_side[d] = hhi_of_sub[d] >= med;
    } else {
      if (!context.stores->has_urban)
        fail(ErrorKind::Config, "urban-adjusted split requires the urban_flag column");
      std::vector<double> urban_vals, rural_vals;
      for (std::size_t d = 0; d < n_subs; ++d)
        (context.stores->urban[panel.sub_victim[d]] ? urban_vals : rural_vals)
            .push_back(hhi_of_sub[d]);
      double med_urban = urban_vals.empty() ? 0 : interpolated_median(urban_vals);
      double med_rural = rural_vals.empty() ? 0 : interpolated_median(rural_vals);
      for (std::size_t d = 0; d < n_subs; ++d) {
        double med = context.stores->urban[panel.sub_victim[d]] ? med_urban : med_rural;
        high_side[d] = hhi_of_sub[d] >= med;
      }
    }
  }

  // side of each treated store: chain splits by the store's own firm size,
  // the HHI rules by the sub-experiment's market
  auto treated_side = [&](std::size_t d, int store) -> int {
    if (rule == SplitRule::Chain) return firm_sizes[store] >= 3 ? 1 : 0;
    return high_side[d] ? 1 : 0;
  };

  std::vector<std::vector<int>> side_treated[2];
  side_treated[0].assign(n_subs, {});
  side_treated[1].assign(n_subs, {});
  for (std::size_t d = 0; d < n_subs; ++d)
    for (int s : panel.sub_treated[d]) side_treated[treated_side(d, s)][d].push_back(s);

  std::vector<int> renum[2];
  renum[0].assign(n_subs, -1);
  renum[1].assign(n_subs, -1);
  StackedPanel* panels[2] = {&out.first, &out.second};
  for (int side = 0; side < 2; ++side) {
    for (std::size_t d = 0; d < n_subs; ++d) {
      if (side_treated[side][d].empty()) continue;
      renum[side][d] = static_cast<int>(panels[side]->sub_event.size());
      panels[side]->sub_event.push_back(panel.sub_event[d]);
      panels[side]->sub_victim.push_back(panel.sub_victim[d]);
      panels[side]->sub_month.push_back(panel.sub_month[d]);
      panels[side]->sub_treated.push_back(side_treated[side][d]);
    }
  }

  for (std::size_t i = 0; i < panel.rows(); ++i) {
    std::size_t d = static_cast<std::size_t>(panel.sub[i]);
    int s = panel.store[i];
    const auto& treated = panel.sub_treated[d];
    bool is_treated = std::find(treated.begin(), treated.end(), s) != treated.end();
    for (int side = 0; side < 2; ++side) {
      if (renum[side][d] < 0) continue;
      if (is_treated && treated_side(d, s) != side) continue;
      panels[side]->sub.push_back(renum[side][d]);
      panels[side]->store.push_back(s);
      panels[side]->month.push_back(panel.month[i]);
      panels[side]->outcome.push_back(panel.outcome[i]);
      panels[side]->lag.push_back(panel.lag[i]);
      panels[side]->weight.push_back(panel.weight[i]);
    }
  }
  return out;
}

std::vector<CrimeIncident> placebo_shift(const std::vector<CrimeIncident>& crimes, int offset) {
  std::vector<CrimeIncident> out = crimes;
  for (auto& c : out) c.month += offset;
  return out;
}

StackedPanel twfe_panel(const CohortAssignment& cohorts, const SeriesTable& outcome,
                        TreatmentGroup group, const StackingConfig& config) {
  StackedPanel panel;
  panel.k = config.k;
  panel.sub_event.push_back(-1);
  panel.sub_victim.push_back(-1);
  panel.sub_month.push_back(-1);
  panel.sub_treated.push_back({});

  int n = static_cast<int>(cohorts.ever_victimized.size());
  int k = config.k;
  auto& treated = panel.sub_treated[0];
  for (int s = 0; s < n; ++s) {
    bool include;
    std::vector<int> events;
    if (group == TreatmentGroup::Victimized) {
      include = cohorts.rival_cohort_month[s] < 0; // rivals excluded
      events = cohorts.victim_event_months[s];
    } else {
      include = !cohorts.ever_victimized[s]; // victims excluded
      if (cohorts.rival_cohort_month[s] >= 0) events.push_back(cohorts.rival_cohort_month[s]);
    }
    if (!include) continue;
    if (!events.empty()) treated.push_back(s);
    for (int t = outcome.month_min; t <= outcome.month_max; ++t) {
      if (t >= cohorts.victim_censor_from[s] || t >= cohorts.rival_censor_from[s]) continue;
      double y = outcome.at(s, t);
      if (is_missing(y)) continue;
      int lag = kNoLag;
      for (int e : events) {
        int l = t - e;
        if (l >= -k + 1 && l <= k) {
          lag = l;
          break;
        }
      }
      panel.sub.push_back(0);
      panel.store.push_back(s);
      panel.month.push_back(t);
      panel.outcome.push_back(y);
      panel.lag.push_back(lag);
      panel.weight.push_back(1.0);
    }
  }
  return panel;
}

} // namespace crimepass::stacking
