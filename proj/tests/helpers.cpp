#include "helpers.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace testhelp {

using namespace crimepass;

Eigen::VectorXd full_dummy_ols(const stacking::StackedPanel& panel) {
  int k = panel.k;
  int n_lags = 2 * k;
  std::map<std::pair<int, int>, int> cells;
  for (std::size_t i = 0; i < panel.rows(); ++i)
    cells.emplace(std::make_pair(panel.sub[i], panel.month[i]), -1);
  int next = 0;
  for (auto& [key, id] : cells) id = next++;

  auto n = static_cast<Eigen::Index>(panel.rows());
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, n_lags + next);
  Eigen::VectorXd outcome(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto r = static_cast<std::size_t>(i);
    outcome[i] = panel.outcome[r];
    if (panel.lag[r] != stacking::kNoLag) design(i, panel.lag[r] + k - 1) = 1.0;
    design(i, n_lags + cells[{panel.sub[r], panel.month[r]}]) = 1.0;
  }
  Eigen::VectorXd full = design.colPivHouseholderQr().solve(outcome);
  return full.head(n_lags);
}

namespace {

double geo(const StoreTable& stores, int a, int b) {
  return haversine_oracle(stores.latitude[a], stores.longitude[a], stores.latitude[b],
                          stores.longitude[b]);
}

} // namespace

std::vector<int> brute_force_controls(int victim, int event_month, const StoreTable& stores,
                                      const std::vector<CrimeIncident>& crimes,
                                      const stacking::StackingConfig& config) {
  const auto& market = config.market;
  int k = config.k;

  // distinct (store, month) incidents
  std::set<std::pair<int, int>> incident_set;
  for (const auto& c : crimes) incident_set.emplace(c.store, c.month);

  // first own incident per store (the treatment in the default mode)
  std::map<int, int> first_own;
  for (const auto& [s, m] : incident_set) {
    auto it = first_own.find(s);
    if (it == first_own.end() || m < it->second) first_own[s] = m;
  }

  // rival cohort: earliest incident at a store strictly within the rival
  // radius, never-victimized stores only
  std::map<int, int> rival_cohort;
  for (int s = 0; s < stores.size(); ++s) {
    if (first_own.count(s)) continue;
    int best = INT_MAX;
    for (const auto& [v, m] : incident_set)
      if (v != s && geo(stores, s, v) < market.rival_radius) best = std::min(best, m);
    if (best != INT_MAX) rival_cohort[s] = best;
  }

  std::vector<int> controls;
  for (int s = 0; s < stores.size(); ++s) {
    if (s == victim) continue;
    double d = geo(stores, s, victim);
    bool urban = stores.has_urban && stores.urban[victim];
    double inner = market.mode == stacking::BoundaryMode::UrbanRural && urban
                       ? market.urban_inner
                       : market.control_inner;
    double outer = market.mode == stacking::BoundaryMode::UrbanRural && urban
                       ? market.urban_outer
                       : market.control_outer;
    if (!(d >= inner && d <= outer)) continue; // IC.1

    bool clean = true;
    if (auto it = first_own.find(s); it != first_own.end()) // IC.2
      clean = std::abs(it->second - event_month) > 2 * k;
    if (clean) { // IC.3
      if (config.contamination == stacking::ContaminationMode::Main) {
        if (auto it = rival_cohort.find(s); it != rival_cohort.end())
          clean = std::abs(it->second - event_month) > 2 * k;
      } else {
        for (const auto& [v, m] : incident_set) {
          if (std::abs(m - event_month) > 2 * k) continue;
          bool v_urban = stores.has_urban && stores.urban[v];
          double contaminate =
              market.mode == stacking::BoundaryMode::UrbanRural && v_urban
                  ? market.urban_inner
                  : market.control_inner;
          if (s != v && geo(stores, s, v) < contaminate) {
            clean = false;
            break;
          }
        }
      }
    }
    if (clean) controls.push_back(s);
  }
  return controls;
}

bool ks_reject_5pct(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double n = a.size(), m = b.size();
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  double critical = 1.358 * std::sqrt((n + m) / (n * m));
  return d > critical;
}

} // namespace testhelp
