#include "crimepass/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace crimepass::estimator {

namespace {

// Dense relabeling of an id vector; returns the number of levels.
int compress_ids(const std::vector<int>& ids, std::vector<int>& out) {
  std::unordered_map<int, int> map;
  out.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, inserted] = map.emplace(ids[i], static_cast<int>(map.size()));
    out[i] = it->second;
  }
  return static_cast<int>(map.size());
}

// One weighted demeaning pass for a single key.
void demean_pass(Eigen::MatrixXd& design, Eigen::VectorXd& outcome,
                 const Eigen::VectorXd& weights, const std::vector<int>& key, int levels) {
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(levels);
  for (std::size_t i = 0; i < key.size(); ++i) wsum[key[i]] += weights[static_cast<Eigen::Index>(i)];

  Eigen::MatrixXd xsum = Eigen::MatrixXd::Zero(levels, design.cols());
  Eigen::VectorXd ysum = Eigen::VectorXd::Zero(levels);
  for (std::size_t i = 0; i < key.size(); ++i) {
    auto idx = static_cast<Eigen::Index>(i);
    xsum.row(key[i]) += weights[idx] * design.row(idx);
    ysum[key[i]] += weights[idx] * outcome[idx];
  }
  for (int g = 0; g < levels; ++g) {
    if (wsum[g] > 0) {
      xsum.row(g) /= wsum[g];
      ysum[g] /= wsum[g];
    }
  }
  for (std::size_t i = 0; i < key.size(); ++i) {
    auto idx = static_cast<Eigen::Index>(i);
    design.row(idx) -= xsum.row(key[i]);
    outcome[idx] -= ysum[key[i]];
  }
}

} // namespace

Eigen::MatrixXd cluster_vcov(const Eigen::MatrixXd& design, const Eigen::VectorXd& residuals,
                             const std::vector<int>& clusters, int dof_params) {
  std::vector<int> dense;
  int n_clusters = compress_ids(clusters, dense);
  if (n_clusters < 2) fail(ErrorKind::SingleCluster, "clustered covariance needs >= 2 clusters");

  auto n = design.rows();
  auto k = design.cols();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n_clusters, k);
  for (Eigen::Index i = 0; i < n; ++i)
    scores.row(dense[static_cast<std::size_t>(i)]) += residuals[i] * design.row(i);

  Eigen::MatrixXd meat = scores.transpose() * scores;
  Eigen::MatrixXd bread = (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  double g = n_clusters;
  double nn = static_cast<double>(n);
  double correction = g / (g - 1.0) * (nn - 1.0) / (nn - dof_params);
  return correction * bread * meat * bread;
}

LsFit demeaned_ls(Eigen::MatrixXd design, Eigen::VectorXd outcome,
                  const std::vector<double>& weights,
                  const std::vector<std::vector<int>>& fe_keys, const std::vector<int>& clusters,
                  const std::vector<std::string>& column_names) {
  auto n = design.rows();
  if (n == 0) fail(ErrorKind::EmptyPanel, "regression panel is empty");

  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!weights.empty()) {
    double mean = std::accumulate(weights.begin(), weights.end(), 0.0) / weights.size();
    if (mean <= 0) fail(ErrorKind::Internal, "weights must have positive mean");
    for (Eigen::Index i = 0; i < n; ++i) w[i] = weights[static_cast<std::size_t>(i)] / mean;
  }

  std::vector<std::vector<int>> dense_keys(fe_keys.size());
  std::vector<int> levels(fe_keys.size());
  int absorbed = 0;
  for (std::size_t f = 0; f < fe_keys.size(); ++f) {
    levels[f] = compress_ids(fe_keys[f], dense_keys[f]);
    absorbed += (f == 0) ? levels[f] : levels[f] - 1;
  }

  if (fe_keys.size() == 1) {
    demean_pass(design, outcome, w, dense_keys[0], levels[0]);
  } else if (fe_keys.size() > 1) {
    // alternating projections until the joint demeaning converges
    for (int iter = 0; iter < 1000; ++iter) {
      Eigen::VectorXd before = outcome;
      Eigen::MatrixXd xbefore = design;
      for (std::size_t f = 0; f < fe_keys.size(); ++f)
        demean_pass(design, outcome, w, dense_keys[f], levels[f]);
      double delta = std::max((outcome - before).cwiseAbs().maxCoeff(),
                              (design - xbefore).cwiseAbs().maxCoeff());
      if (delta < 1e-11) break;
    }
  }

  Eigen::ArrayXd sqrtw = w.array().sqrt();
  design.array().colwise() *= sqrtw;
  outcome.array() *= sqrtw;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    auto perm = qr.colsPermutation().indices();
    std::string dropped;
    for (Eigen::Index j = qr.rank(); j < design.cols(); ++j) {
      if (!dropped.empty()) dropped += ", ";
      auto col = static_cast<std::size_t>(perm[j]);
      dropped += col < column_names.size() ? column_names[col] : "column " + std::to_string(col);
    }
    fail(ErrorKind::RankDeficient, "design is rank deficient; offending columns: " + dropped);
  }

  LsFit fit;
  fit.beta = qr.solve(outcome);
  Eigen::VectorXd residuals = outcome - design * fit.beta;
  fit.n = static_cast<std::size_t>(n);
  fit.dof = static_cast<int>(design.cols()) + absorbed;
  std::vector<int> dense_clusters;
  fit.clusters = compress_ids(clusters, dense_clusters);
  fit.vcov = cluster_vcov(design, residuals, clusters, fit.dof);
  return fit;
}

EffectPath fit_distributed_lag(const stacking::StackedPanel& panel, const FitOptions& options) {
  if (panel.rows() == 0) fail(ErrorKind::EmptyPanel, "stacked panel has no rows");
  int k = panel.k;
  int n_lags = 2 * k;
  std::size_t n_controls = options.controls ? options.controls->size() : 0;
  auto n = static_cast<Eigen::Index>(panel.rows());

  // canonical row order keeps estimates independent of input ordering
  std::vector<std::size_t> order(panel.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (panel.sub[a] != panel.sub[b]) return panel.sub[a] < panel.sub[b];
    if (panel.store[a] != panel.store[b]) return panel.store[a] < panel.store[b];
    return panel.month[a] < panel.month[b];
  });

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, n_lags + static_cast<Eigen::Index>(n_controls));
  Eigen::VectorXd outcome(n);
  std::vector<int> fe(panel.rows());
  std::vector<int> clusters(panel.rows());
  std::vector<double> weights;
  if (options.use_weights) weights.resize(panel.rows());

  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t r = order[static_cast<std::size_t>(i)];
    outcome[i] = panel.outcome[r];
    if (panel.lag[r] != stacking::kNoLag) design(i, panel.lag[r] + k - 1) = 1.0;
    for (std::size_t c = 0; c < n_controls; ++c)
      design(i, n_lags + static_cast<Eigen::Index>(c)) = (*options.controls)[c][r];
    // (sub, month) cell id; months are bounded so the packing is collision-free
    fe[static_cast<std::size_t>(i)] = panel.sub[r] * 200000 + panel.month[r];
    clusters[static_cast<std::size_t>(i)] = panel.store[r];
    if (options.use_weights) weights[static_cast<std::size_t>(i)] = panel.weight[r];
  }

  std::vector<std::string> names;
  for (int l = -k + 1; l <= k; ++l) names.push_back("dT[l=" + std::to_string(l) + "]");
  for (const auto& name : options.control_names) names.push_back(name);

  LsFit fit = demeaned_ls(std::move(design), std::move(outcome), weights, {fe}, clusters, names);

  EffectPath path;
  path.k = k;
  for (int l = -k + 1; l <= k; ++l) path.lags.push_back(l);
  path.beta = fit.beta.head(n_lags);
  path.vcov = fit.vcov.topLeftCorner(n_lags, n_lags);
  path.n = fit.n;
  path.clusters = fit.clusters;
  cumulate(path);
  return path;
}

void cumulate(EffectPath& path) {
  int k = path.k;
  auto col = [&](int l) { return l + k - 1; };
  auto combo = [&](const Eigen::VectorXd& a) {
    double est = a.dot(path.beta);
    double var = a.dot(path.vcov * a);
    return std::make_pair(est, std::sqrt(std::max(0.0, var)));
  };

  path.cum_effect.clear();
  path.cum_se.clear();
  for (int L = 0; L <= k; ++L) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(path.beta.size());
    for (int l = 0; l <= L; ++l) a[col(l)] = 1.0;
    auto [est, se] = combo(a);
    path.cum_effect.push_back(est);
    path.cum_se.push_back(se);
  }

  path.pre_effect.clear();
  path.pre_se.clear();
  for (int L = 2; L <= k; ++L) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(path.beta.size());
    for (int l = -L + 1; l <= -1; ++l) a[col(l)] = -1.0;
    auto [est, se] = combo(a);
    path.pre_effect.push_back(est);
    path.pre_se.push_back(se);
  }
  if (!path.pre_effect.empty()) {
    path.pre_total = path.pre_effect.back();
    path.pre_total_se = path.pre_se.back();
  }
}

} // namespace crimepass::estimator
