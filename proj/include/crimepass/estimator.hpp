#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "crimepass/stacking.hpp"

namespace crimepass::estimator {

struct LsFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd vcov;
  std::size_t n = 0;
  int clusters = 0;
  int dof = 0; // parameters counted in the small-sample factor, absorbed FE included
};

/// Cluster-robust sandwich covariance with the CR1 small-sample factor
/// G/(G-1) * (N-1)/(N-K). X and residuals are the (demeaned, weighted)
/// regression arrays; K is the parameter count including absorbed effects.
Eigen::MatrixXd cluster_vcov(const Eigen::MatrixXd& design, const Eigen::VectorXd& residuals,
                             const std::vector<int>& clusters, int dof_params);

/// Least squares after absorbing the given fixed-effect keys by exact
/// demeaning (alternating projections when more than one key). Weights of 1
/// reproduce OLS; weights are normalized to mean one first. Rank deficiency
/// is an error naming the offending columns.
LsFit demeaned_ls(Eigen::MatrixXd design, Eigen::VectorXd outcome,
                  const std::vector<double>& weights,
                  const std::vector<std::vector<int>>& fe_keys, const std::vector<int>& clusters,
                  const std::vector<std::string>& column_names);

struct EffectPath {
  int k = 6;
  std::vector<int> lags; // design order, -k+1..k
  Eigen::VectorXd beta;  // distributed-lag coefficients
  Eigen::MatrixXd vcov;  // covariance of the lag block
  std::size_t n = 0;
  int clusters = 0;
  // cumulative effects relative to the month before treatment
  std::vector<double> cum_effect, cum_se;   // E_L, L = 0..k
  std::vector<double> pre_effect, pre_se;   // P_{-L}, L = 2..k
  double pre_total = 0, pre_total_se = 0;   // P_{-k}, the summed pre-event path
};

struct FitOptions {
  bool use_weights = false;
  // optional extra covariates, one column vector per control, row-aligned
  const std::vector<std::vector<double>>* controls = nullptr;
  std::vector<std::string> control_names;
};

/// First-differenced distributed-lag regression on a stacked panel with
/// sub-experiment-by-time fixed effects, clustered by store. Produces the
/// lag path and its cumulative transforms.
EffectPath fit_distributed_lag(const stacking::StackedPanel& panel,
                               const FitOptions& options = {});

/// Cumulative effects E_L = sum_{l=0..L} beta_l and pre-event path
/// P_{-L} = -sum_{l=-L+1..-1} beta_l with linear-combination standard errors.
void cumulate(EffectPath& path);

} // namespace crimepass::estimator
