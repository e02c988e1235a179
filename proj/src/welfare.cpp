#include "crimepass/welfare.hpp"

#include <cmath>

namespace crimepass::welfare {

namespace {

// quotient on the extended real line; infinite == true means +/- infinity
// carried in the sign of value? No: sign-free infinity, resolved by use
struct Term {
  double value = 0;
  bool plus_inf = false;
  bool minus_inf = false;
};

Term divide(double numerator, const ExtReal& denominator) {
  if (denominator.infinite) return {0.0, false, false}; // x / inf = 0 exactly
  if (denominator.value == 0.0) {
    if (numerator == 0.0)
      fail(ErrorKind::UndefinedLimit, "indeterminate 0/0 in pass-through denominator");
    return {0.0, numerator > 0.0, numerator < 0.0};
  }
  return {numerator / denominator.value, false, false};
}

} // namespace

double passthrough_rate(const MarketPrimitives& primitives) {
  double theta = primitives.conduct;
  if (theta < 0.0 || theta > 1.0)
    fail(ErrorKind::Config, "conduct parameter must lie in [0, 1]");

  Term terms[3];
  terms[0] = divide(primitives.demand_elasticity - theta, primitives.supply_elasticity);
  terms[1] = divide(theta, primitives.inverse_marginal_surplus);
  terms[2] = divide(theta, primitives.conduct_elasticity);

  bool any_plus = false, any_minus = false;
  double finite_sum = 1.0;
  for (const auto& t : terms) {
    any_plus |= t.plus_inf;
    any_minus |= t.minus_inf;
    finite_sum += t.value;
  }
  if (any_plus && any_minus)
    fail(ErrorKind::UndefinedLimit, "opposing infinite terms in pass-through denominator");
  if (any_plus || any_minus) return 0.0; // 1/(+-inf)
  if (finite_sum == 0.0)
    fail(ErrorKind::UndefinedLimit, "pass-through denominator is zero (infinite rate)");
  return 1.0 / finite_sum;
}

double hidden_unit_tax(double semi_elasticity, double mean_price, double rho_mc) {
  if (rho_mc <= 0.0)
    fail(ErrorKind::NonPositiveRho, "pass-through rate must be positive, got " +
                                        format_double(rho_mc));
  return semi_elasticity * mean_price / rho_mc;
}

WelfareReport welfare_effects(double tau, double rho_mc, double theta, double annual_units,
                              double mean_price) {
  if (theta < 0.0 || theta > 1.0)
    fail(ErrorKind::Config, "conduct parameter must lie in [0, 1]");
  if (annual_units <= 0.0) fail(ErrorKind::Config, "annual units must be positive");
  double ps_factor = 1.0 - rho_mc * (1.0 - theta);
  if (ps_factor <= 0.0)
    fail(ErrorKind::NegativePSFactor,
         "1 - rho(1-theta) = " + format_double(ps_factor) +
             " <= 0: producer-surplus effect changes sign");

  WelfareReport r;
  r.tau = tau;
  r.rho = rho_mc;
  r.theta = theta;
  r.annual_units = annual_units;
  r.mean_price = mean_price;
  r.price_change = rho_mc * tau;
  r.consumer_surplus = -r.price_change * annual_units;
  r.producer_surplus = -ps_factor * annual_units * tau;
  r.total_harm = std::abs(r.consumer_surplus) + std::abs(r.producer_surplus);
  r.fictional_revenue = tau * annual_units;
  r.excess_burden = r.total_harm - r.fictional_revenue;
  r.incidence = rho_mc / ps_factor;
  r.consumer_share = r.incidence / (1.0 + r.incidence);
  return r;
}

double marginal_excess_burden(double rho_mc, double theta, double annual_units) {
  return rho_mc * theta * annual_units;
}

std::vector<SweepRow> sensitivity_sweep(double tau, double rho_mc, double annual_units,
                                        double mean_price, double theta_lo, double theta_hi,
                                        int steps) {
  std::vector<SweepRow> rows;
  if (steps < 1) steps = 1;
  double prev_incidence = kNaN;
  for (int i = 0; i <= steps; ++i) {
    double theta = theta_lo + (theta_hi - theta_lo) * i / steps;
    SweepRow row;
    row.theta = theta;
    row.rho = rho_mc;
    row.report = welfare_effects(tau, rho_mc, theta, annual_units, mean_price);
    row.incidence_increased = !is_missing(prev_incidence) && row.report.incidence > prev_incidence;
    prev_incidence = row.report.incidence;
    rows.push_back(row);
  }
  return rows;
}

} // namespace crimepass::welfare
