#pragma once

#include <vector>

#include "crimepass/common.hpp"

namespace crimepass::welfare {

// Elasticity value on the extended real line. Infinity is an exact limit
// (constant marginal cost, constant conduct), never a floating-point Inf.
struct ExtReal {
  double value = 0;
  bool infinite = false;

  static ExtReal finite(double v) { return {v, false}; }
  static ExtReal infinity() { return {0, true}; }
};

struct MarketPrimitives {
  double demand_elasticity = 1;       // eps_D > 0 as defined
  ExtReal supply_elasticity;          // eps_S > 0, infinity for constant MC
  double conduct = 0;                 // theta in [0, 1]
  ExtReal inverse_marginal_surplus;   // eps_ms, sign-free
  ExtReal conduct_elasticity;         // eps_theta
};

/// Unit-tax pass-through under symmetric imperfect competition:
/// rho = 1 / (1 + (eps_D - theta)/eps_S + theta/eps_ms + theta/eps_theta),
/// with exact limit rules (x/inf = 0). Indeterminate forms (0/0, opposing
/// infinities, zero denominator) raise UndefinedLimit.
double passthrough_rate(const MarketPrimitives& primitives);

/// Hidden unit tax implied by a log-point price response: the dollar price
/// effect divided by the marginal-cost pass-through rate.
double hidden_unit_tax(double semi_elasticity, double mean_price, double rho_mc);

struct WelfareReport {
  // inputs echoed
  double tau = 0;
  double rho = 0;
  double theta = 0;
  double annual_units = 0;
  double mean_price = 0;
  // effects (dollars per year; harms are negative)
  double price_change = 0;     // rho * tau
  double consumer_surplus = 0; // -price_change * q
  double producer_surplus = 0; // -(1 - rho(1-theta)) * q * tau
  double total_harm = 0;       // |dCS| + |dPS|
  double fictional_revenue = 0;
  double excess_burden = 0;
  double incidence = 0;      // consumer-to-producer harm ratio
  double consumer_share = 0; // incidence / (1 + incidence)
};

/// Small-tax linearization of the welfare effects of a unit tax tau at
/// pass-through rho and conduct theta, scaled by annual units sold.
WelfareReport welfare_effects(double tau, double rho_mc, double theta, double annual_units,
                              double mean_price);

/// Marginal excess burden per unit tax: rho * theta * q.
double marginal_excess_burden(double rho_mc, double theta, double annual_units);

struct SweepRow {
  double theta = 0;
  double rho = 0;
  WelfareReport report;
  bool incidence_increased = false; // versus the previous grid point
};

/// Grid evaluation over theta at a fixed pass-through rate, with a
/// monotonicity diagnostic on the incidence.
std::vector<SweepRow> sensitivity_sweep(double tau, double rho_mc, double annual_units,
                                        double mean_price, double theta_lo, double theta_hi,
                                        int steps);

} // namespace crimepass::welfare
