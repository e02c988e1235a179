#pragma once

#include <optional>
#include <string>

#include "crimepass/tables.hpp"

namespace crimepass::ingest {

struct Options {
  std::optional<int> sample_start; // inclusive integer month bounds
  std::optional<int> sample_end;
};

/// Parses and validates the three input tables. Referential integrity is
/// enforced: every transaction and crime row must name a known store.
Dataset ingest_tables(const std::string& stores_csv, const std::string& transactions_csv,
                      const std::string& crimes_csv, const Options& options = {});

/// Aggregates validated transactions to one cell per (store, product, month).
/// Retail price is summed revenue over summed quantity; the wholesale price is
/// absent when no wholesale quantity was recorded.
ProductMonthPanel build_product_month_panel(const Dataset& data);

} // namespace crimepass::ingest
