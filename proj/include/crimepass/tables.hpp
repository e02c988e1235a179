#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crimepass/common.hpp"

namespace crimepass {

// Dense in-memory store table. Stores are addressed by index everywhere
// downstream; string ids only survive for I/O.
struct StoreTable {
  std::vector<std::string> id;
  std::vector<double> latitude;
  std::vector<double> longitude;
  std::vector<std::string> firm_id;
  std::vector<std::uint8_t> urban; // 0/1; meaningful only if has_urban
  bool has_urban = false;
  std::unordered_map<std::string, int> index_of;

  int size() const { return static_cast<int>(id.size()); }
  int add(std::string store_id, double lat, double lon, std::string firm, std::uint8_t urb);
  int lookup(const std::string& store_id) const;

  // Number of stores sharing the given store's firm id.
  std::vector<int> firm_sizes() const;
};

// Product identity: producer-category-name-unit weight. Unit weight is
// optional; products without one fall back to a per-category subcategory.
struct ProductCatalog {
  std::vector<std::string> producer;
  std::vector<std::string> category;
  std::vector<std::string> name;
  std::vector<double> unit_weight; // NaN when absent
  std::vector<int> subcategory;    // interned (category, unit weight) id
  std::vector<std::string> subcategory_label;

  std::unordered_map<std::string, int> index_of; // joined key -> product id
  std::unordered_map<std::string, int> subcat_of;

  int size() const { return static_cast<int>(producer.size()); }
  int intern(const std::string& prod, const std::string& cat, const std::string& nam,
             double weight);
  int subcategory_count() const { return static_cast<int>(subcat_of.size()); }
};

struct TransactionRecord {
  int store = 0;
  int product = 0;
  int month = 0;
  double retail_revenue = 0;
  double retail_quantity = 0;
  double wholesale_expenditure = 0;
  double wholesale_quantity = 0;
};

enum class CrimeKind : std::uint8_t { Robbery, Burglary };

struct CrimeIncident {
  int store = 0;
  int month = 0;
  CrimeKind kind = CrimeKind::Robbery;
};

struct Dataset {
  StoreTable stores;
  ProductCatalog products;
  std::vector<TransactionRecord> transactions;
  std::vector<CrimeIncident> crimes;
  std::optional<int> sample_start; // inclusive month bounds
  std::optional<int> sample_end;
};

// One aggregated store-product-month cell. retail_price is exactly
// revenue/quantity; wholesale_price is NaN when wholesale_quantity == 0.
struct ProductMonthCell {
  int store = 0;
  int product = 0;
  int month = 0;
  double retail_revenue = 0;
  double retail_quantity = 0;
  double wholesale_expenditure = 0;
  double wholesale_quantity = 0;
  double retail_price = 0;
  double wholesale_price = kNaN;
};

struct ProductMonthPanel {
  // Sorted by (store, product, month); store_begin[s]..store_begin[s+1]
  // bounds store s's cells.
  std::vector<ProductMonthCell> cells;
  std::vector<std::size_t> store_begin;
  int month_min = 0;
  int month_max = -1;
};

// Store-month index series; NaN marks a gap.
struct SeriesTable {
  int month_min = 0;
  int month_max = -1; // inclusive
  int n_stores = 0;
  std::vector<double> values; // [store][month - month_min]

  int months() const { return month_max - month_min + 1; }
  double& at(int store, int month) { return values[static_cast<std::size_t>(store) * months() + (month - month_min)]; }
  double at(int store, int month) const { return values[static_cast<std::size_t>(store) * months() + (month - month_min)]; }
  bool in_range(int month) const { return month >= month_min && month <= month_max; }

  static SeriesTable empty(int n_stores, int month_min, int month_max);
};

} // namespace crimepass
