#include "crimepass/ingest.hpp"

#include <algorithm>

#include "crimepass/csv.hpp"

namespace crimepass::ingest {

namespace {

[[noreturn]] void malformed(const csv::Reader& reader, const std::string& column,
                            const std::string& detail) {
  fail(ErrorKind::MalformedRow, reader.path() + ":" + std::to_string(reader.line_number()) +
                                    " column '" + column + "': " + detail);
}

double require_double(const csv::Reader& reader, const std::vector<std::string>& fields,
                      std::size_t col, const std::string& name) {
  if (col >= fields.size()) malformed(reader, name, "missing field");
  auto v = parse_double(fields[col]);
  if (!v) malformed(reader, name, "not a number: '" + fields[col] + "'");
  return *v;
}

int require_month(const csv::Reader& reader, const std::vector<std::string>& fields,
                  std::size_t col, const std::string& name, const Options& options) {
  if (col >= fields.size()) malformed(reader, name, "missing field");
  auto m = parse_month(fields[col]);
  if (!m) malformed(reader, name, "not a month: '" + fields[col] + "'");
  if ((options.sample_start && *m < *options.sample_start) ||
      (options.sample_end && *m > *options.sample_end))
    malformed(reader, name, "month " + fields[col] + " outside the configured sample window");
  return *m;
}

const std::string& require_field(const csv::Reader& reader, const std::vector<std::string>& fields,
                                 std::size_t col, const std::string& name) {
  if (col >= fields.size()) malformed(reader, name, "missing field");
  if (fields[col].empty()) malformed(reader, name, "empty field");
  return fields[col];
}

void read_stores(const std::string& path, StoreTable& stores) {
  csv::Reader reader(path);
  auto c_id = reader.column("store_id");
  auto c_lat = reader.column("latitude");
  auto c_lon = reader.column("longitude");
  auto c_firm = reader.column("firm_id");
  int c_urban = reader.optional_column("urban_flag");
  stores.has_urban = c_urban >= 0;

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    const auto& id = require_field(reader, fields, c_id, "store_id");
    if (stores.lookup(id) >= 0) malformed(reader, "store_id", "duplicate store_id '" + id + "'");
    double lat = require_double(reader, fields, c_lat, "latitude");
    double lon = require_double(reader, fields, c_lon, "longitude");
    if (lat < -90.0 || lat > 90.0)
      fail(ErrorKind::OutOfRangeCoordinate, path + ":" + std::to_string(reader.line_number()) +
                                                " latitude " + format_double(lat) +
                                                " outside [-90, 90]");
    if (lon < -180.0 || lon > 180.0)
      fail(ErrorKind::OutOfRangeCoordinate, path + ":" + std::to_string(reader.line_number()) +
                                                " longitude " + format_double(lon) +
                                                " outside [-180, 180]");
    const auto& firm = require_field(reader, fields, c_firm, "firm_id");
    std::uint8_t urb = 0;
    if (c_urban >= 0) {
      const auto& raw = fields.size() > static_cast<std::size_t>(c_urban)
                            ? fields[static_cast<std::size_t>(c_urban)]
                            : std::string();
      urb = (raw == "1" || raw == "true") ? 1 : 0;
    }
    stores.add(id, lat, lon, firm, urb);
  }
}

void read_transactions(const std::string& path, Dataset& data, const Options& options) {
  csv::Reader reader(path);
  auto c_store = reader.column("store_id");
  auto c_prod = reader.column("product_producer");
  auto c_cat = reader.column("product_category");
  auto c_name = reader.column("product_name");
  auto c_weight = reader.column("unit_weight");
  auto c_month = reader.column("month");
  auto c_rev = reader.column("retail_revenue");
  auto c_qty = reader.column("retail_quantity");
  auto c_wexp = reader.column("wholesale_expenditure");
  auto c_wqty = reader.column("wholesale_quantity");

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    TransactionRecord rec;
    const auto& sid = require_field(reader, fields, c_store, "store_id");
    rec.store = data.stores.lookup(sid);
    if (rec.store < 0)
      fail(ErrorKind::UnknownStore, path + ":" + std::to_string(reader.line_number()) +
                                        " unknown store_id '" + sid + "'");
    const auto& producer = require_field(reader, fields, c_prod, "product_producer");
    const auto& category = require_field(reader, fields, c_cat, "product_category");
    const auto& name = require_field(reader, fields, c_name, "product_name");
    double weight = kNaN;
    if (c_weight < fields.size() && !fields[c_weight].empty()) {
      auto w = parse_double(fields[c_weight]);
      if (!w) malformed(reader, "unit_weight", "not a number: '" + fields[c_weight] + "'");
      weight = *w;
    }
    rec.product = data.products.intern(producer, category, name, weight);
    rec.month = require_month(reader, fields, c_month, "month", options);
    rec.retail_revenue = require_double(reader, fields, c_rev, "retail_revenue");
    rec.retail_quantity = require_double(reader, fields, c_qty, "retail_quantity");
    rec.wholesale_expenditure = require_double(reader, fields, c_wexp, "wholesale_expenditure");
    rec.wholesale_quantity = require_double(reader, fields, c_wqty, "wholesale_quantity");
    if (rec.retail_quantity <= 0.0)
      fail(ErrorKind::NonPositiveQuantity, path + ":" + std::to_string(reader.line_number()) +
                                               " retail_quantity must be > 0, got " +
                                               format_double(rec.retail_quantity));
    if (rec.retail_revenue < 0.0)
      malformed(reader, "retail_revenue", "negative revenue");
    if (rec.wholesale_expenditure < 0.0)
      malformed(reader, "wholesale_expenditure", "negative expenditure");
    if (rec.wholesale_quantity < 0.0)
      malformed(reader, "wholesale_quantity", "negative quantity");
    data.transactions.push_back(rec);
  }
}

void read_crimes(const std::string& path, Dataset& data, const Options& options) {
  csv::Reader reader(path);
  auto c_store = reader.column("store_id");
  auto c_month = reader.column("month");
  auto c_kind = reader.column("kind");

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    CrimeIncident inc;
    const auto& sid = require_field(reader, fields, c_store, "store_id");
    int idx = data.stores.lookup(sid);
    if (idx < 0)
      fail(ErrorKind::UnknownStore, path + ":" + std::to_string(reader.line_number()) +
                                        " unknown store_id '" + sid + "'");
    inc.store = idx;
    inc.month = require_month(reader, fields, c_month, "month", options);
    const auto& kind = require_field(reader, fields, c_kind, "kind");
    if (kind == "robbery") inc.kind = CrimeKind::Robbery;
    else if (kind == "burglary") inc.kind = CrimeKind::Burglary;
    else malformed(reader, "kind", "expected robbery or burglary, got '" + kind + "'");
    data.crimes.push_back(inc);
  }
}

} // namespace

Dataset ingest_tables(const std::string& stores_csv, const std::string& transactions_csv,
                      const std::string& crimes_csv, const Options& options) {
  Dataset data;
  data.sample_start = options.sample_start;
  data.sample_end = options.sample_end;
  read_stores(stores_csv, data.stores);
  read_transactions(transactions_csv, data, options);
  read_crimes(crimes_csv, data, options);
  return data;
}

ProductMonthPanel build_product_month_panel(const Dataset& data) {
  ProductMonthPanel panel;
  if (data.transactions.empty()) {
    panel.store_begin.assign(static_cast<std::size_t>(data.stores.size()) + 1, 0);
    return panel;
  }

  std::vector<TransactionRecord> sorted = data.transactions;
  std::sort(sorted.begin(), sorted.end(), [](const TransactionRecord& a, const TransactionRecord& b) {
    if (a.store != b.store) return a.store < b.store;
    if (a.product != b.product) return a.product < b.product;
    return a.month < b.month;
  });

  panel.cells.reserve(sorted.size());
  for (const auto& rec : sorted) {
    if (!panel.cells.empty()) {
      auto& last = panel.cells.back();
      if (last.store == rec.store && last.product == rec.product && last.month == rec.month) {
        last.retail_revenue += rec.retail_revenue;
        last.retail_quantity += rec.retail_quantity;
        last.wholesale_expenditure += rec.wholesale_expenditure;
        last.wholesale_quantity += rec.wholesale_quantity;
        continue;
      }
    }
    ProductMonthCell cell;
    cell.store = rec.store;
    cell.product = rec.product;
    cell.month = rec.month;
    cell.retail_revenue = rec.retail_revenue;
    cell.retail_quantity = rec.retail_quantity;
    cell.wholesale_expenditure = rec.wholesale_expenditure;
    cell.wholesale_quantity = rec.wholesale_quantity;
    panel.cells.push_back(cell);
  }

  panel.month_min = panel.cells.front().month;
  panel.month_max = panel.cells.front().month;
  for (auto& cell : panel.cells) {
    cell.retail_price = cell.retail_revenue / cell.retail_quantity;
    cell.wholesale_price =
        cell.wholesale_quantity > 0.0 ? cell.wholesale_expenditure / cell.wholesale_quantity : kNaN;
    panel.month_min = std::min(panel.month_min, cell.month);
    panel.month_max = std::max(panel.month_max, cell.month);
  }
  if (data.sample_start) panel.month_min = std::min(panel.month_min, *data.sample_start);
  if (data.sample_end) panel.month_max = std::max(panel.month_max, *data.sample_end);

  panel.store_begin.assign(static_cast<std::size_t>(data.stores.size()) + 1, 0);
  for (const auto& cell : panel.cells) ++panel.store_begin[static_cast<std::size_t>(cell.store) + 1];
  for (std::size_t s = 1; s < panel.store_begin.size(); ++s)
    panel.store_begin[s] += panel.store_begin[s - 1];
  return panel;
}

} // namespace crimepass::ingest
