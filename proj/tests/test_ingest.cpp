#include <doctest.h>

#include <algorithm>
#include <random>

#include "crimepass/ingest.hpp"
#include "helpers.hpp"

using namespace crimepass;

namespace {

const char* kStores =
    "store_id,latitude,longitude,firm_id\n"
    "A,47.6,-122.3,F1\n"
    "B,47.7,-122.4,F1\n"
    "C,46.5,-120.0,F2\n";

const char* kTxHeader =
    "store_id,product_producer,product_category,product_name,unit_weight,month,"
    "retail_revenue,retail_quantity,wholesale_expenditure,wholesale_quantity\n";

Dataset load(testhelp::TempDir& dir, const std::string& transactions,
             const std::string& crimes = "store_id,month,kind\n") {
  testhelp::write_file(dir.file("stores.csv"), kStores);
  testhelp::write_file(dir.file("tx.csv"), transactions);
  testhelp::write_file(dir.file("crimes.csv"), crimes);
  return ingest::ingest_tables(dir.file("stores.csv"), dir.file("tx.csv"), dir.file("crimes.csv"));
}

} // namespace

TEST_CASE("empty transactions file yields an empty table") {
  testhelp::TempDir dir("ingest_empty");
  auto data = load(dir, kTxHeader);
  CHECK(data.transactions.empty());
  CHECK(data.stores.size() == 3);
  auto panel = ingest::build_product_month_panel(data);
  CHECK(panel.cells.empty());
}

TEST_CASE("crime rows must reference known stores") {
  testhelp::TempDir dir("ingest_unknown");
  CHECK_THROWS_WITH_AS(load(dir, kTxHeader, "store_id,month,kind\nZZ,2018-05,robbery\n"),
                       doctest::Contains("unknown store_id 'ZZ'"), Error);
  try {
    load(dir, kTxHeader, "store_id,month,kind\nZZ,2018-05,robbery\n");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownStore);
  }
}

TEST_CASE("hand-written fixture parses field by field") {
  testhelp::TempDir dir("ingest_fixture");
  std::string tx = kTxHeader;
  tx += "A,P1,flower,og-kush,1,2018-03,100,4,40,4\n";
  tx += "B,P1,edible,gummy,,2018-04,55.5,3,20.25,2\n";
  tx += "A,P2,flower,og-kush,1,2018-03,10,2,0,0\n";
  auto data = load(dir, tx);
  REQUIRE(data.transactions.size() == 3);

  const auto& t0 = data.transactions[0];
  CHECK(data.stores.id[t0.store] == "A");
  CHECK(t0.month == 2018 * 12 + 2);
  CHECK(t0.retail_revenue == 100.0);
  CHECK(t0.retail_quantity == 4.0);
  CHECK(t0.wholesale_expenditure == 40.0);
  CHECK(t0.wholesale_quantity == 4.0);

  const auto& t1 = data.transactions[1];
  CHECK(data.stores.id[t1.store] == "B");
  CHECK(t1.month == 2018 * 12 + 3);
  CHECK(t1.retail_revenue == 55.5);
  CHECK(is_missing(data.products.unit_weight[t1.product]));

  // P1 and P2 are different producers of the same category/name/weight
  CHECK(data.transactions[0].product != data.transactions[2].product);
}

TEST_CASE("aggregation forms unit prices") {
  testhelp::TempDir dir("ingest_agg");
  std::string tx = kTxHeader;
  tx += "A,P1,flower,og,1,2018-03,100,4,40,4\n";          // single row: P = 25
  tx += "B,P1,flower,og,1,2018-03,10,2,0,0\n";            // two rows, same cell
  tx += "B,P1,flower,og,1,2018-03,20,2,0,0\n";            // -> P = 30/4 = 7.5
  tx += "C,P1,flower,og,1,2018-03,8,1,0,0\n";             // wholesale absent
  auto data = load(dir, tx);
  auto panel = ingest::build_product_month_panel(data);
  REQUIRE(panel.cells.size() == 3);

  auto find = [&](const std::string& store) {
    for (const auto& c : panel.cells)
      if (data.stores.id[c.store] == store) return c;
    REQUIRE(false);
    return panel.cells[0];
  };
  CHECK(find("A").retail_price == 25.0);
  CHECK(find("A").wholesale_price == 10.0);
  CHECK(find("B").retail_price == 7.5);
  CHECK(is_missing(find("B").wholesale_price));
  CHECK(find("C").retail_price == 8.0);
  CHECK(is_missing(find("C").wholesale_price));
}

TEST_CASE("aggregation is order independent and conserves revenue") {
  testhelp::TempDir dir("ingest_perm");
  std::mt19937 rng(7);
  std::vector<std::string> rows;
  for (int i = 0; i < 60; ++i) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%c,P%d,flower,sku%d,1,2018-%02d,%d.%d,%d,%d,%d\n",
                  "ABC"[i % 3], i % 4, i % 5, 3 + (i % 6), 10 + i, i % 10, 1 + (i % 7), i % 30,
                  i % 3 == 0 ? 0 : 1 + (i % 5));
    rows.push_back(buf);
  }
  auto build = [&](const std::vector<std::string>& ordering) {
    std::string tx = kTxHeader;
    for (const auto& r : ordering) tx += r;
    auto data = load(dir, tx);
    return std::make_pair(ingest::build_product_month_panel(data), data.transactions.size());
  };
  auto [panel1, n1] = build(rows);
  std::shuffle(rows.begin(), rows.end(), rng);
  auto [panel2, n2] = build(rows);

  REQUIRE(panel1.cells.size() == panel2.cells.size());
  CHECK(panel1.cells.size() <= n1);
  for (std::size_t i = 0; i < panel1.cells.size(); ++i) {
    const auto& a = panel1.cells[i];
    const auto& b = panel2.cells[i];
    CHECK(a.store == b.store);
    CHECK(a.month == b.month);
    CHECK(a.retail_revenue == b.retail_revenue);
    CHECK(a.retail_price == b.retail_price);
    // price times quantity reproduces summed revenue
    CHECK(std::abs(a.retail_price * a.retail_quantity - a.retail_revenue) <=
          1e-9 * std::max(1.0, std::abs(a.retail_revenue)));
  }
}

TEST_CASE("validation failures abort with diagnostics") {
  testhelp::TempDir dir("ingest_bad");

  SUBCASE("zero quantity") {
    std::string tx = kTxHeader;
    tx += "A,P1,flower,og,1,2018-03,100,0,0,0\n";
    try {
      load(dir, tx);
      FAIL("expected NonPositiveQuantity");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonPositiveQuantity);
      CHECK(std::string(e.what()).find(":2") != std::string::npos); // line number
    }
  }
  SUBCASE("malformed number names row and column") {
    std::string tx = kTxHeader;
    tx += "A,P1,flower,og,1,2018-03,abc,1,0,0\n";
    try {
      load(dir, tx);
      FAIL("expected MalformedRow");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MalformedRow);
      CHECK(std::string(e.what()).find("retail_revenue") != std::string::npos);
    }
  }
  SUBCASE("out of range coordinates") {
    testhelp::write_file(dir.file("stores.csv"),
                         "store_id,latitude,longitude,firm_id\nA,95.0,-122.3,F1\n");
    testhelp::write_file(dir.file("tx.csv"), kTxHeader);
    testhelp::write_file(dir.file("crimes.csv"), "store_id,month,kind\n");
    try {
      ingest::ingest_tables(dir.file("stores.csv"), dir.file("tx.csv"), dir.file("crimes.csv"));
      FAIL("expected OutOfRangeCoordinate");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::OutOfRangeCoordinate);
    }
  }
  SUBCASE("month outside the sample window") {
    std::string tx = kTxHeader;
    tx += "A,P1,flower,og,1,2025-01,10,1,0,0\n";
    testhelp::write_file(dir.file("stores.csv"), kStores);
    testhelp::write_file(dir.file("tx.csv"), tx);
    testhelp::write_file(dir.file("crimes.csv"), "store_id,month,kind\n");
    ingest::Options options;
    options.sample_start = parse_month("2018-03");
    options.sample_end = parse_month("2021-12");
    CHECK_THROWS_AS(ingest::ingest_tables(dir.file("stores.csv"), dir.file("tx.csv"),
                                          dir.file("crimes.csv"), options),
                    Error);
  }
}
