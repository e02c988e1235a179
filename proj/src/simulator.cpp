#include "crimepass/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "crimepass/parallel.hpp"
#include "crimepass/spatial.hpp"

namespace crimepass::simulator {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Small self-contained generator so output does not depend on the standard
// library's distribution implementations.
class Stream {
public:
  Stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) {
    state_ = splitmix64(seed ^ splitmix64(domain * 0x9E3779B97F4A7C15ull + index));
    if (state_ == 0) state_ = 0x853C49E6748FEA9Bull;
  }

  std::uint64_t next_u64() {
    // xorshift64*
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

  int poisson(double mean) {
    double limit = std::exp(-mean);
    double prod = uniform();
    int n = 0;
    while (prod > limit) {
      prod *= uniform();
      ++n;
    }
    return n;
  }

  int uniform_int(int n) { return static_cast<int>(uniform() * n) % n; }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0;
};

constexpr std::uint64_t kDomainCatalog = 1;
constexpr std::uint64_t kDomainLayout = 2;
constexpr std::uint64_t kDomainStore = 3;
constexpr std::uint64_t kDomainCrime = 4;
constexpr std::uint64_t kDomainFirm = 5;

constexpr double kMilesPerDegreeLat = 69.0;

struct CatalogProduct {
  int producer;
  int category;
  double unit_weight;
  double base_price;
  double base_wholesale;
  double base_quantity;
};

struct StoreState {
  double lat = 0, lon = 0;
  int town = -1;
  int firm = -1;
  bool urban = false;
  double markup = 1.0;
  std::vector<int> stocked;              // catalog ids, ascending
  std::vector<std::uint8_t> present;     // [product][month]
  std::vector<double> wholesale;         // [product][month] dollars
  std::vector<double> quantity;          // [product][month] units
  std::vector<double> wholesale_qty;     // [product][month]
  std::vector<double> log_noise;         // [product][month]
  std::vector<double> store_noise;       // [month], AR(1)
};

const char* kCategoryNames[] = {"flower", "edible", "concentrate", "preroll",
                                "topical", "beverage", "cartridge", "tincture"};
const double kUnitWeights[] = {0.5, 1.0, 2.0, 3.5, 7.0};

} // namespace

void validate(const DgpConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::Config, "invalid simulation config: " + what);
  };
  require(c.n_stores >= 1, "n_stores must be >= 1");
  require(c.n_months >= 2, "n_months must be >= 2");
  require(c.products_per_store_mean > 0, "products_per_store_mean must be > 0");
  require(c.presence_prob > 0 && c.presence_prob <= 1, "presence_prob must be in (0, 1]");
  require(c.base_price > 0, "base_price must be > 0");
  require(c.crime_hazard >= 0 && c.crime_hazard <= 1, "crime_hazard must be in [0, 1]");
  require(c.crime_q4_multiplier >= 0, "crime_q4_multiplier must be >= 0");
  require(c.robbery_share >= 0 && c.robbery_share <= 1, "robbery_share in [0, 1]");
  for (double sigma : {c.price_sigma_product, c.store_markup_sigma, c.ar1_sigma,
                       c.product_noise_sigma, c.wholesale_sigma, c.quantity_sigma,
                       c.wholesale_quantity_jitter, c.town_sigma_miles})
    require(sigma >= 0 && std::isfinite(sigma), "scale parameters must be finite and >= 0");
  require(std::abs(c.ar1_coefficient) < 1, "ar1_coefficient must be in (-1, 1)");
  require(c.wholesale_base_ratio > 0 && c.wholesale_base_ratio < 1,
          "wholesale_base_ratio must be in (0, 1)");
  for (double v : c.victim_effect) require(std::isfinite(v), "victim_effect must be finite");
  for (double v : c.rival_effect) require(std::isfinite(v), "rival_effect must be finite");
  require(c.layout != Layout::ClusteredTowns || c.towns >= 1, "towns must be >= 1");
  require(c.quantity_mean >= 1, "quantity_mean must be >= 1");
  require(c.seasonal_amplitude >= 0, "seasonal_amplitude must be >= 0");
  require(c.effect_radius_miles >= 0, "effect_radius_miles must be >= 0");
}

std::vector<double> oracle_path(const std::vector<double>& increments, int k) {
  std::vector<double> cum(static_cast<std::size_t>(k) + 1, 0.0);
  double running = 0;
  for (int L = 0; L <= k; ++L) {
    if (L < static_cast<int>(increments.size())) running += increments[L];
    cum[L] = running;
  }
  return cum;
}

namespace {

double cumulative_at(const std::vector<double>& increments, int lag) {
  if (lag < 0) return 0.0;
  double running = 0;
  int last = std::min<int>(lag, static_cast<int>(increments.size()) - 1);
  for (int l = 0; l <= last; ++l) running += increments[l];
  return running;
}

} // namespace

SimulatedMarket generate(const DgpConfig& config, int threads) {
  validate(config);
  SimulatedMarket out;
  out.truth.config = config;

  int n_stores = config.n_stores;
  int n_months = config.n_months;
  int m0 = config.start_month;

  // catalog
  int n_catalog = std::max(10, static_cast<int>(config.products_per_store_mean * 3));
  std::vector<CatalogProduct> catalog(n_catalog);
  {
    Stream rng(config.seed, kDomainCatalog, 0);
    int n_cats = std::clamp(config.n_categories, 1,
                            static_cast<int>(std::size(kCategoryNames)));
    for (auto& p : catalog) {
      p.producer = rng.uniform_int(std::max(1, config.n_producers));
      p.category = rng.uniform_int(n_cats);
      p.unit_weight = kUnitWeights[rng.uniform_int(static_cast<int>(std::size(kUnitWeights)))];
      p.base_price = config.base_price * std::exp(config.price_sigma_product * rng.normal());
      p.base_wholesale = p.base_price * config.wholesale_base_ratio;
      p.base_quantity = std::max(1.0, config.quantity_mean * std::exp(0.4 * rng.normal()));
    }
  }

  // layout: positions, towns, urban flags
  std::vector<StoreState> stores(n_stores);
  {
    Stream rng(config.seed, kDomainLayout, 0);
    double lat_span = config.box_lat_max - config.box_lat_min;
    double lon_span = config.box_lon_max - config.box_lon_min;
    std::vector<std::pair<double, double>> towns;
    if (config.layout == Layout::ClusteredTowns) {
      // jittered grid keeps towns apart so control donuts stay populated
      int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(config.towns))));
      int rows = (config.towns + cols - 1) / cols;
      for (int t = 0; t < config.towns; ++t) {
        int r = t / cols, c = t % cols;
        double lat = config.box_lat_min + lat_span * (r + 0.5 + 0.2 * (rng.uniform() - 0.5)) /
                                              std::max(1, rows);
        double lon = config.box_lon_min + lon_span * (c + 0.5 + 0.2 * (rng.uniform() - 0.5)) /
                                              std::max(1, cols);
        towns.emplace_back(lat, lon);
      }
    }
    for (int s = 0; s < n_stores; ++s) {
      auto& st = stores[s];
      if (config.layout == Layout::UniformBox) {
        st.lat = config.box_lat_min + lat_span * rng.uniform();
        st.lon = config.box_lon_min + lon_span * rng.uniform();
      } else {
        st.town = rng.uniform_int(static_cast<int>(towns.size()));
        auto [tlat, tlon] = towns[st.town];
        double dlat = config.town_sigma_miles * rng.normal() / kMilesPerDegreeLat;
        double dlon = config.town_sigma_miles * rng.normal() /
                      (kMilesPerDegreeLat * std::max(0.2, std::cos(tlat * std::numbers::pi / 180.0)));
        st.lat = std::clamp(tlat + dlat, -89.9, 89.9);
        st.lon = std::clamp(tlon + dlon, -179.9, 179.9);
        st.urban = st.town < config.urban_towns;
      }
    }
  }

  // firms: a mix of independents and chains
  {
    Stream rng(config.seed, kDomainFirm, 0);
    int firm = 0;
    int s = 0;
    while (s < n_stores) {
      double u = rng.uniform();
      int size = u < 0.55 ? 1 : u < 0.72 ? 2 : u < 0.85 ? 3 : u < 0.94 ? 4 : 5;
      for (int i = 0; i < size && s < n_stores; ++i, ++s) stores[s].firm = firm;
      ++firm;
    }
  }

  // crimes from per-store streams
  std::vector<CrimeIncident> crimes;
  {
    for (int s = 0; s < n_stores; ++s) {
      Stream rng(config.seed, kDomainCrime, static_cast<std::uint64_t>(s));
      for (int m = 0; m < n_months; ++m) {
        int month_of_year = (m0 + m) % 12;
        double hazard = config.crime_hazard;
        if (month_of_year >= 9) hazard *= config.crime_q4_multiplier;
        if (rng.bernoulli(std::min(1.0, hazard))) {
          CrimeIncident inc;
          inc.store = s;
          inc.month = m0 + m;
          inc.kind = rng.bernoulli(config.robbery_share) ? CrimeKind::Robbery
                                                         : CrimeKind::Burglary;
          crimes.push_back(inc);
        }
      }
    }
  }

  // treatment timing for effect injection: victims take their first own
  // incident, never-victimized stores their first incident within the
  // effect radius
  std::vector<int> first_own(n_stores, INT_MAX);
  for (const auto& c : crimes) first_own[c.store] = std::min(first_own[c.store], c.month);
  std::vector<int> first_nearby(n_stores, INT_MAX);
  for (const auto& c : crimes) {
    for (int s = 0; s < n_stores; ++s) {
      if (s == c.store || first_own[s] != INT_MAX) continue;
      double d = spatial::geodesic_distance(stores[s].lat, stores[s].lon, stores[c.store].lat,
                                            stores[c.store].lon);
      if (d < config.effect_radius_miles) first_nearby[s] = std::min(first_nearby[s], c.month);
    }
  }

  // phase 1: per-store draws (stocked set, noise, wholesale costs, quantities)
  parallel_for(static_cast<std::size_t>(n_stores), threads, [&](std::size_t si) {
    auto s = static_cast<int>(si);
    auto& st = stores[s];
    Stream rng(config.seed, kDomainStore, static_cast<std::uint64_t>(s));
    st.markup = std::exp(config.store_markup_sigma * rng.normal());

    int n_products = std::max(1, std::min(n_catalog, rng.poisson(config.products_per_store_mean)));
    std::vector<int> all(n_catalog);
    for (int i = 0; i < n_catalog; ++i) all[i] = i;
    for (int i = 0; i < n_products; ++i) {
      int j = i + rng.uniform_int(n_catalog - i);
      std::swap(all[i], all[j]);
    }
    st.stocked.assign(all.begin(), all.begin() + n_products);
    std::sort(st.stocked.begin(), st.stocked.end());

    st.store_noise.resize(n_months);
    double stationary_sd =
        config.ar1_sigma / std::sqrt(1.0 - config.ar1_coefficient * config.ar1_coefficient);
    st.store_noise[0] = stationary_sd * rng.normal();
    for (int m = 1; m < n_months; ++m)
      st.store_noise[m] =
          config.ar1_coefficient * st.store_noise[m - 1] + config.ar1_sigma * rng.normal();

    auto cells = static_cast<std::size_t>(n_products) * n_months;
    st.present.resize(cells);
    st.wholesale.resize(cells);
    st.quantity.resize(cells);
    st.wholesale_qty.resize(cells);
    st.log_noise.resize(cells);
    for (int p = 0; p < n_products; ++p) {
      const auto& prod = catalog[st.stocked[p]];
      for (int m = 0; m < n_months; ++m) {
        auto idx = static_cast<std::size_t>(p) * n_months + m;
        st.present[idx] = rng.bernoulli(config.presence_prob);
        st.wholesale[idx] = prod.base_wholesale * std::exp(config.wholesale_sigma * rng.normal());
        st.quantity[idx] =
            std::max(1.0, std::round(prod.base_quantity * std::exp(config.quantity_sigma * rng.normal())));
        st.wholesale_qty[idx] =
            std::max(0.0, std::round(st.quantity[idx] *
                                     (1.0 + config.wholesale_quantity_jitter * (rng.uniform() - 0.5))));
        st.log_noise[idx] = config.product_noise_sigma * rng.normal();
      }
    }
  });

  // rival-cost terms for the wholesale DGP (only when a response is configured)
  std::vector<std::vector<double>> rival_cost_dev(n_stores);
  if (config.wholesale_rival_response != 0.0) {
    std::vector<std::vector<int>> bin1(n_stores);
    for (int a = 0; a < n_stores; ++a)
      for (int b = 0; b < n_stores; ++b) {
        if (a == b) continue;
        double d = spatial::geodesic_distance(stores[a].lat, stores[a].lon, stores[b].lat,
                                              stores[b].lon);
        if (d < config.rival_cost_bin_miles) bin1[a].push_back(b);
      }
    std::vector<std::vector<int>> slot(n_stores, std::vector<int>(n_catalog, -1));
    for (int s = 0; s < n_stores; ++s)
      for (std::size_t p = 0; p < stores[s].stocked.size(); ++p)
        slot[s][stores[s].stocked[p]] = static_cast<int>(p);
    for (int s = 0; s < n_stores; ++s) {
      auto& st = stores[s];
      rival_cost_dev[s].assign(st.stocked.size() * static_cast<std::size_t>(n_months), 0.0);
      for (std::size_t p = 0; p < st.stocked.size(); ++p) {
        int prod_id = st.stocked[p];
        double base = catalog[prod_id].base_wholesale;
        for (int m = 0; m < n_months; ++m) {
          double sum = 0;
          int count = 0;
          for (int r : bin1[s]) {
            int rp = slot[r][prod_id];
            if (rp < 0) continue;
            auto ridx = static_cast<std::size_t>(rp) * n_months + m;
            if (!stores[r].present[ridx]) continue;
            sum += stores[r].wholesale[ridx] - base;
            ++count;
          }
          if (count > 0)
            rival_cost_dev[s][p * static_cast<std::size_t>(n_months) + m] = sum / count;
        }
      }
    }
  }

  // phase 2: assemble output tables in store order
  auto& data = out.data;
  data.sample_start = m0;
  data.sample_end = m0 + n_months - 1;
  for (int s = 0; s < n_stores; ++s) {
    char sid[16], fid[16];
    std::snprintf(sid, sizeof(sid), "S%04d", s);
    std::snprintf(fid, sizeof(fid), "F%04d", stores[s].firm);
    data.stores.add(sid, stores[s].lat, stores[s].lon, fid, stores[s].urban ? 1 : 0);
  }
  data.stores.has_urban = true;

  std::vector<int> product_ids(n_catalog);
  for (int i = 0; i < n_catalog; ++i) {
    const auto& p = catalog[i];
    char producer[24], name[24];
    std::snprintf(producer, sizeof(producer), "P%03d", p.producer);
    std::snprintf(name, sizeof(name), "prod-%04d", i);
    product_ids[i] =
        data.products.intern(producer, kCategoryNames[p.category], name, p.unit_weight);
  }

  std::vector<std::vector<TransactionRecord>> per_store(n_stores);
  parallel_for(static_cast<std::size_t>(n_stores), threads, [&](std::size_t si) {
    auto s = static_cast<int>(si);
    const auto& st = stores[s];
    auto& rows = per_store[s];
    for (std::size_t p = 0; p < st.stocked.size(); ++p) {
      int prod_id = st.stocked[p];
      const auto& prod = catalog[prod_id];
      for (int m = 0; m < n_months; ++m) {
        auto idx = p * static_cast<std::size_t>(n_months) + m;
        if (!st.present[idx]) continue;
        int month = m0 + m;
        double effect = 0.0;
        if (first_own[s] != INT_MAX)
          effect = cumulative_at(config.victim_effect, month - first_own[s]);
        else if (first_nearby[s] != INT_MAX)
          effect = cumulative_at(config.rival_effect, month - first_nearby[s]);
        double seasonal =
            config.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * (month % 12) / 12.0);
        double log_shift = effect + seasonal + st.store_noise[m] + st.log_noise[idx];
        double cost_term = config.wholesale_own_passthrough *
                           (st.wholesale[idx] - prod.base_wholesale);
        if (!rival_cost_dev[s].empty())
          cost_term += config.wholesale_rival_response * rival_cost_dev[s][idx];
        double price =
            std::max(0.01, (prod.base_price * st.markup + cost_term) * std::exp(log_shift));

        TransactionRecord rec;
        rec.store = s;
        rec.product = product_ids[prod_id];
        rec.month = month;
        rec.retail_quantity = st.quantity[idx];
        rec.retail_revenue = price * rec.retail_quantity;
        rec.wholesale_quantity = st.wholesale_qty[idx];
        rec.wholesale_expenditure = st.wholesale[idx] * rec.wholesale_quantity;
        rows.push_back(rec);
      }
    }
  });
  for (auto& rows : per_store)
    data.transactions.insert(data.transactions.end(), rows.begin(), rows.end());
  data.crimes = std::move(crimes);

  int horizon = std::max<std::size_t>({config.victim_effect.size(), config.rival_effect.size(),
                                       std::size_t{7}}) -
                1;
  out.truth.victim_cum = oracle_path(config.victim_effect, horizon);
  out.truth.rival_cum = oracle_path(config.rival_effect, horizon);
  return out;
}

} // namespace crimepass::simulator
