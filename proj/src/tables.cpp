#include "crimepass/tables.hpp"

#include <cmath>

namespace crimepass {

int StoreTable::add(std::string store_id, double lat, double lon, std::string firm,
                    std::uint8_t urb) {
  int idx = size();
  index_of.emplace(store_id, idx);
  id.push_back(std::move(store_id));
  latitude.push_back(lat);
  longitude.push_back(lon);
  firm_id.push_back(std::move(firm));
  urban.push_back(urb);
  return idx;
}

int StoreTable::lookup(const std::string& store_id) const {
  auto it = index_of.find(store_id);
  return it == index_of.end() ? -1 : it->second;
}

std::vector<int> StoreTable::firm_sizes() const {
  std::unordered_map<std::string, int> counts;
  for (const auto& f : firm_id) ++counts[f];
  std::vector<int> out(id.size());
  for (std::size_t i = 0; i < id.size(); ++i) out[i] = counts[firm_id[i]];
  return out;
}

int ProductCatalog::intern(const std::string& prod, const std::string& cat,
                           const std::string& nam, double weight) {
  std::string key = prod;
  key.push_back('\x1f');
  key += cat;
  key.push_back('\x1f');
  key += nam;
  key.push_back('\x1f');
  key += std::isnan(weight) ? std::string() : format_double(weight);
  auto it = index_of.find(key);
  if (it != index_of.end()) return it->second;

  std::string subcat_key = cat;
  subcat_key.push_back('\x1f');
  subcat_key += std::isnan(weight) ? std::string() : format_double(weight);
  auto [sit, inserted] = subcat_of.emplace(subcat_key, subcategory_count());
  int subcat = sit->second;

  int idx = size();
  index_of.emplace(std::move(key), idx);
  producer.push_back(prod);
  category.push_back(cat);
  name.push_back(nam);
  unit_weight.push_back(weight);
  subcategory.push_back(subcat);
  if (inserted) {
    std::string label = cat;
    if (!std::isnan(weight)) {
      label += ':';
      label += format_double(weight);
    }
    subcategory_label.push_back(std::move(label));
  }
  return idx;
}

SeriesTable SeriesTable::empty(int n_stores, int month_min, int month_max) {
  SeriesTable t;
  t.month_min = month_min;
  t.month_max = month_max;
  t.n_stores = n_stores;
  t.values.assign(static_cast<std::size_t>(n_stores) * t.months(), kNaN);
  return t;
}

} // namespace crimepass
