// Test-only oracles, kept independent of the implementation paths they check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "crimepass/stacking.hpp"
#include "crimepass/tables.hpp"

namespace testhelp {

// Haversine written from the spherical law of sines half-angle form, with
// its own radius constant; deliberately separate from spatial::.
inline double haversine_oracle(double lat1, double lon1, double lat2, double lon2) {
  const double radius = 3958.7613;
  const double rad = M_PI / 180.0;
  double p1 = lat1 * rad, p2 = lat2 * rad;
  double dp = (lat2 - lat1) * rad, dl = (lon2 - lon1) * rad;
  double a = std::sin(dp / 2) * std::sin(dp / 2) +
             std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2 * radius * std::atan2(std::sqrt(a), std::sqrt(1 - a));
}

// Full-dummy OLS: lag indicators plus one dummy per (sub, month) cell,
// solved directly. Returns the lag coefficient block.
Eigen::VectorXd full_dummy_ols(const crimepass::stacking::StackedPanel& panel);

// Brute-force clean-control validator, reimplementing the inclusion criteria
// with plain loops over the crime table.
std::vector<int> brute_force_controls(int victim, int event_month,
                                      const crimepass::StoreTable& stores,
                                      const std::vector<crimepass::CrimeIncident>& crimes,
                                      const crimepass::stacking::StackingConfig& config);

// Minimal scratch-dir helper for file-based tests.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("crimepass_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Two-sample Kolmogorov-Smirnov test at the 5% level (asymptotic critical
// value); true = reject equality.
bool ks_reject_5pct(std::vector<double> a, std::vector<double> b);

} // namespace testhelp
