#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rydeff {

struct TimeGrid {
  std::vector<double> sample_times;  // strictly increasing, first >= 0

  static TimeGrid linspace(double t_start, double t_end, int n_samples);
  void validate() const;
  double t_start() const { return sample_times.front(); }
  double t_end() const { return sample_times.back(); }
};

// One row per sample time; named observable columns, optional extras.
struct TrajectoryRecord {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> observables;
  std::map<std::string, std::vector<double>> std_errors;

  std::vector<Eigen::MatrixXcd> states;          // optional full states
  std::vector<Eigen::VectorXd> distributions;    // optional diagonal distributions
  std::vector<std::uint64_t> config_snapshots;   // optional classical configs (KMC)

  void to_csv(const std::string& path) const;
  static TrajectoryRecord from_csv(const std::string& path);
};

}  // namespace rydeff
