#pragma once

// Shared reduction of per-run observable samples into ensemble means and
// standard errors. Fluctuation outputs are assembled from the first and
// second density moments, each evaluated per run and averaged; the standard
// error uses the delta method for g(X, Y) = Y - X^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rydeff/record.hpp"

namespace rydeff::detail {

struct EnsembleOutput {
  std::string name;
  bool is_fluct = false;
  std::size_t idx_a = 0;  // linear outputs: the evaluated column
  std::size_t idx_b = 0;  // fluctuations: idx_a = <n>, idx_b = <n^2>
};

// per_run[run][eval][sample]; fills mean and stderr columns on `out`.
inline void reduce_ensemble(const std::vector<EnsembleOutput>& outputs,
                            const std::vector<std::vector<std::vector<double>>>& per_run,
                            std::size_t n_samples, TrajectoryRecord& out) {
  const int n_runs = static_cast<int>(per_run.size());
  for (const auto& spec : outputs) {
    auto& mean = out.observables[spec.name];
    auto& serr = out.std_errors[spec.name];
    mean.assign(n_samples, 0.0);
    serr.assign(n_samples, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
      if (!spec.is_fluct) {
        double m = 0, m2 = 0;
        for (int i = 0; i < n_runs; ++i) {
          const double x = per_run[i][spec.idx_a][s];
          m += x;
          m2 += x * x;
        }
        m /= n_runs;
        const double var = std::max(0.0, (m2 - n_runs * m * m) / (n_runs - 1.0));
        mean[s] = m;
        serr[s] = std::sqrt(var / n_runs);
      } else {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < n_runs; ++i) {
          const double x = per_run[i][spec.idx_a][s];
          const double y = per_run[i][spec.idx_b][s];
          sx += x;
          sy += y;
          sxx += x * x;
          syy += y * y;
          sxy += x * y;
        }
        const double mx = sx / n_runs, my = sy / n_runs;
        const double vxx = std::max(0.0, (sxx - n_runs * mx * mx) / (n_runs - 1.0));
        const double vyy = std::max(0.0, (syy - n_runs * my * my) / (n_runs - 1.0));
        const double vxy = (sxy - n_runs * mx * my) / (n_runs - 1.0);
        mean[s] = my - mx * mx;
        const double var = std::max(0.0, vyy - 4 * mx * vxy + 4 * mx * mx * vxx);
        serr[s] = std::sqrt(var / n_runs);
      }
    }
  }
}

}  // namespace rydeff::detail
