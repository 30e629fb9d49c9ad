#include "rydeff/record.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rydeff {

TimeGrid TimeGrid::linspace(double t_start, double t_end, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("TimeGrid: need at least 2 samples");
  TimeGrid g;
  g.sample_times.resize(n_samples);
  for (int i = 0; i < n_samples; ++i)
    g.sample_times[i] = t_start + (t_end - t_start) * i / (n_samples - 1);
  g.validate();
  return g;
}

void TimeGrid::validate() const {
  if (sample_times.empty()) throw std::invalid_argument("TimeGrid: empty");
  if (sample_times.front() < 0) throw std::invalid_argument("TimeGrid: t_start must be >= 0");
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (sample_times[i] <= sample_times[i - 1])
      throw std::invalid_argument("TimeGrid: sample times must be strictly increasing");
}

void TrajectoryRecord::to_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "t";
  for (const auto& [name, col] : observables) {
    out << "," << name;
    if (std_errors.count(name)) out << "," << name << "_stderr";
  }
  out << "\n";
  char buf[64];
  auto emit = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  for (std::size_t i = 0; i < times.size(); ++i) {
    emit(times[i]);
    for (const auto& [name, col] : observables) {
      out << ",";
      emit(col.at(i));
      auto it = std_errors.find(name);
      if (it != std_errors.end()) {
        out << ",";
        emit(it->second.at(i));
      }
    }
    out << "\n";
  }
}

TrajectoryRecord TrajectoryRecord::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  std::vector<std::string> headers;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) headers.push_back(tok);
  }
  if (headers.empty() || headers[0] != "t") throw std::runtime_error("CSV missing time column: " + path);
  TrajectoryRecord rec;
  for (std::size_t j = 1; j < headers.size(); ++j) rec.observables[headers[j]];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::size_t j = 0;
    while (std::getline(ss, tok, ',')) {
      const double x = std::stod(tok);
      if (j == 0)
        rec.times.push_back(x);
      else if (j < headers.size())
        rec.observables[headers[j]].push_back(x);
      ++j;
    }
  }
  // fold "<name>_stderr" columns into std_errors
  for (auto it = rec.observables.begin(); it != rec.observables.end();) {
    const std::string& name = it->first;
    if (name.size() > 7 && name.substr(name.size() - 7) == "_stderr") {
      rec.std_errors[name.substr(0, name.size() - 7)] = std::move(it->second);
      it = rec.observables.erase(it);
    } else {
      ++it;
    }
  }
  return rec;
}

}  // namespace rydeff
