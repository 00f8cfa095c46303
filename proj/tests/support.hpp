#pragma once

#include <cmath>
#include <vector>

namespace support {

struct Sample {
  double mean = 0, se = 0;
};

inline Sample summarize(const std::vector<double>& x) {
  Sample s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(x.size());
  double q = 0;
  for (double v : x) q += (v - s.mean) * (v - s.mean);
  s.se = std::sqrt(q / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return s;
}

// |a - b| in units of the combined standard error.
inline double z_score(const Sample& a, const Sample& b) {
  return std::abs(a.mean - b.mean) / std::sqrt(a.se * a.se + b.se * b.se);
}

}  // namespace support
