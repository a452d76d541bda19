#pragma once

#include <random>
#include <vector>

#include "thermoform/random.hpp"

namespace thermoform::testing {

using namespace thermoform::random;

inline double rel_diff(double a, double b) {
  const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) / scale;
}

}  // namespace thermoform::testing
