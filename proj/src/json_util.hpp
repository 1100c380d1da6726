#pragma once

// JSON helpers shared by the config and artifact writers.

#include <cmath>
#include <string>

#include "json.hpp"

namespace cascade::jsonutil {

using nlohmann::json;

/// Finite numbers verbatim; infinities as the strings "inf" / "-inf".
inline json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double to_double(const json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
  }
  return j.get<double>();
}

template <class Range>
json numbers(const Range& r) {
  json a = json::array();
  for (double x : r) a.push_back(number(x));
  return a;
}

}  // namespace cascade::jsonutil
