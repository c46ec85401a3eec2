/*
 * Copyright 2026 The fedsln Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSLN_FORMAT_HPP_
#define FEDSLN_FORMAT_HPP_

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "fedsln/error.hpp"

namespace fedsln {

// Shortest round-trip decimal form, locale independent. NaN prints as "nan".
inline std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double ParseDouble(std::string_view s) {
  if (s == "nan") return std::nan("");
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("not a number: \"" + std::string(s) + "\"");
  }
  return x;
}

}  // namespace fedsln

#endif  // FEDSLN_FORMAT_HPP_
