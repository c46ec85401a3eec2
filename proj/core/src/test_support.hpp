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

// Shared fixtures for the unit tests.

#ifndef FEDSLN_TEST_SUPPORT_HPP_
#define FEDSLN_TEST_SUPPORT_HPP_

#include <vector>

#include "fedsln/features.hpp"
#include "fedsln/rng.hpp"

namespace fedsln::testing {

// Random feature rows whose label depends on the first two features, with a
// client-specific shift so that clients disagree.
inline std::vector<PairExample> SyntheticExamples(std::uint64_t seed,
                                                  std::size_t n,
                                                  double shift = 0.0) {
  Rng rng(seed);
  std::vector<PairExample> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    r.u = static_cast<NodeId>(i);
    r.v = static_cast<NodeId>(i + n);
    for (double& x : r.features) x = rng.Uniform(0.0, 1.0);
    r.features[kPreferentialAttachment] *= 20.0;
    const double score = r.features[0] - r.features[1] + shift +
                         0.2 * (rng.Uniform() - 0.5);
    r.label = score > 0.0 ? 1 : 0;
  }
  return rows;
}

}  // namespace fedsln::testing

#endif  // FEDSLN_TEST_SUPPORT_HPP_
