// Copyright 2026 The annoroute Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ANNOROUTE_TESTS_TEST_SUPPORT_HPP_
#define ANNOROUTE_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "annoroute/calibration.hpp"
#include "annoroute/rng.hpp"
#include "annoroute/types.hpp"

namespace annoroute::testing {

inline AnnotationRecord make_record(std::string id, double score,
                                    std::vector<double> losses,
                                    std::vector<double> costs) {
  AnnotationRecord r;
  r.id = std::move(id);
  r.score = score;
  r.losses = std::move(losses);
  r.costs = std::move(costs);
  return r;
}

inline AnnotationRecord masked(AnnotationRecord r, bool z, double p) {
  r.query_mask = z;
  r.query_prob = p;
  return r;
}

// Random cost-ordered records. With `dominance`, losses are non-increasing
// along the ladder; otherwise they are arbitrary in [0, 1] (last one 0).
inline std::vector<AnnotationRecord> random_records(Rng& rng, std::size_t m,
                                                    std::size_t k,
                                                    bool dominance,
                                                    bool binary_losses = false) {
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 0; i < m; ++i) {
    AnnotationRecord r;
    r.id = "r" + std::to_string(i);
    // Coarse scores make grid ties likely.
    r.score = std::floor(uniform01(rng) * 21.0) / 20.0;
    r.score = std::min(r.score, 1.0);
    r.losses.resize(k, 0.0);
    for (std::size_t s = 0; s + 1 < k; ++s) {
      r.losses[s] = binary_losses ? (uniform01(rng) < 0.4 ? 1.0 : 0.0)
                                  : uniform01(rng);
    }
    if (dominance) {
      for (std::size_t s = k - 1; s-- > 0;) {
        r.losses[s] = std::max(r.losses[s], r.losses[s + 1]);
      }
    }
    double c = 0.1 + uniform01(rng);
    for (std::size_t s = 0; s < k; ++s) {
      r.costs.push_back(c);
      c += uniform01(rng) < 0.2 ? 0.0 : uniform01(rng);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// Surface with random UCB and cost columns over every cell of `grid`.
// Costs come from a small set so that ties are common.
inline Surface random_surface(Rng& rng, std::span<const double> grid,
                              std::size_t k) {
  Surface s;
  s.num_sources = k;
  for (const auto& cell : enumerate_cells(grid, k, 1u << 24)) {
    SurfaceRow row;
    row.thresholds.assign(cell.values().begin(), cell.values().end());
    row.risk_is = uniform01(rng) * 0.1;
    row.std_w = uniform01(rng);
    row.ucb = uniform01(rng) * 0.2;
    row.cost = std::floor(uniform01(rng) * 40.0) / 4.0;
    s.rows.push_back(std::move(row));
  }
  return s;
}

inline std::vector<double> uniform_grid(std::size_t points) {
  std::vector<double> g;
  for (std::size_t i = 0; i < points; ++i) {
    g.push_back(static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return g;
}

}  // namespace annoroute::testing

#endif  // ANNOROUTE_TESTS_TEST_SUPPORT_HPP_
