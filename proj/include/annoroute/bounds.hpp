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

#ifndef ANNOROUTE_BOUNDS_HPP_
#define ANNOROUTE_BOUNDS_HPP_

#include <span>

#include "annoroute/types.hpp"

namespace annoroute {

// Inputs shared by every upper confidence bound on the true risk. The weighted
// losses lie in [0, loss_bound / query_prob].
struct UcbInput {
  std::span<const double> weighted_losses;
  double alpha = 0.05;
  double loss_bound = 1.0;
  double query_prob = 1.0;
};

// Inverse standard normal CDF.
double normal_quantile(double q);

// Asymptotic: mean + z_{1-alpha} * sd / sqrt(m). Needs m >= 2.
double ucb_clt(const UcbInput& input);

// mean + B / (p sqrt(2m)) * sqrt(log(1/alpha)).
double ucb_hoeffding(const UcbInput& input);

// mean + sqrt(2 V log(2/alpha) / m) + 7 B log(2/alpha) / (3 (m-1) p).
double ucb_bernstein(const UcbInput& input);

// Betting confidence set for the mean of X_i = p W_i / B in [0, 1], evaluated
// on a uniform grid of candidate means and mapped back to the risk scale. The
// result depends on the order of the weighted losses.
double ucb_betting(const UcbInput& input, const BettingOptions& options = {});

double compute_ucb(UcbKind kind, const UcbInput& input,
                   const BettingOptions& betting = {});

}  // namespace annoroute

#endif  // ANNOROUTE_BOUNDS_HPP_
