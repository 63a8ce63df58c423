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

#include "annoroute/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "annoroute/estimation.hpp"

namespace annoroute {
namespace {

void check_input(const UcbInput& input, std::size_t min_size) {
  if (input.weighted_losses.size() < min_size) {
    throw Error("sample_size", "UCB needs at least " +
                                   std::to_string(min_size) +
                                   " weighted losses");
  }
  if (!(input.alpha > 0.0 && input.alpha < 1.0)) {
    throw Error("config", "alpha must lie in (0, 1)");
  }
  if (!(input.loss_bound > 0.0)) {
    throw Error("config", "loss bound must be positive");
  }
  if (!(input.query_prob > 0.0 && input.query_prob <= 1.0)) {
    throw Error("config", "query probability must lie in (0, 1]");
  }
}

// Rational approximation (P. J. Acklam) followed by one Halley step against
// erfc, which brings the error to near machine precision.
double acklam_quantile(double q) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double kLow = 0.02425;

  if (q < kLow) {
    const double r = std::sqrt(-2.0 * std::log(q));
    return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r +
            c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  if (q > 1.0 - kLow) {
    const double r = std::sqrt(-2.0 * std::log1p(-q));
    return -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r +
             c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  const double x = q - 0.5;
  const double r = x * x;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         x /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error("quantile", "normal quantile needs q in (0, 1)");
  }
  double x = acklam_quantile(q);
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - q;
  const double u =
      e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double ucb_clt(const UcbInput& input) {
  check_input(input, 2);
  const auto& w = input.weighted_losses;
  const double mean = mean_of(w);
  const double sd = std::sqrt(sample_variance(w));
  if (sd == 0.0) return mean;
  const double m = static_cast<double>(w.size());
  return mean + normal_quantile(1.0 - input.alpha) * sd / std::sqrt(m);
}

double ucb_hoeffding(const UcbInput& input) {
  check_input(input, 1);
  const auto& w = input.weighted_losses;
  const double m = static_cast<double>(w.size());
  const double margin = input.loss_bound /
                        (input.query_prob * std::sqrt(2.0 * m)) *
                        std::sqrt(std::log(1.0 / input.alpha));
  return mean_of(w) + margin;
}

double ucb_bernstein(const UcbInput& input) {
  check_input(input, 2);
  const auto& w = input.weighted_losses;
  const double m = static_cast<double>(w.size());
  const double log_term = std::log(2.0 / input.alpha);
  const double variance = sample_variance(w);
  return mean_of(w) + std::sqrt(2.0 * variance * log_term / m) +
         7.0 * input.loss_bound * log_term /
             (3.0 * (m - 1.0) * input.query_prob);
}

double ucb_betting(const UcbInput& input, const BettingOptions& options) {
  check_input(input, 1);
  if (options.grid_points < 2) {
    throw Error("config", "betting grid needs at least 2 candidate means");
  }
  const auto& w = input.weighted_losses;
  const std::size_t m = w.size();
  const double to_unit = input.query_prob / input.loss_bound;

  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::clamp(w[i] * to_unit, 0.0, 1.0);
  }

  // lambda_t only depends on X_1..X_{t-1}; sigma^2_0 = 0.25 from the prior.
  const double log_term = std::log(2.0 / input.alpha);
  std::vector<double> lambda(m);
  double sigma2_prev = 0.25;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t t = 1; t <= m; ++t) {
    const double n = options.lambda == BettingLambda::kTotalSamples
                         ? static_cast<double>(m)
                         : static_cast<double>(t);
    lambda[t - 1] = std::sqrt(2.0 * log_term / (n * sigma2_prev));
    const double xt = x[t - 1];
    sum += xt;
    sum_sq += xt * xt;
    const double td = static_cast<double>(t);
    const double mu = (0.5 + sum) / (td + 1.0);
    const double spread = std::max(0.0, sum_sq - 2.0 * mu * sum + td * mu * mu);
    sigma2_prev = (0.25 + spread) / (td + 1.0);
  }

  const double reject_level = 1.0 / input.alpha;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto survives = [&](double candidate) {
    const double cap_up = candidate > 0.0 ? 0.5 / candidate : kInf;
    const double cap_down = candidate < 1.0 ? 0.5 / (1.0 - candidate) : kInf;
    double wealth_up = 1.0;
    double wealth_down = 1.0;
    for (std::size_t t = 0; t < m; ++t) {
      const double diff = x[t] - candidate;
      wealth_up *= 1.0 + std::min(lambda[t], cap_up) * diff;
      wealth_down *= 1.0 - std::min(lambda[t], cap_down) * diff;
      if (0.5 * std::max(wealth_up, wealth_down) >= reject_level) return false;
    }
    return true;
  };

  // The supremum of the surviving set is the first survivor scanning down.
  const std::size_t last = options.grid_points - 1;
  const double step = 1.0 / static_cast<double>(last);
  const double mean = mean_of(w);
  for (std::size_t idx = last + 1; idx-- > 0;) {
    const double candidate = idx == last ? 1.0 : static_cast<double>(idx) * step;
    if (survives(candidate)) {
      const double upper = std::min(1.0, candidate + step);
      return std::max(mean, upper / to_unit);
    }
  }
  return std::max(mean, input.loss_bound);
}

double compute_ucb(UcbKind kind, const UcbInput& input,
                   const BettingOptions& betting) {
  switch (kind) {
    case UcbKind::kClt:
      return ucb_clt(input);
    case UcbKind::kHoeffding:
      return ucb_hoeffding(input);
    case UcbKind::kBernstein:
      return ucb_bernstein(input);
    case UcbKind::kBetting:
      return ucb_betting(input, betting);
  }
  throw Error("ucb", "unknown UCB kind");
}

}  // namespace annoroute
