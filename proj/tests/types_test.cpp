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

#include "annoroute/types.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace annoroute {
namespace {

using testing::make_record;

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

TEST(ValidateRecord, AcceptsZeroLosses) {
  const auto ladder = SourceLadder::with_size(3);
  const auto r = make_record("a", 0.5, {0, 0, 0}, {1, 2, 8});
  EXPECT_EQ(validate_record(r, ladder, 1.0), r);
}

TEST(ValidateRecord, RejectsCostOrder) {
  const auto ladder = SourceLadder::with_size(3);
  EXPECT_EQ(error_code([&] {
              validate_record(make_record("a", 0.5, {0, 0, 0}, {2, 1, 8}),
                              ladder, 1.0);
            }),
            "cost_order");
}

TEST(ValidateRecord, RejectsGroundTruthLoss) {
  const auto ladder = SourceLadder::with_size(3);
  EXPECT_EQ(error_code([&] {
              validate_record(make_record("a", 0.5, {0.3, 0.1, 0.2}, {1, 2, 8}),
                              ladder, 1.0);
            }),
            "ground_truth_loss");
}

TEST(ValidateRecord, OtherErrors) {
  const auto ladder = SourceLadder::with_size(3);
  auto code = [&](AnnotationRecord r) {
    return error_code([&] { validate_record(r, ladder, 1.0); });
  };
  EXPECT_EQ(code(make_record("a", 0.5, {0, 0}, {1, 8})), "dimension_mismatch");
  EXPECT_EQ(code(make_record("a", 1.5, {0, 0, 0}, {1, 2, 8})), "score_range");
  EXPECT_EQ(code(make_record("a", -0.1, {0, 0, 0}, {1, 2, 8})), "score_range");
  EXPECT_EQ(code(make_record("a", 0.5, {1.5, 0, 0}, {1, 2, 8})), "loss_bound");
  EXPECT_EQ(code(make_record("a", 0.5, {-1, 0, 0}, {1, 2, 8})), "loss_range");
  EXPECT_EQ(code(make_record("a", 0.5, {0, 0, 0}, {0, 2, 8})), "cost_range");
  auto r = make_record("a", 0.5, {0, 0, 0}, {1, 2, 8});
  r.query_prob = 0.0;
  EXPECT_EQ(code(r), "query_prob");
  r.query_prob.reset();
  r.query_mask = true;
  EXPECT_EQ(code(r), "query_prob");
}

TEST(ValidateRecord, LossBoundAboveOne) {
  const auto ladder = SourceLadder::with_size(2);
  EXPECT_NO_THROW(
      validate_record(make_record("a", 0.5, {2.5, 0}, {1, 8}), ladder, 3.0));
}

TEST(SourceLadder, Shape) {
  const auto ladder = SourceLadder::with_size(4);
  EXPECT_EQ(ladder.size(), 4u);
  EXPECT_EQ(ladder[0].name, "source_0");
  EXPECT_EQ(ladder[3].name, "human");
  EXPECT_TRUE(ladder[3].is_ground_truth);
  EXPECT_THROW(SourceLadder({{"h", true}}), Error);
  EXPECT_THROW(SourceLadder({{"a", true}, {"h", true}}), Error);
  EXPECT_THROW(SourceLadder({{"a", false}, {"h", false}}), Error);
}

TEST(ThresholdVector, RejectsUnsortedInsteadOfSorting) {
  EXPECT_THROW(ThresholdVector({0.7, 0.3}), Error);
  EXPECT_THROW(ThresholdVector({}), Error);
  EXPECT_THROW(ThresholdVector({0.2, 1.1}), Error);
  const ThresholdVector u({0.3, 0.3});
  EXPECT_EQ(u.num_sources(), 3u);
  EXPECT_EQ(ThresholdVector::zeros(2), ThresholdVector({0.0, 0.0}));
  EXPECT_EQ(ThresholdVector::ones(1), ThresholdVector({1.0}));
}

TEST(GridSpec, ParsesAndPrints) {
  EXPECT_EQ(parse_grid_spec("uniform:0.05"), GridSpec::uniform(0.05));
  EXPECT_EQ(parse_grid_spec("from-scores"), GridSpec::from_scores());
  EXPECT_EQ(parse_grid_spec("values:0.1,0.5"),
            GridSpec::explicit_values({0.1, 0.5}));
  for (const auto& spec : {GridSpec::uniform(0.05), GridSpec::from_scores(),
                           GridSpec::explicit_values({0.125, 0.5})}) {
    EXPECT_EQ(parse_grid_spec(to_string(spec)), spec);
  }
  EXPECT_THROW(parse_grid_spec("uniform:x"), Error);
  EXPECT_THROW(parse_grid_spec("linear:0.1"), Error);
}

TEST(UcbKind, RoundTrip) {
  for (auto kind : {UcbKind::kClt, UcbKind::kHoeffding, UcbKind::kBernstein,
                    UcbKind::kBetting}) {
    EXPECT_EQ(parse_ucb_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_ucb_kind("student"), Error);
}

TEST(CalibrationConfig, Validate) {
  CalibrationConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.query_prob, 0.9);
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.query_prob = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.epsilon = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c.loss_bound = 2.0;
  EXPECT_NO_THROW(c.validate());
}

}  // namespace
}  // namespace annoroute
