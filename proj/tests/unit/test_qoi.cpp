#include <cmath>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ifl/qoi.hpp"

using namespace ifl;

namespace {

Dataset coded(std::size_t n, std::uint8_t code) {
  std::vector<std::vector<double>> x(n, std::vector<double>{1.0});
  auto ds = fx::dataset(x, std::vector<double>(n, 0.0), true);
  for (auto& s : ds.samples) s.qualityCodes = {code};
  return ds;
}

}  // namespace

TEST(CodeCategory, BitMapping) {
  EXPECT_EQ(code_category(0xC0), QualityCategory::Good);
  EXPECT_EQ(code_category(0x40), QualityCategory::Uncertain);
  EXPECT_EQ(code_category(0x00), QualityCategory::Bad);
  EXPECT_EQ(code_category(0x80), QualityCategory::Bad);
  EXPECT_EQ(code_category(0xFF), QualityCategory::Good);
  EXPECT_EQ(code_category(0x7F), QualityCategory::Uncertain);
}

TEST(QoiScore, AllGoodFullAmount) {
  const auto r = qoi_score(coded(100, kQualityGood), 1, 100);
  EXPECT_DOUBLE_EQ(r.score, 1.0);
  EXPECT_EQ(r.sampleCount, 100u);
}

TEST(QoiScore, AllBadIsZero) { EXPECT_EQ(qoi_score(coded(100, kQualityBad), 1, 100).score, 0.0); }

TEST(QoiScore, HalfGoodHalfAmount) {
  auto ds = coded(50, kQualityGood);
  for (std::size_t i = 0; i < 25; ++i) ds.samples[i].qualityCodes = {kQualityBad};
  const auto r = qoi_score(ds, 1, 100);
  EXPECT_NEAR(r.freeOfError, 0.5, 1e-15);
  EXPECT_NEAR(r.appropriateAmount, 0.5, 1e-15);
  EXPECT_NEAR(r.consistentRepresentation, 1.0, 1e-15);
  EXPECT_NEAR(r.score, 0.6300, 1e-4);
}

TEST(QoiScore, UncertainCountsHalf) {
  const auto r = qoi_score(coded(100, kQualityUncertain), 1, 100);
  EXPECT_DOUBLE_EQ(r.freeOfError, 0.5);
}

TEST(QoiScore, NonFiniteValuesLowerConsistency) {
  auto ds = coded(4, kQualityGood);
  ds.samples[0].values[0] = std::numeric_limits<double>::quiet_NaN();
  const auto r = qoi_score(ds, 1, 4);
  EXPECT_DOUBLE_EQ(r.consistentRepresentation, 0.75);
}

TEST(QoiScore, MonotoneInCodeFlips) {
  rng::Engine e(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng::uniform_int(e, 40);
    auto ds = coded(n, kQualityGood);
    for (auto& s : ds.samples) {
      const double u = rng::uniform01(e);
      s.qualityCodes = {u < 0.3 ? kQualityBad : u < 0.6 ? kQualityUncertain : kQualityGood};
    }
    const double before = qoi_score(ds, 1, 30).score;
    for (auto& s : ds.samples)
      if (s.qualityCodes[0] == kQualityBad) {
        s.qualityCodes[0] = kQualityGood;
        break;
      }
    EXPECT_GE(qoi_score(ds, 1, 30).score, before);
  }
}

TEST(ContributionWeights, Examples) {
  std::vector<ContributionEntry> one{{10, 1.0}};
  EXPECT_EQ(contribution_weights(one), std::vector<double>{1.0});

  std::vector<ContributionEntry> two{{10, 1.0}, {30, 0.5}};
  const auto w = contribution_weights(two);
  EXPECT_NEAR(w[0], 0.4, 1e-15);
  EXPECT_NEAR(w[1], 0.6, 1e-15);

  std::vector<ContributionEntry> zero{{10, 0.0}, {10, 1.0}};
  EXPECT_EQ(contribution_weights(zero), (std::vector<double>{0.0, 1.0}));
}

TEST(ContributionWeights, AllZeroMass) {
  std::vector<ContributionEntry> e{{10, 0.0}, {0, 1.0}};
  EXPECT_IFL_ERROR(contribution_weights(e), ErrorCode::AllZeroMass);
  EXPECT_IFL_ERROR(contribution_weights({}), ErrorCode::ValidationFailed);
}

TEST(ContributionWeights, ProbabilityVectorAndScaleInvariance) {
  rng::Engine e(9);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + rng::uniform_int(e, 9);
    std::vector<ContributionEntry> entries(k);
    double qmax = 0;
    for (auto& c : entries) {
      c.sampleCount = 1 + rng::uniform_int(e, 1000);
      c.qoiScore = rng::uniform(e, 0.01, 1.0);
      qmax = std::max(qmax, c.qoiScore);
    }
    const auto w = contribution_weights(entries);
    for (double x : w) EXPECT_GE(x, 0.0);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);

    const double s = rng::uniform(e, 0.01, 1.0 / qmax);
    auto scaled = entries;
    for (auto& c : scaled) c.qoiScore *= s;
    const auto ws = contribution_weights(scaled);
    for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(ws[i], w[i], 1e-12);
  }
}
