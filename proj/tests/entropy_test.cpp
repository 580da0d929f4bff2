#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "easb/entropy.hpp"
#include "oracle.hpp"

namespace easb {
namespace {

CategoricalDistribution probs(std::vector<double> p) {
  auto labels = CategoricalDistribution::default_labels(p.size());
  return CategoricalDistribution::from_probs(std::move(labels), std::move(p));
}

CategoricalDistribution counts(std::vector<std::int64_t> c) {
  auto labels = CategoricalDistribution::default_labels(c.size());
  return CategoricalDistribution::from_counts(std::move(labels), std::move(c));
}

TEST(NormalizedEntropy, UniformBinaryIsOne) { EXPECT_DOUBLE_EQ(normalized_entropy(probs({0.5, 0.5})), 1.0); }

TEST(NormalizedEntropy, DegenerateCountsAreZero) { EXPECT_EQ(normalized_entropy(counts({42, 0})), 0.0); }

TEST(NormalizedEntropy, NinetyTenMatchesHighPrecisionValue) {
  // -0.9 log2 0.9 - 0.1 log2 0.1 = 0.46899559358928122...
  EXPECT_NEAR(normalized_entropy(probs({0.9, 0.1})), 0.468996, 1e-6);
  EXPECT_NEAR(normalized_entropy(probs({0.9, 0.1})), static_cast<double>(oracle::entropy_of_probs({0.9L, 0.1L})),
              1e-12);
}

TEST(NormalizedEntropy, SingleClassIsZero) { EXPECT_EQ(normalized_entropy(counts({7})), 0.0); }

TEST(NormalizedEntropy, RejectsInvalidDistributions) {
  EXPECT_THROW(counts({3, -1}), ValidationError);
  EXPECT_THROW(counts({0, 0}), ValidationError);
  EXPECT_THROW(probs({0.5, 0.6}), ValidationError);
  EXPECT_THROW(probs({-0.1, 1.1}), ValidationError);
  EXPECT_THROW(CategoricalDistribution::from_counts({"a"}, {1, 2}), ValidationError);
  EXPECT_THROW(CategoricalDistribution::from_probs({}, {}), ValidationError);
}

TEST(NormalizedEntropy, MatchesOracleAndIsPermutationInvariant) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> kdist(2, 12);
  std::uniform_int_distribution<std::int64_t> cdist(0, 500);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(kdist(gen)));
    for (auto& x : c) x = cdist(gen);
    c[0] += 1;
    const double h = normalized_entropy(counts(c));
    EXPECT_NEAR(h, static_cast<double>(oracle::entropy_of_counts(c)), 1e-12);
    std::shuffle(c.begin(), c.end(), gen);
    EXPECT_EQ(normalized_entropy(counts(c)), h);
  }
}

TEST(NormalizedEntropy, CountsAndProbsAgree) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<std::int64_t> cdist(1, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> c(5);
    std::int64_t n = 0;
    for (auto& x : c) n += (x = cdist(gen));
    std::vector<double> p;
    for (auto x : c) p.push_back(static_cast<double>(x) / static_cast<double>(n));
    EXPECT_NEAR(normalized_entropy(counts(c)), normalized_entropy(probs(p)), 1e-12);
    // scaling every count leaves the entropy unchanged
    auto scaled = c;
    for (auto& x : scaled) x *= 3;
    EXPECT_NEAR(normalized_entropy(counts(scaled)), normalized_entropy(counts(c)), 1e-12);
  }
}

TEST(NormalizedEntropy, ExtremesAtUniformAndOneHot) {
  for (std::size_t k = 2; k <= 16; ++k) {
    EXPECT_NEAR(normalized_entropy(counts(std::vector<std::int64_t>(k, 5))), 1.0, 1e-12);
    std::vector<std::int64_t> hot(k, 0);
    hot[k / 2] = 9;
    EXPECT_EQ(normalized_entropy(counts(hot)), 0.0);
    std::vector<std::int64_t> near(k, 5);
    near[0] = 6;
    EXPECT_LT(normalized_entropy(counts(near)), 1.0);
  }
}

TEST(SiteWeight, ProductOfScenarioOneEntropies) {
  EXPECT_NEAR(site_weight(SiteProfile::from_entropies("H0", 0.3852, 0.9036)).hw, 0.348067, 1e-6);
  EXPECT_EQ(site_weight(SiteProfile::from_entropies("B", 1.0, 1.0)).hw, 1.0);
  EXPECT_EQ(site_weight(SiteProfile::from_entropies("H3", 0.6520, 0.0)).hw, 0.0);
}

TEST(SiteWeight, FromDistributions) {
  auto s = SiteProfile::from_distributions("s", counts({50, 50}), counts({10, 10, 10}));
  const auto w = site_weight(s);
  EXPECT_EQ(w.site_id, "s");
  EXPECT_NEAR(w.hw, 1.0, 1e-12);
}

TEST(SiteWeight, SwappingEntropiesKeepsWeight) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double g = u(gen), a = u(gen);
    EXPECT_EQ(site_weight(SiteProfile::from_entropies("s", g, a)).hw,
              site_weight(SiteProfile::from_entropies("s", a, g)).hw);
  }
}

TEST(SiteWeight, MissingOrConflictingAttributeIsRejected) {
  SiteProfile s;
  s.id = "x";
  s.gender_entropy = 0.5;
  EXPECT_THROW(site_weight(s), ValidationError);
  EXPECT_THROW(validate(s), ValidationError);
  s.age_entropy = 1.5;
  EXPECT_THROW(validate(s), ValidationError);
  s.age_entropy = 0.5;
  s.age = counts({1, 1});
  EXPECT_THROW(validate(s), ValidationError);
}

TEST(PairBalance, Examples) {
  EXPECT_NEAR(pair_balance(0.4, 0.6), 0.5, 1e-15);
  // Stated inputs; 0.5*(0.348067+0.211504) = 0.2797855
  EXPECT_NEAR(pair_balance(0.348067, 0.211504), 0.279786, 1e-6);
  EXPECT_NEAR(pair_balance(0.0, 0.0), kDefaultEps, 1e-15);
  EXPECT_NEAR(pair_balance(1.0, 1.0), 1.0 - kDefaultEps, 1e-15);
  EXPECT_NEAR(pair_balance(0.0, 0.0, 1e-3), 1e-3, 1e-15);
}

TEST(PairBalance, RejectsOutOfRange) {
  EXPECT_THROW(pair_balance(-0.1, 0.5), ValidationError);
  EXPECT_THROW(pair_balance(0.5, 1.1), ValidationError);
  EXPECT_THROW(pair_balance(0.5, 0.5, 0.0), ValidationError);
  EXPECT_THROW(pair_balance(0.5, 0.5, 0.5), ValidationError);
}

TEST(PairBalance, LogitSigmoidChainIsIdentity) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const double a = u(gen), b = u(gen);
    EXPECT_NEAR(pair_balance(a, b), static_cast<double>(oracle::pair_weight(a, b)), 1e-12);
  }
}

}  // namespace
}  // namespace easb
