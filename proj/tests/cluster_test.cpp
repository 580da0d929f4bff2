#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "easb/cluster.hpp"
#include "easb/data_io.hpp"
#include "oracle.hpp"
#include "replay.hpp"

namespace easb {
namespace {

using Groups = std::set<std::set<std::string>>;

Groups groups(const Partition& p) {
  Groups g;
  for (const auto& c : p.clusters) g.insert(std::set<std::string>(c.members.begin(), c.members.end()));
  return g;
}

SiteProfile raw(std::string id, std::vector<std::int64_t> g, std::vector<std::int64_t> a) {
  auto labels = CategoricalDistribution::default_labels(a.size());
  return SiteProfile::from_distributions(std::move(id), CategoricalDistribution::from_counts({"M", "F"}, std::move(g)),
                                         CategoricalDistribution::from_counts(std::move(labels), std::move(a)));
}

TEST(PooledEntropy, Examples) {
  const std::vector<SiteProfile> even{raw("a", {50, 50}, {1, 1}), raw("b", {50, 50}, {1, 1})};
  EXPECT_NEAR(pooled_entropy(even, Attribute::gender), 1.0, 1e-12);
  const std::vector<SiteProfile> comp{raw("a", {100, 0}, {1, 1}), raw("b", {0, 100}, {1, 1})};
  EXPECT_EQ(pooled_entropy(comp, Attribute::gender), 1.0);
  const std::vector<SiteProfile> skew{raw("a", {90, 10}, {1, 1}), raw("b", {10, 90}, {1, 1})};
  EXPECT_NEAR(pooled_entropy(skew, Attribute::gender), 1.0, 1e-12);
  EXPECT_NEAR(pooled_entropy(std::span(skew).first(1), Attribute::gender), 0.468996, 1e-6);
}

TEST(PooledEntropy, MatchesBruteForceTally) {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<std::int64_t> cd(0, 40);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int64_t> a{cd(gen) + 1, cd(gen), cd(gen)}, b{cd(gen), cd(gen), cd(gen) + 1};
    const std::vector<SiteProfile> pair{raw("x", {1, 1}, a), raw("y", {1, 1}, b)};
    EXPECT_NEAR(pooled_entropy(pair, Attribute::age),
                static_cast<double>(oracle::pooled_entropy_bruteforce({a, b})), 1e-12);
  }
}

TEST(PooledEntropy, EntropyOnlyMembersAreUnsupported) {
  const std::vector<SiteProfile> sites{raw("a", {1, 1}, {1, 1}), SiteProfile::from_entropies("b", 0.5, 0.5)};
  EXPECT_THROW(pooled_entropy(sites, Attribute::gender), UnsupportedPoolingError);
}

TEST(PooledEntropy, MismatchedClassesAreRejected) {
  const std::vector<SiteProfile> sites{raw("a", {1, 1}, {1, 1}), raw("b", {1, 1}, {1, 1, 1})};
  EXPECT_THROW(pooled_entropy(sites, Attribute::age), ValidationError);
}

TEST(ClusterEasb, ScenarioOneGroupsAllButMostBalanced) {
  const auto p = cluster_easb(scenario1_profiles());
  EXPECT_EQ(groups(p), (Groups{{"H0", "H1", "H2", "H3"}, {"H4"}}));
  EXPECT_EQ(p.frozen, std::vector<std::string>{"H4"});
  ASSERT_EQ(p.merge_log.size(), 3u);
  EXPECT_EQ(p.merge_log[0].cluster_a, std::vector<std::string>{"H0"});
  EXPECT_EQ(p.merge_log[0].cluster_b, std::vector<std::string>{"H2"});
}

TEST(ClusterEasb, ScenarioTwoKeepsBalancedSitesApart) {
  const auto p = cluster_easb(scenario2_profiles());
  const auto g = groups(p);
  EXPECT_TRUE(g.count({"H1"}));
  EXPECT_TRUE(g.count({"H5"}));
  const auto& big = *std::find_if(p.clusters.begin(), p.clusters.end(),
                                  [](const Cluster& c) { return std::count(c.members.begin(), c.members.end(), "H0"); });
  for (const char* id : {"H0", "H3", "H4", "H6"})
    EXPECT_TRUE(std::count(big.members.begin(), big.members.end(), id)) << id;
}

TEST(ClusterEasb, SingleSite) {
  const std::vector<SiteProfile> one{SiteProfile::from_entropies("only", 0.2, 0.3)};
  const auto p = cluster_easb(one);
  ASSERT_EQ(p.clusters.size(), 1u);
  EXPECT_TRUE(p.merge_log.empty());
}

TEST(ClusterEasb, InvalidInputs) {
  const auto sites = scenario1_profiles();
  EXPECT_THROW(cluster_easb(sites, {-0.1, 0.55, 1e-6}), ValidationError);
  EXPECT_THROW(cluster_easb(sites, {0.05, 1.5, 1e-6}), ValidationError);
  EXPECT_THROW(cluster_easb(sites, {0.05, 0.55, 0.0}), ValidationError);
  EXPECT_THROW(cluster_easb(std::vector<SiteProfile>{}), ValidationError);
  auto dup = sites;
  dup.push_back(SiteProfile::from_entropies("H0", 0.1, 0.1));
  EXPECT_THROW(cluster_easb(dup), ValidationError);
}

TEST(ClusterEasb, ReplayOracleAndOrderInvariance) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    auto sites = replay::random_sites(gen);
    ClusterParams params{0.3 * u(gen), 0.3 + 0.7 * u(gen), kDefaultEps};
    const auto p = cluster_easb(sites, params);
    EXPECT_EQ(replay::check(p, sites), "") << "instance " << t;
    std::shuffle(sites.begin(), sites.end(), gen);
    const auto q = cluster_easb(sites, params);
    EXPECT_EQ(groups(p), groups(q));
    EXPECT_EQ(p.merge_log, q.merge_log);
  }
}

TEST(ClusterEasb, HigherTauRefinesPartition) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto sites = replay::random_sites(gen);
    const double lo = 0.2 * u(gen), hi = lo + 0.2 * u(gen);
    const auto coarse = cluster_easb(sites, {lo, 0.55, kDefaultEps});
    const auto fine = cluster_easb(sites, {hi, 0.55, kDefaultEps});
    for (const auto& f : fine.clusters) {
      const bool inside = std::any_of(coarse.clusters.begin(), coarse.clusters.end(), [&](const Cluster& c) {
        return std::includes(c.members.begin(), c.members.end(), f.members.begin(), f.members.end());
      });
      EXPECT_TRUE(inside);
    }
  }
}

TEST(ClusterEasb, ComplementaryPairMergesAndPoolsToHigherBalance) {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<std::int64_t> small(1, 8), big(80, 120);
  for (int t = 0; t < 50; ++t) {
    // gender-skewed, age-uniform vs gender-uniform, age-skewed
    const auto g_skew = raw("g", {big(gen), small(gen)}, {big(gen), big(gen), big(gen), big(gen)});
    const auto a_skew = raw("a", {big(gen), big(gen)}, {big(gen), small(gen), small(gen), small(gen)});
    const std::vector<SiteProfile> sites{g_skew, a_skew};
    const auto m = similarity_matrix(sites, Method::easb);
    ClusterParams params;
    ASSERT_LT(site_weight(g_skew).hw, params.beta);
    ASSERT_LT(site_weight(a_skew).hw, params.beta);
    ASSERT_GE(m.at(0, 1), params.tau);
    const auto p = cluster_easb(sites, params);
    ASSERT_EQ(p.clusters.size(), 1u);
    EXPECT_GT(p.clusters[0].hw, site_weight(g_skew).hw);
    EXPECT_GT(p.clusters[0].hw, site_weight(a_skew).hw);
    EXPECT_EQ(p.clusters[0].pooling, PoolingMode::pooled);
  }
}

TEST(ClusterEasb, ZeroMagnitudeSiteDoesNotAbort) {
  const std::vector<SiteProfile> sites{SiteProfile::from_entropies("z", 0, 0), SiteProfile::from_entropies("a", 0.3, 0.4),
                                       SiteProfile::from_entropies("b", 0.35, 0.4)};
  const auto p = cluster_easb(sites);
  EXPECT_EQ(groups(p), (Groups{{"a", "b"}, {"z"}}));
}

TEST(ClusterBaseline, ScenarioTwoEuclideanGroupsAgeSkewedSitesWithoutH3) {
  const auto sites = scenario2_profiles();
  const auto k = cluster_easb(sites).clusters.size();
  const auto p = cluster_baseline(sites, Method::euclidean, k);
  EXPECT_EQ(p.clusters.size(), k);
  const auto g = groups(p);
  const auto with_h0 = *std::find_if(g.begin(), g.end(), [](const auto& c) { return c.count("H0"); });
  EXPECT_TRUE(with_h0.count("H4") && with_h0.count("H6"));
  EXPECT_FALSE(with_h0.count("H3"));
}

TEST(ClusterBaseline, KBounds) {
  const auto sites = scenario1_profiles();
  EXPECT_EQ(cluster_baseline(sites, Method::cosine, 5).clusters.size(), 5u);
  const auto one = cluster_baseline(sites, Method::euclidean, 1);
  ASSERT_EQ(one.clusters.size(), 1u);
  EXPECT_EQ(one.clusters[0].members.size(), 5u);
  EXPECT_THROW(cluster_baseline(sites, Method::cosine, 0), ValidationError);
  EXPECT_THROW(cluster_baseline(sites, Method::cosine, 6), ValidationError);
  EXPECT_THROW(cluster_baseline(sites, Method::easb, 2), ValidationError);
}

TEST(ClusterBaseline, ReplayOracle) {
  std::mt19937_64 gen(31);
  for (int t = 0; t < 100; ++t) {
    const auto sites = replay::random_sites(gen);
    std::uniform_int_distribution<std::size_t> kd(1, sites.size());
    for (Method m : {Method::cosine, Method::euclidean}) {
      const auto p = cluster_baseline(sites, m, kd(gen));
      EXPECT_EQ(replay::check(p, sites), "") << to_string(m) << " instance " << t;
    }
  }
}

TEST(EvaluatePartition, AveragesAreUnweightedMeans) {
  Partition p;
  p.clusters.push_back({0, {"a"}, std::nullopt, std::nullopt, 1.0, 0.8, 0.8, PoolingMode::averaged});
  p.clusters.push_back({1, {"b", "c", "d"}, std::nullopt, std::nullopt, 0.9986, 0.5, 0.4993, PoolingMode::averaged});
  const auto r = evaluate_partition(p);
  EXPECT_NEAR(r.averages.gender_entropy_pct, 99.93, 1e-9);
  EXPECT_NEAR(r.averages.age_entropy_pct, 65.0, 1e-9);
  EXPECT_NEAR(r.averages.mean_hw, (0.8 + 0.4993) / 2, 1e-12);
  const auto w = evaluate_partition(p, true);
  EXPECT_NEAR(w.averages.age_entropy_pct, (80.0 + 3 * 50.0) / 4, 1e-9);
  EXPECT_TRUE(w.weighted);
}

TEST(EvaluatePartition, AllSingletonsAverageInputSites) {
  const auto sites = scenario2_profiles();
  const auto r = evaluate_partition(cluster_baseline(sites, Method::cosine, sites.size()));
  double g = 0, a = 0;
  for (const auto& s : sites) {
    g += *s.gender_entropy;
    a += *s.age_entropy;
  }
  EXPECT_NEAR(r.averages.gender_entropy_pct, 100 * g / 7, 1e-9);
  EXPECT_NEAR(r.averages.age_entropy_pct, 100 * a / 7, 1e-9);
  EXPECT_FALSE(r.weighted);
  EXPECT_TRUE(r.any_averaged());
}

TEST(EvaluatePartition, MergedComplementaryPairPoolsAboveMembers) {
  const std::vector<SiteProfile> sites{raw("g", {95, 5}, {25, 25, 25, 25}), raw("a", {50, 50}, {97, 1, 1, 1})};
  const auto r = evaluate_partition(cluster_baseline(sites, Method::cosine, 1));
  ASSERT_EQ(r.per_cluster.size(), 1u);
  const auto pooled_g = static_cast<double>(oracle::pooled_entropy_bruteforce({{95, 5}, {50, 50}}));
  const auto pooled_a = static_cast<double>(oracle::pooled_entropy_bruteforce({{25, 25, 25, 25}, {97, 1, 1, 1}}));
  EXPECT_NEAR(r.per_cluster[0].gender_entropy_pct, 100 * pooled_g, 1e-9);
  EXPECT_NEAR(r.per_cluster[0].age_entropy_pct, 100 * pooled_a, 1e-9);
  EXPECT_GE(pooled_g, gender_entropy(sites[0]));
  EXPECT_GE(pooled_a, age_entropy(sites[1]));
  EXPECT_EQ(r.per_cluster[0].pooling_mode, PoolingMode::pooled);
}

TEST(VerifyPartition, DetectsOmissionAndDuplication) {
  const auto sites = scenario1_profiles();
  auto p = cluster_easb(sites);
  EXPECT_NO_THROW(verify_partition(p, sites));
  auto duplicated = p;
  duplicated.clusters[0].members.push_back("H4");
  EXPECT_THROW(verify_partition(duplicated, sites), std::logic_error);
  auto omitted = p;
  omitted.clusters.pop_back();
  EXPECT_THROW(verify_partition(omitted, sites), std::logic_error);
}

}  // namespace
}  // namespace easb
