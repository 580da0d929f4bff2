#pragma once

// Greedy average-linkage agglomeration driven by the entropy-aware
// similarity, cosine/euclidean baselines, and cluster-level balance scoring.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "easb/entropy.hpp"
#include "easb/error.hpp"
#include "easb/log.hpp"
#include "easb/similarity.hpp"

namespace easb {

struct ClusterParams {
  double tau = 0.05;   // merge threshold: stop once the best score falls below it
  double beta = 0.55;  // freeze threshold: sites with hw >= beta stay singletons
  double eps = kDefaultEps;

  friend bool operator==(const ClusterParams&, const ClusterParams&) = default;
};

inline void validate(const ClusterParams& p) {
  if (!(p.tau >= 0.0 && p.tau <= 1.0)) throw ValidationError("tau must lie in [0,1]");
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) throw ValidationError("beta must lie in [0,1]");
  if (!(p.eps > 0.0 && p.eps < 0.5)) throw ValidationError("eps must lie in (0, 0.5)");
}

enum class PoolingMode { pooled, averaged };

inline std::string_view to_string(PoolingMode m) { return m == PoolingMode::pooled ? "pooled" : "averaged"; }

inline PoolingMode parse_pooling_mode(std::string_view text) {
  if (text == "pooled") return PoolingMode::pooled;
  if (text == "averaged") return PoolingMode::averaged;
  throw ValidationError("unknown pooling mode '" + std::string(text) + "'");
}

struct Cluster {
  int id = 0;
  std::vector<std::string> members;  // sorted
  std::optional<CategoricalDistribution> pooled_gender;
  std::optional<CategoricalDistribution> pooled_age;
  double gender_entropy = 0.0;
  double age_entropy = 0.0;
  double hw = 0.0;
  PoolingMode pooling = PoolingMode::pooled;
};

/// One agglomeration step. Each side is listed by its sorted member ids.
struct MergeStep {
  std::size_t step = 0;
  std::vector<std::string> cluster_a;
  std::vector<std::string> cluster_b;
  double score = 0.0;

  friend bool operator==(const MergeStep&, const MergeStep&) = default;
};

struct Partition {
  std::vector<Cluster> clusters;  // ordered by smallest member id
  Method method = Method::easb;
  std::vector<MergeStep> merge_log;
  ClusterParams params;
  std::optional<std::size_t> k;      // baselines only
  std::vector<std::string> frozen;   // EASB only
};

// ---------------------------------------------------------------------------
// Pooling

/// Class-wise sum of member counts for one attribute.
inline CategoricalDistribution pool_distribution(std::span<const SiteProfile> members, Attribute attr) {
  if (members.empty()) throw ValidationError("cannot pool an empty member set");
  const CategoricalDistribution* first = nullptr;
  std::vector<std::int64_t> sum;
  for (const auto& m : members) {
    const auto& d = m.distribution(attr);
    if (!d || !d->has_counts())
      throw UnsupportedPoolingError("site " + m.id + " has no raw " + std::string(to_string(attr)) +
                                    " counts to pool");
    if (!first) {
      first = &*d;
      sum.assign(d->size(), 0);
    } else if (d->classes() != first->classes()) {
      throw ValidationError("site " + m.id + ": " + std::string(to_string(attr)) +
                            " classes differ from the other members");
    }
    auto c = d->counts();
    for (std::size_t i = 0; i < c.size(); ++i) sum[i] += c[i];
  }
  return CategoricalDistribution::from_counts(first->classes(), std::move(sum));
}

inline double pooled_entropy(std::span<const SiteProfile> members, Attribute attr) {
  return normalized_entropy(pool_distribution(members, attr));
}

/// Pooled entropies when every member has raw counts for both attributes,
/// member-entropy means otherwise.
inline Cluster summarize_cluster(std::span<const SiteProfile> members) {
  Cluster c;
  for (const auto& m : members) c.members.push_back(m.id);
  std::sort(c.members.begin(), c.members.end());
  const bool raw = std::all_of(members.begin(), members.end(), [](const SiteProfile& s) {
    return s.has_raw() && s.gender->has_counts() && s.age->has_counts();
  });
  if (raw) {
    c.pooled_gender = pool_distribution(members, Attribute::gender);
    c.pooled_age = pool_distribution(members, Attribute::age);
    c.gender_entropy = normalized_entropy(*c.pooled_gender);
    c.age_entropy = normalized_entropy(*c.pooled_age);
    c.pooling = PoolingMode::pooled;
  } else {
    double g = 0.0, a = 0.0;
    for (const auto& m : members) {
      g += gender_entropy(m);
      a += age_entropy(m);
    }
    c.gender_entropy = g / static_cast<double>(members.size());
    c.age_entropy = a / static_cast<double>(members.size());
    c.pooling = PoolingMode::averaged;
  }
  c.hw = c.gender_entropy * c.age_entropy;
  return c;
}

// ---------------------------------------------------------------------------
// Agglomeration engine

namespace detail {

struct Agglomeration {
  std::vector<std::vector<std::size_t>> clusters;  // sorted members, ordered by front()
  struct Merge {
    std::vector<std::size_t> a;
    std::vector<std::size_t> b;
    double score;
  };
  std::vector<Merge> merges;
};

/// Average linkage of two clusters over a row-major n x n score matrix,
/// summed in ascending member order.
inline double average_linkage(std::span<const double> scores, std::size_t n,
                              const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  double sum = 0.0;
  for (auto i : a)
    for (auto j : b) sum += scores[i * n + j];
  return sum / static_cast<double>(a.size() * b.size());
}

/// Items 0..n-1 must already be in canonical (site id) order. Pairs are
/// scanned in lexicographic order of their smallest members, and only a
/// strictly better score displaces the incumbent, so ties go to the lowest
/// pair. `stop(best_score, cluster_count)` is asked before every merge.
template <class StopRule>
Agglomeration agglomerate(std::size_t n, std::span<const double> scores, bool higher_is_better,
                          StopRule stop) {
  Agglomeration out;
  for (std::size_t i = 0; i < n; ++i) out.clusters.push_back({i});
  auto& cl = out.clusters;
  while (cl.size() > 1) {
    std::size_t best_a = 0, best_b = 0;
    double best = 0.0;
    bool found = false;
    for (std::size_t a = 0; a < cl.size(); ++a) {
      for (std::size_t b = a + 1; b < cl.size(); ++b) {
        const double s = average_linkage(scores, n, cl[a], cl[b]);
        const bool better = !found || (higher_is_better ? s > best : s < best);
        if (better) {
          best = s;
          best_a = a;
          best_b = b;
          found = true;
        }
      }
    }
    if (stop(best, cl.size())) break;
    out.merges.push_back({cl[best_a], cl[best_b], best});
    std::vector<std::size_t> merged;
    std::merge(cl[best_a].begin(), cl[best_a].end(), cl[best_b].begin(), cl[best_b].end(),
               std::back_inserter(merged));
    cl[best_a] = std::move(merged);  // front() unchanged, so order is kept
    cl.erase(cl.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return out;
}

inline std::vector<std::size_t> id_order(std::span<const SiteProfile> sites) {
  std::vector<std::size_t> order(sites.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto l, auto r) { return sites[l].id < sites[r].id; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (sites[order[i]].id == sites[order[i - 1]].id)
      throw ValidationError("duplicate site id '" + sites[order[i]].id + "'");
  return order;
}

inline void check_sites(std::span<const SiteProfile> sites) {
  if (sites.empty()) throw ValidationError("clustering needs at least one site");
  for (const auto& s : sites) validate(s);
}

/// Maps engine output (indices into `canon`) back to clusters and a log.
inline void collect(const Agglomeration& agg, std::span<const SiteProfile> canon, Partition& p,
                    std::vector<std::vector<SiteProfile>>& groups) {
  auto ids = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(canon[i].id);
    return out;
  };
  for (const auto& m : agg.merges)
    p.merge_log.push_back({p.merge_log.size() + 1, ids(m.a), ids(m.b), m.score});
  for (const auto& c : agg.clusters) {
    std::vector<SiteProfile> g;
    for (auto i : c) g.push_back(canon[i]);
    groups.push_back(std::move(g));
  }
}

inline void finalize(Partition& p, std::vector<std::vector<SiteProfile>> groups) {
  std::sort(groups.begin(), groups.end(),
            [](const auto& l, const auto& r) { return l.front().id < r.front().id; });
  int id = 0;
  for (const auto& g : groups) {
    Cluster c = summarize_cluster(g);
    c.id = id++;
    p.clusters.push_back(std::move(c));
  }
}

}  // namespace detail

/// Throws std::logic_error unless the clusters cover `sites` exactly once.
inline void verify_partition(const Partition& p, std::span<const SiteProfile> sites) {
  std::multiset<std::string> seen;
  for (const auto& c : p.clusters) {
    if (c.members.empty()) throw std::logic_error("partition has an empty cluster");
    seen.insert(c.members.begin(), c.members.end());
  }
  std::multiset<std::string> expected;
  for (const auto& s : sites) expected.insert(s.id);
  if (seen != expected) throw std::logic_error("partition does not cover the input sites exactly once");
}

/// Entropy-aware balanced clustering. Sites with hw >= beta are frozen as
/// singletons; the rest are canonicalized into the x <= y half-plane and
/// merged greedily by average-linkage EASB score while the best score is at
/// least tau. The result does not depend on input order.
inline Partition cluster_easb(std::span<const SiteProfile> sites, const ClusterParams& params = {}) {
  validate(params);
  detail::check_sites(sites);
  const auto order = detail::id_order(sites);

  Partition p;
  p.method = Method::easb;
  p.params = params;

  std::vector<std::vector<SiteProfile>> groups;
  std::vector<SiteProfile> active;
  for (auto i : order) {
    if (site_weight(sites[i]).hw >= params.beta) {
      p.frozen.push_back(sites[i].id);
      groups.push_back({sites[i]});
    } else {
      active.push_back(sites[i]);
    }
  }
  log::debug("easb: ", p.frozen.size(), " frozen, ", active.size(), " mergeable");

  if (active.size() == 1) {
    groups.push_back(active);
  } else if (active.size() > 1) {
    const auto m = similarity_matrix(active, Method::easb, params.eps);
    const auto agg = detail::agglomerate(active.size(), m.scores, true, [&](double best, std::size_t count) {
      return count <= 1 || best < params.tau;
    });
    detail::collect(agg, active, p, groups);
  }
  detail::finalize(p, std::move(groups));
  verify_partition(p, sites);
  return p;
}

/// Average-linkage clustering on raw coordinates down to k clusters, merging
/// the most similar (cosine) or nearest (euclidean) pair each step.
inline Partition cluster_baseline(std::span<const SiteProfile> sites, Method method, std::size_t k) {
  if (method == Method::easb) throw ValidationError("cluster_baseline takes cosine or euclidean");
  detail::check_sites(sites);
  if (k < 1 || k > sites.size())
    throw ValidationError("k must lie in [1, " + std::to_string(sites.size()) + "]");
  const auto order = detail::id_order(sites);

  Partition p;
  p.method = method;
  p.k = k;

  std::vector<SiteProfile> canon;
  for (auto i : order) canon.push_back(sites[i]);
  std::vector<std::vector<SiteProfile>> groups;
  if (canon.size() == 1) {
    groups.push_back(canon);
  } else {
    const auto m = similarity_matrix(canon, method);
    const auto agg = detail::agglomerate(canon.size(), m.scores, method == Method::cosine,
                                         [&](double, std::size_t count) { return count <= k; });
    detail::collect(agg, canon, p, groups);
  }
  detail::finalize(p, std::move(groups));
  verify_partition(p, sites);
  return p;
}

// ---------------------------------------------------------------------------
// Reporting

struct ClusterRow {
  int id = 0;
  std::vector<std::string> members;
  double gender_entropy_pct = 0.0;
  double age_entropy_pct = 0.0;
  double hw = 0.0;
  PoolingMode pooling_mode = PoolingMode::pooled;

  friend bool operator==(const ClusterRow&, const ClusterRow&) = default;
};

struct ReportAverages {
  double age_entropy_pct = 0.0;
  double gender_entropy_pct = 0.0;
  double mean_hw = 0.0;

  friend bool operator==(const ReportAverages&, const ReportAverages&) = default;
};

struct BalanceReport {
  Method method = Method::easb;
  ClusterParams params;
  std::optional<std::size_t> k;
  bool weighted = false;  // averages weighted by cluster member count
  std::vector<ClusterRow> per_cluster;
  ReportAverages averages;
  std::vector<MergeStep> merge_log;

  bool any_averaged() const {
    return std::any_of(per_cluster.begin(), per_cluster.end(),
                       [](const ClusterRow& r) { return r.pooling_mode == PoolingMode::averaged; });
  }

  friend bool operator==(const BalanceReport&, const BalanceReport&) = default;
};

/// Per-cluster balance plus means across clusters (unweighted unless
/// `weighted`, which weights each cluster by its number of member sites).
inline BalanceReport evaluate_partition(const Partition& p, bool weighted = false) {
  BalanceReport r;
  r.method = p.method;
  r.params = p.params;
  r.k = p.k;
  r.weighted = weighted;
  r.merge_log = p.merge_log;
  double wsum = 0.0;
  for (const auto& c : p.clusters) {
    r.per_cluster.push_back({c.id, c.members, 100.0 * c.gender_entropy, 100.0 * c.age_entropy, c.hw, c.pooling});
    const double w = weighted ? static_cast<double>(c.members.size()) : 1.0;
    r.averages.age_entropy_pct += w * r.per_cluster.back().age_entropy_pct;
    r.averages.gender_entropy_pct += w * r.per_cluster.back().gender_entropy_pct;
    r.averages.mean_hw += w * c.hw;
    wsum += w;
  }
  if (wsum > 0.0) {
    r.averages.age_entropy_pct /= wsum;
    r.averages.gender_entropy_pct /= wsum;
    r.averages.mean_hw /= wsum;
  }
  if (r.any_averaged()) log::info(to_string(p.method), ": cluster entropies averaged over members (no raw counts)");
  return r;
}

}  // namespace easb
