#pragma once

// Replays a Partition's merge log against exhaustively recomputed oracle
// scores. Returns an empty string when every recorded merge was the best
// eligible pair and the final clusters match; otherwise a description.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "easb/cluster.hpp"
#include "oracle.hpp"

namespace replay {

inline oracle::Pt raw_point(const easb::SiteProfile& s) {
  auto h = [](const std::optional<easb::CategoricalDistribution>& d, const std::optional<double>& direct) {
    if (direct) return static_cast<oracle::Real>(*direct);
    std::vector<std::int64_t> c(d->counts().begin(), d->counts().end());
    return oracle::entropy_of_counts(c);
  };
  return {h(s.gender, s.gender_entropy), h(s.age, s.age_entropy)};
}

inline std::string check(const easb::Partition& p, const std::vector<easb::SiteProfile>& sites,
                         double tol = 1e-12) {
  std::ostringstream why;
  std::map<std::string, oracle::Pt> pts;
  for (const auto& s : sites) pts[s.id] = raw_point(s);

  const bool is_easb = p.method == easb::Method::easb;
  std::set<std::string> frozen;
  std::vector<std::set<std::string>> clusters;
  for (const auto& [id, pt] : pts) {
    if (is_easb && pt.x * pt.y >= p.params.beta) {
      frozen.insert(id);
    } else {
      clusters.push_back({id});
    }
  }
  if (is_easb && frozen != std::set<std::string>(p.frozen.begin(), p.frozen.end()))
    return "frozen set differs from oracle";

  auto score = [&](const std::string& a, const std::string& b) -> oracle::Real {
    switch (p.method) {
      case easb::Method::easb: return oracle::easb(pts[a], pts[b], p.params.eps);
      case easb::Method::cosine: return oracle::cosine(pts[a], pts[b]);
      case easb::Method::euclidean: return oracle::distance(pts[a], pts[b]);
    }
    return 0;
  };
  const bool higher = p.method != easb::Method::euclidean;

  auto best_of = [&](oracle::Real& best) {
    bool any = false;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const auto s = oracle::average_linkage(clusters[a], clusters[b], score);
        if (!any || (higher ? s > best : s < best)) best = s;
        any = true;
      }
    return any;
  };

  for (const auto& step : p.merge_log) {
    for (const auto& id : step.cluster_a)
      if (frozen.count(id)) return "frozen site " + id + " appears in the merge log";
    for (const auto& id : step.cluster_b)
      if (frozen.count(id)) return "frozen site " + id + " appears in the merge log";
    const std::set<std::string> a(step.cluster_a.begin(), step.cluster_a.end());
    const std::set<std::string> b(step.cluster_b.begin(), step.cluster_b.end());
    auto ia = std::find(clusters.begin(), clusters.end(), a);
    auto ib = std::find(clusters.begin(), clusters.end(), b);
    if (ia == clusters.end() || ib == clusters.end() || ia == ib) {
      why << "step " << step.step << " merges clusters that do not exist";
      return why.str();
    }
    oracle::Real best = 0;
    best_of(best);
    const auto recorded = oracle::average_linkage(a, b, score);
    if (std::abs(static_cast<double>(recorded) - step.score) > tol) {
      why << "step " << step.step << " score " << step.score << " != oracle " << static_cast<double>(recorded);
      return why.str();
    }
    if (std::abs(static_cast<double>(best - recorded)) > tol) {
      why << "step " << step.step << " merged a pair scoring " << step.score << " but best was "
          << static_cast<double>(best);
      return why.str();
    }
    std::set<std::string> merged = a;
    merged.insert(b.begin(), b.end());
    clusters.erase(std::max(ia, ib));
    clusters.erase(std::min(ia, ib));
    clusters.push_back(merged);
  }

  // stopping rule
  oracle::Real best = 0;
  const bool any = best_of(best);
  if (is_easb) {
    if (any && static_cast<double>(best) >= p.params.tau + tol) {
      why << "stopped although best remaining score " << static_cast<double>(best) << " >= tau";
      return why.str();
    }
  } else if (clusters.size() != *p.k) {
    return "baseline stopped at the wrong cluster count";
  }

  std::set<std::set<std::string>> expected(clusters.begin(), clusters.end());
  for (const auto& f : frozen) expected.insert({f});
  std::set<std::set<std::string>> got;
  for (const auto& c : p.clusters) got.insert(std::set<std::string>(c.members.begin(), c.members.end()));
  if (got != expected) return "final clusters differ from the replay";
  return {};
}

/// Random instance of 2..12 sites, a mix of entropy-only and raw-count profiles.
inline std::vector<easb::SiteProfile> random_sites(std::mt19937_64& gen, bool allow_raw = true) {
  std::uniform_int_distribution<int> nd(2, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = nd(gen);
  const bool raw = allow_raw && u(gen) < 0.5;
  std::vector<easb::SiteProfile> sites;
  std::uniform_int_distribution<std::int64_t> cd(0, 60);
  for (int i = 0; i < n; ++i) {
    const std::string id = "s" + std::to_string(i);
    if (raw) {
      std::vector<std::int64_t> g{cd(gen), cd(gen)}, a{cd(gen), cd(gen), cd(gen), cd(gen)};
      g[0] += 1;
      a[1] += 1;
      if (u(gen) < 0.4) g[1] = 0;           // gender one-hot
      if (u(gen) < 0.4) a = {0, a[1], 0, 0};  // age one-hot
      sites.push_back(easb::SiteProfile::from_distributions(
          id, easb::CategoricalDistribution::from_counts({"M", "F"}, g),
          easb::CategoricalDistribution::from_counts({"a0", "a1", "a2", "a3"}, a)));
    } else {
      sites.push_back(easb::SiteProfile::from_entropies(id, u(gen), u(gen)));
    }
  }
  return sites;
}

}  // namespace replay
