#pragma once

// Method comparison on one site set and seeded multi-trial simulation.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "easb/cluster.hpp"
#include "easb/data_io.hpp"
#include "easb/report.hpp"

namespace easb {

struct MethodSummary {
  Method method = Method::easb;
  std::size_t clusters = 0;
  double age_entropy_pct = 0.0;
  double gender_entropy_pct = 0.0;
  double mean_hw = 0.0;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct Comparison {
  std::vector<MethodSummary> rows;
  std::vector<BalanceReport> reports;
  std::size_t baseline_k = 0;

  const MethodSummary* row(Method m) const {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const MethodSummary& r) { return r.method == m; });
    return it == rows.end() ? nullptr : &*it;
  }

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct CompareOptions {
  ClusterParams params;
  bool weighted = false;
  std::optional<Method> only;      // single-method table
  std::optional<std::size_t> k;    // baseline k; defaults to EASB's cluster count
};

/// Runs EASB and both baselines. Baselines use k equal to EASB's cluster
/// count unless overridden.
inline Comparison compare_methods(std::span<const SiteProfile> sites, const CompareOptions& opt = {}) {
  Comparison out;
  const auto easb_partition = cluster_easb(sites, opt.params);
  out.baseline_k = opt.k.value_or(easb_partition.clusters.size());
  for (Method m : {Method::cosine, Method::euclidean, Method::easb}) {
    if (opt.only && *opt.only != m) continue;
    const Partition p = m == Method::easb ? easb_partition : cluster_baseline(sites, m, out.baseline_k);
    auto report = evaluate_partition(p, opt.weighted);
    out.rows.push_back({m, p.clusters.size(), report.averages.age_entropy_pct, report.averages.gender_entropy_pct,
                        report.averages.mean_hw});
    out.reports.push_back(std::move(report));
  }
  return out;
}

struct SimulationOptions {
  ScenarioSpec scenario;  // trial t uses seed scenario.seed + t
  std::size_t trials = 100;
  ClusterParams params;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct TrialResult {
  std::uint64_t seed = 0;
  Comparison comparison;

  double mean_hw(Method m) const { return comparison.row(m)->mean_hw; }
};

struct SimulationSummary {
  std::size_t trials = 0;
  double win_rate_vs_cosine = 0.0;     // fraction of trials with EASB mean hw >= cosine's
  double win_rate_vs_euclidean = 0.0;
  double win_rate_vs_both = 0.0;
  double mean_improvement_vs_cosine = 0.0;  // mean of (EASB - baseline) mean hw
  double mean_improvement_vs_euclidean = 0.0;
  double mean_hw_easb = 0.0;
  double mean_hw_cosine = 0.0;
  double mean_hw_euclidean = 0.0;
  std::vector<TrialResult> per_trial;  // in seed order
};

inline TrialResult run_trial(const SimulationOptions& opt, std::size_t t) {
  ScenarioSpec spec = opt.scenario;
  spec.seed = opt.scenario.seed + t;
  const auto sites = generate_scenario(spec);
  CompareOptions co;
  co.params = opt.params;
  return {spec.seed, compare_methods(sites, co)};
}

/// Reduces per-trial results in seed order.
inline SimulationSummary summarize_trials(std::vector<TrialResult> trials) {
  SimulationSummary s;
  s.trials = trials.size();
  if (trials.empty()) return s;
  std::size_t wc = 0, we = 0, wb = 0;
  for (const auto& t : trials) {
    const double e = t.mean_hw(Method::easb), c = t.mean_hw(Method::cosine), u = t.mean_hw(Method::euclidean);
    wc += e >= c;
    we += e >= u;
    wb += e >= c && e >= u;
    s.mean_improvement_vs_cosine += e - c;
    s.mean_improvement_vs_euclidean += e - u;
    s.mean_hw_easb += e;
    s.mean_hw_cosine += c;
    s.mean_hw_euclidean += u;
  }
  const auto n = static_cast<double>(trials.size());
  s.win_rate_vs_cosine = static_cast<double>(wc) / n;
  s.win_rate_vs_euclidean = static_cast<double>(we) / n;
  s.win_rate_vs_both = static_cast<double>(wb) / n;
  s.mean_improvement_vs_cosine /= n;
  s.mean_improvement_vs_euclidean /= n;
  s.mean_hw_easb /= n;
  s.mean_hw_cosine /= n;
  s.mean_hw_euclidean /= n;
  s.per_trial = std::move(trials);
  return s;
}

inline SimulationSummary simulate(const SimulationOptions& opt) {
  opt.scenario.validate();
  validate(opt.params);
  if (opt.trials < 1) throw ValidationError("trials must be at least 1");

  std::vector<TrialResult> results(opt.trials);
  unsigned workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, opt.trials));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t; !failed && (t = next.fetch_add(1)) < opt.trials;) {
          try {
            results[t] = run_trial(opt, t);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return summarize_trials(std::move(results));
}

inline void to_json(json& j, const MethodSummary& m) {
  j = {{"method", std::string(to_string(m.method))},
       {"clusters", m.clusters},
       {"age_entropy_pct", m.age_entropy_pct},
       {"gender_entropy_pct", m.gender_entropy_pct},
       {"mean_hw", m.mean_hw}};
}

inline void from_json(const json& j, MethodSummary& m) {
  m.method = parse_method(j.at("method").get<std::string>());
  j.at("clusters").get_to(m.clusters);
  j.at("age_entropy_pct").get_to(m.age_entropy_pct);
  j.at("gender_entropy_pct").get_to(m.gender_entropy_pct);
  j.at("mean_hw").get_to(m.mean_hw);
}

inline void to_json(json& j, const SimulationSummary& s) {
  json trials = json::array();
  for (const auto& t : s.per_trial) trials.push_back({{"seed", t.seed}, {"methods", t.comparison.rows}});
  j = {{"trials", s.trials},
       {"win_rate", {{"vs_cosine", s.win_rate_vs_cosine},
                     {"vs_euclidean", s.win_rate_vs_euclidean},
                     {"vs_both", s.win_rate_vs_both}}},
       {"mean_improvement", {{"vs_cosine", s.mean_improvement_vs_cosine},
                             {"vs_euclidean", s.mean_improvement_vs_euclidean}}},
       {"mean_hw", {{"easb", s.mean_hw_easb}, {"cosine", s.mean_hw_cosine}, {"euclidean", s.mean_hw_euclidean}}},
       {"per_trial", trials}};
}

inline void write_comparison_table(std::ostream& os, const Comparison& c) {
  using namespace fmt_detail;
  os << pad("Avg_Cluster", 12) << pad("clusters", 10) << pad("age %", 10) << pad("gender %", 10) << "mean hw\n";
  for (const auto& r : c.rows)
    os << pad(std::string(to_string(r.method)), 12) << pad(std::to_string(r.clusters), 10)
       << pad(fixed(r.age_entropy_pct, 2), 10) << pad(fixed(r.gender_entropy_pct, 2), 10) << fixed(r.mean_hw, 4)
       << '\n';
}

inline void write_comparison_csv(std::ostream& os, const Comparison& c) {
  using namespace fmt_detail;
  os << "method,clusters,age_entropy_pct,gender_entropy_pct,mean_hw\n";
  for (const auto& r : c.rows)
    os << to_string(r.method) << ',' << r.clusters << ',' << fixed(r.age_entropy_pct, 2) << ','
       << fixed(r.gender_entropy_pct, 2) << ',' << fixed(r.mean_hw, 4) << '\n';
}

}  // namespace easb
