#pragma once

// Command-line driver: entropy, cluster, compare and simulate subcommands.
// Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "easb/cluster.hpp"
#include "easb/data_io.hpp"
#include "easb/error.hpp"
#include "easb/experiment.hpp"
#include "easb/log.hpp"
#include "easb/report.hpp"

namespace easb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class Format { table, csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "table") return Format::table;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw UsageError("unknown format '" + s + "'");
}

inline void write_entropy_rows(std::ostream& os, std::span<const SiteProfile> sites, Format f) {
  using namespace fmt_detail;
  if (f == Format::json) {
    json arr = json::array();
    for (const auto& s : sites)
      arr.push_back({{"id", s.id},
                     {"gender_entropy_pct", 100.0 * gender_entropy(s)},
                     {"age_entropy_pct", 100.0 * age_entropy(s)},
                     {"hw", site_weight(s).hw}});
    os << json{{"sites", arr}}.dump(2) << '\n';
    return;
  }
  if (f == Format::csv) {
    os << "id,gender_entropy_pct,age_entropy_pct,hw\n";
    for (const auto& s : sites)
      os << s.id << ',' << fixed(100.0 * gender_entropy(s), 2) << ',' << fixed(100.0 * age_entropy(s), 2) << ','
         << fixed(site_weight(s).hw, 4) << '\n';
    return;
  }
  std::size_t width = 6;
  for (const auto& s : sites) width = std::max(width, s.id.size() + 2);
  os << pad("site", width) << pad("gender %", 10) << pad("age %", 10) << "hw\n";
  for (const auto& s : sites)
    os << pad(s.id, width) << pad(fixed(100.0 * gender_entropy(s), 2), 10) << pad(fixed(100.0 * age_entropy(s), 2), 10)
       << fixed(site_weight(s).hw, 4) << '\n';
}

inline void write_report(std::ostream& os, const BalanceReport& r, Format f) {
  switch (f) {
    case Format::json: os << json(r).dump(2) << '\n'; break;
    case Format::csv: write_csv(os, r); break;
    case Format::table: write_table(os, r); break;
  }
}

inline void write_comparison(std::ostream& os, const Comparison& c, Format f) {
  switch (f) {
    case Format::json:
      os << json{{"baseline_k", c.baseline_k}, {"methods", c.rows}, {"reports", c.reports}}.dump(2) << '\n';
      break;
    case Format::csv: write_comparison_csv(os, c); break;
    case Format::table: write_comparison_table(os, c); break;
  }
}

inline void write_simulation(std::ostream& os, const SimulationSummary& s, Format f) {
  using namespace fmt_detail;
  if (f == Format::json) {
    os << json(s).dump(2) << '\n';
    return;
  }
  if (f == Format::csv) {
    os << "seed,easb_mean_hw,cosine_mean_hw,euclidean_mean_hw,clusters\n";
    for (const auto& t : s.per_trial)
      os << t.seed << ',' << fixed(t.mean_hw(Method::easb), 6) << ',' << fixed(t.mean_hw(Method::cosine), 6) << ','
         << fixed(t.mean_hw(Method::euclidean), 6) << ',' << t.comparison.baseline_k << '\n';
    return;
  }
  os << "trials                      " << s.trials << '\n'
     << "win rate vs cosine          " << fixed(s.win_rate_vs_cosine, 4) << '\n'
     << "win rate vs euclidean       " << fixed(s.win_rate_vs_euclidean, 4) << '\n'
     << "win rate vs both            " << fixed(s.win_rate_vs_both, 4) << '\n'
     << "mean hw gain vs cosine      " << fixed(s.mean_improvement_vs_cosine, 4) << '\n'
     << "mean hw gain vs euclidean   " << fixed(s.mean_improvement_vs_euclidean, 4) << '\n'
     << "mean hw easb/cos/euc        " << fixed(s.mean_hw_easb, 4) << " / " << fixed(s.mean_hw_cosine, 4) << " / "
     << fixed(s.mean_hw_euclidean, 4) << '\n';
}

inline void emit(const std::string& text, const std::string& output_path, std::ostream& out) {
  if (output_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(output_path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw std::runtime_error("cannot write '" + output_path + "'");
}

/// Runs the command line. Output goes to `out` (or --output), diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Entropy-aware balanced clustering of data-holding sites", "easb"};
  app.require_subcommand(1);

  std::string format = "table", output;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
  app.add_option("--output", output, "Write output to PATH instead of stdout");

  std::string input;
  int age_bins = kDefaultAgeBins;
  ClusterParams params;
  std::optional<std::size_t> k;
  std::string method_text, svg_path;
  bool weighted = false;

  auto add_cluster_flags = [&](CLI::App* sub) {
    sub->add_option("--tau", params.tau, "Merge threshold")->capture_default_str();
    sub->add_option("--beta", params.beta, "Freeze threshold on site hw")->capture_default_str();
    sub->add_option("--eps", params.eps, "Clamp for the pairwise balance odds ratio")->capture_default_str();
    sub->add_option("--k", k, "Cluster count for baselines");
    sub->add_flag("--weighted", weighted, "Weight averages by cluster member count");
  };

  auto* entropy = app.add_subcommand("entropy", "Per-site gender/age entropy and balance weight");
  auto* cluster = app.add_subcommand("cluster", "Cluster sites with one method");
  auto* compare = app.add_subcommand("compare", "Compare EASB against cosine and euclidean baselines");
  auto* simulate_cmd = app.add_subcommand("simulate", "Seeded synthetic trials");

  for (auto* sub : {entropy, cluster, compare}) {
    sub->add_option("input", input, "Records CSV, histogram JSON or entropy-profile JSON")->required();
    sub->add_option("--age-bins", age_bins, "Decade age bins for records input")->capture_default_str();
  }
  for (auto* sub : {entropy, cluster, compare, simulate_cmd}) sub->fallthrough();

  cluster->add_option("--method", method_text, "easb | cosine | euclidean")
      ->check(CLI::IsMember({"easb", "cosine", "euclidean"}))
      ->default_str("easb");
  add_cluster_flags(cluster);
  cluster->add_option("--svg", svg_path, "Write a scatter plot of the partition");

  compare->add_option("--method", method_text, "Restrict the table to one method")
      ->check(CLI::IsMember({"easb", "cosine", "euclidean"}));
  add_cluster_flags(compare);

  std::size_t sites_n = 8, trials = 100;
  std::uint64_t seed = 1;
  std::string mix_text = "0.25,0.25,0.25,0.25";
  unsigned threads = 0;
  simulate_cmd->add_option("--sites", sites_n, "Sites per scenario")->capture_default_str();
  simulate_cmd->add_option("--seed", seed, "Base seed; trial t uses seed + t")->capture_default_str();
  simulate_cmd->add_option("--mix", mix_text, "Archetype mix b,g,a,d")->capture_default_str();
  simulate_cmd->add_option("--trials", trials, "Number of trials")->capture_default_str();
  simulate_cmd->add_option("--age-bins", age_bins, "Age bins per synthetic site")->capture_default_str();
  simulate_cmd->add_option("--threads", threads, "Worker threads (0 = hardware)")->capture_default_str();
  simulate_cmd->add_option("--tau", params.tau, "Merge threshold")->capture_default_str();
  simulate_cmd->add_option("--beta", params.beta, "Freeze threshold")->capture_default_str();
  simulate_cmd->add_option("--eps", params.eps, "Pairwise balance clamp")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "easb: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const Format fmt = parse_format(format);
    std::ostringstream text;

    if (entropy->parsed()) {
      write_entropy_rows(text, load_sites(input, age_bins), fmt);
    } else if (cluster->parsed()) {
      const Method method = parse_method(method_text.empty() ? "easb" : method_text);
      if (method == Method::easb && k) throw UsageError("--k applies only to the cosine and euclidean baselines");
      if (method != Method::easb && !k) throw UsageError("--k is required for the " + method_text + " baseline");
      const auto sites = load_sites(input, age_bins);
      const Partition p = method == Method::easb ? cluster_easb(sites, params) : cluster_baseline(sites, method, *k);
      write_report(text, evaluate_partition(p, weighted), fmt);
      if (!svg_path.empty()) emit(render_svg(p, sites), svg_path, out);
    } else if (compare->parsed()) {
      CompareOptions co;
      co.params = params;
      co.weighted = weighted;
      co.k = k;
      if (!method_text.empty()) co.only = parse_method(method_text);
      write_comparison(text, compare_methods(load_sites(input, age_bins), co), fmt);
    } else if (simulate_cmd->parsed()) {
      SimulationOptions so;
      so.scenario.n_sites = sites_n;
      so.scenario.seed = seed;
      so.scenario.age_bins = age_bins;
      so.scenario.mix = parse_mix(mix_text);
      so.trials = trials;
      so.params = params;
      so.threads = threads;
      write_simulation(text, simulate(so), fmt);
    }
    emit(text.str(), output, out);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "easb: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "easb: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace easb::cli
