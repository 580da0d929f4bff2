#pragma once

// BalanceReport serialization (JSON, CSV, plain table) and SVG scatter plots
// of balance points.

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "easb/cluster.hpp"
#include "easb/entropy.hpp"
#include "easb/similarity.hpp"
#include "json.hpp"

namespace easb {

using json = nlohmann::json;

inline void to_json(json& j, const MergeStep& m) {
  j = {{"step", m.step}, {"cluster_a", m.cluster_a}, {"cluster_b", m.cluster_b}, {"score", m.score}};
}

inline void from_json(const json& j, MergeStep& m) {
  j.at("step").get_to(m.step);
  j.at("cluster_a").get_to(m.cluster_a);
  j.at("cluster_b").get_to(m.cluster_b);
  j.at("score").get_to(m.score);
}

inline void to_json(json& j, const ClusterRow& r) {
  j = {{"id", r.id},
       {"members", r.members},
       {"gender_entropy_pct", r.gender_entropy_pct},
       {"age_entropy_pct", r.age_entropy_pct},
       {"hw", r.hw},
       {"pooling_mode", std::string(to_string(r.pooling_mode))}};
}

inline void from_json(const json& j, ClusterRow& r) {
  j.at("id").get_to(r.id);
  j.at("members").get_to(r.members);
  j.at("gender_entropy_pct").get_to(r.gender_entropy_pct);
  j.at("age_entropy_pct").get_to(r.age_entropy_pct);
  j.at("hw").get_to(r.hw);
  r.pooling_mode = parse_pooling_mode(j.at("pooling_mode").get<std::string>());
}

inline void to_json(json& j, const BalanceReport& r) {
  j = {{"method", std::string(to_string(r.method))},
       {"params", {{"tau", r.params.tau}, {"beta", r.params.beta}, {"eps", r.params.eps}}},
       {"k", r.k ? json(*r.k) : json(nullptr)},
       {"weighted", r.weighted},
       {"per_cluster", r.per_cluster},
       {"averages",
        {{"age_entropy_pct", r.averages.age_entropy_pct},
         {"gender_entropy_pct", r.averages.gender_entropy_pct},
         {"mean_hw", r.averages.mean_hw}}},
       {"merge_log", r.merge_log}};
}

inline void from_json(const json& j, BalanceReport& r) {
  r.method = parse_method(j.at("method").get<std::string>());
  const auto& p = j.at("params");
  p.at("tau").get_to(r.params.tau);
  p.at("beta").get_to(r.params.beta);
  p.at("eps").get_to(r.params.eps);
  r.k = j.at("k").is_null() ? std::nullopt : std::optional<std::size_t>(j.at("k").get<std::size_t>());
  j.at("weighted").get_to(r.weighted);
  j.at("per_cluster").get_to(r.per_cluster);
  const auto& a = j.at("averages");
  a.at("age_entropy_pct").get_to(r.averages.age_entropy_pct);
  a.at("gender_entropy_pct").get_to(r.averages.gender_entropy_pct);
  a.at("mean_hw").get_to(r.averages.mean_hw);
  j.at("merge_log").get_to(r.merge_log);
}

namespace fmt_detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace fmt_detail

inline void write_csv(std::ostream& os, const BalanceReport& r) {
  using namespace fmt_detail;
  os << "cluster,members,gender_entropy_pct,age_entropy_pct,hw,pooling_mode\n";
  for (const auto& c : r.per_cluster)
    os << c.id << ',' << join(c.members, ';') << ',' << fixed(c.gender_entropy_pct, 2) << ','
       << fixed(c.age_entropy_pct, 2) << ',' << fixed(c.hw, 4) << ',' << to_string(c.pooling_mode) << '\n';
  os << "average,," << fixed(r.averages.gender_entropy_pct, 2) << ',' << fixed(r.averages.age_entropy_pct, 2) << ','
     << fixed(r.averages.mean_hw, 4) << ',' << (r.weighted ? "weighted" : "unweighted") << '\n';
}

inline void write_table(std::ostream& os, const BalanceReport& r) {
  using namespace fmt_detail;
  os << "method " << to_string(r.method);
  if (r.method == Method::easb)
    os << "  tau=" << r.params.tau << " beta=" << r.params.beta << " eps=" << r.params.eps;
  if (r.k) os << "  k=" << *r.k;
  os << '\n';
  std::size_t width = 8;
  for (const auto& c : r.per_cluster) width = std::max(width, join(c.members, ',').size() + 2);
  os << pad("cluster", 9) << pad("members", width) << pad("gender %", 10) << pad("age %", 10) << pad("hw", 8)
     << "pooling\n";
  for (const auto& c : r.per_cluster)
    os << pad(std::to_string(c.id), 9) << pad(join(c.members, ','), width) << pad(fixed(c.gender_entropy_pct, 2), 10)
       << pad(fixed(c.age_entropy_pct, 2), 10) << pad(fixed(c.hw, 4), 8) << to_string(c.pooling_mode) << '\n';
  os << pad(r.weighted ? "avg(w)" : "average", 9) << pad("", width) << pad(fixed(r.averages.gender_entropy_pct, 2), 10)
     << pad(fixed(r.averages.age_entropy_pct, 2), 10) << fixed(r.averages.mean_hw, 4) << '\n';
  if (r.any_averaged()) os << "note: entropy-only input; cluster entropies are member averages\n";
  if (!r.merge_log.empty()) {
    os << "merges\n";
    for (const auto& m : r.merge_log)
      os << "  " << m.step << ": {" << join(m.cluster_a, ',') << "} + {" << join(m.cluster_b, ',')
         << "}  score=" << fixed(m.score, 6) << '\n';
  }
}

// ---------------------------------------------------------------------------
// SVG

namespace svg_detail {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#9467bd", "#d62728", "#8c564b",
                                           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79"};
inline constexpr const char* kTransformedStroke = "#2ca02c";

}  // namespace svg_detail

/// Scatter of balance points, gender entropy (%) on x and age entropy (%)
/// on y, one marker element per site colored by cluster. For EASB
/// partitions, reflected sites are drawn at their transformed position with
/// a green outline and a dashed line back to the raw position.
inline std::string render_svg(const Partition& p, std::span<const SiteProfile> sites) {
  using svg_detail::escape;
  constexpr double W = 520, H = 520, L = 70, T = 30, S = 420;  // plot square S x S at (L, T)
  auto px = [&](double v) { return L + v * S; };
  auto py = [&](double v) { return T + (1.0 - v) * S; };
  auto num = [](double v) { return fmt_detail::fixed(v, 2); };

  std::map<std::string, int> cluster_of;
  for (const auto& c : p.clusters)
    for (const auto& m : c.members) cluster_of[m] = c.id;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n"
     << "  <rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
     << "  <rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << S << "\" height=\"" << S
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 100; t += 20) {
    const double v = t / 100.0;
    os << "  <line x1=\"" << num(px(v)) << "\" y1=\"" << T + S << "\" x2=\"" << num(px(v)) << "\" y2=\"" << T + S + 5
       << "\" stroke=\"black\"/>\n"
       << "  <text x=\"" << num(px(v)) << "\" y=\"" << T + S + 20 << "\" font-size=\"11\" text-anchor=\"middle\">" << t
       << "</text>\n"
       << "  <line x1=\"" << L - 5 << "\" y1=\"" << num(py(v)) << "\" x2=\"" << L << "\" y2=\"" << num(py(v))
       << "\" stroke=\"black\"/>\n"
       << "  <text x=\"" << L - 8 << "\" y=\"" << num(py(v) + 4) << "\" font-size=\"11\" text-anchor=\"end\">" << t
       << "</text>\n";
  }
  os << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
     << "\" stroke=\"#cccccc\" stroke-dasharray=\"4 4\"/>\n"
     << "  <text x=\"" << L + S / 2 << "\" y=\"" << H - 12 << "\" font-size=\"13\" text-anchor=\"middle\">"
     << "Gender entropy (%)</text>\n"
     << "  <text x=\"18\" y=\"" << T + S / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << T + S / 2 << ")\">Age entropy (%)</text>\n"
     << "  <text x=\"" << L + S / 2 << "\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">"
     << escape(std::string(to_string(p.method))) << " clustering</text>\n";

  for (const auto& s : sites) {
    BalancePoint pt = balance_point(s);
    const BalancePoint raw = pt;
    const bool frozen = std::find(p.frozen.begin(), p.frozen.end(), s.id) != p.frozen.end();
    if (p.method == Method::easb && !frozen) pt = canonicalize(pt);
    const int cid = cluster_of.count(s.id) ? cluster_of.at(s.id) : 0;
    const char* fill = svg_detail::kPalette[static_cast<std::size_t>(cid) % std::size(svg_detail::kPalette)];
    if (pt.transformed)
      os << "  <line class=\"transform\" x1=\"" << num(px(raw.x)) << "\" y1=\"" << num(py(raw.y)) << "\" x2=\""
         << num(px(pt.x)) << "\" y2=\"" << num(py(pt.y)) << "\" stroke=\"" << svg_detail::kTransformedStroke
         << "\" stroke-dasharray=\"3 3\"/>\n";
    os << "  <circle class=\"site\" data-site=\"" << escape(s.id) << "\" data-cluster=\"" << cid
       << "\" data-transformed=\"" << (pt.transformed ? "true" : "false") << "\" cx=\"" << num(px(pt.x)) << "\" cy=\""
       << num(py(pt.y)) << "\" r=\"7\" fill=\"" << fill << "\" stroke=\""
       << (pt.transformed ? svg_detail::kTransformedStroke : "black") << "\" stroke-width=\""
       << (pt.transformed ? 3 : 1) << "\"/>\n"
       << "  <text x=\"" << num(px(pt.x) + 9) << "\" y=\"" << num(py(pt.y) - 9) << "\" font-size=\"11\">"
       << escape(s.id) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace easb
