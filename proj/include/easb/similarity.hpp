#pragma once

// Angle, distance and entropy-aware similarity over 2D balance points
// (x = gender entropy, y = age entropy).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "easb/entropy.hpp"
#include "easb/error.hpp"
#include "easb/log.hpp"

namespace easb {

struct BalancePoint {
  std::string site_id;
  double x = 0.0;
  double y = 0.0;
  bool transformed = false;

  friend bool operator==(const BalancePoint&, const BalancePoint&) = default;
};

inline BalancePoint balance_point(const SiteProfile& site) {
  return {site.id, gender_entropy(site), age_entropy(site), false};
}

enum class Method { cosine, euclidean, easb };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::cosine: return "cosine";
    case Method::euclidean: return "euclidean";
    case Method::easb: return "easb";
  }
  return "";
}

inline Method parse_method(std::string_view text) {
  if (text == "cosine") return Method::cosine;
  if (text == "euclidean") return Method::euclidean;
  if (text == "easb") return Method::easb;
  throw ValidationError("unknown method '" + std::string(text) + "'");
}

/// Cosine value plus a flag set when either point has zero magnitude, in
/// which case the value is the fallback 0.
struct CosineScore {
  double value = 0.0;
  bool zero_magnitude = false;
};

inline CosineScore cosine_score(const BalancePoint& a, const BalancePoint& b) {
  const double na = std::hypot(a.x, a.y);
  const double nb = std::hypot(b.x, b.y);
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  const double dot = a.x * b.x + a.y * b.y;
  return {std::clamp(dot / (na * nb), -1.0, 1.0), false};
}

inline double cosine_similarity(const BalancePoint& a, const BalancePoint& b) {
  return cosine_score(a, b).value;
}

inline double euclidean_distance(const BalancePoint& a, const BalancePoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Reflect across the diagonal when x > y; points already in x <= y pass through.
inline BalancePoint canonicalize(BalancePoint p) {
  if (p.x > p.y) {
    std::swap(p.x, p.y);
    p.transformed = true;
  }
  return p;
}

inline std::vector<BalancePoint> symmetric_transform(std::span<const BalancePoint> points) {
  std::vector<BalancePoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(canonicalize(p));
  return out;
}

/// cosine * pair weight / (1 + distance). Callers pass transformed points.
inline double easb_similarity(const BalancePoint& a, const BalancePoint& b, double hw_ab) {
  if (!(hw_ab >= 0.0 && hw_ab <= 1.0)) throw ValidationError("easb_similarity: pair weight outside [0,1]");
  return cosine_similarity(a, b) * hw_ab / (1.0 + euclidean_distance(a, b));
}

struct SimilarityMatrix {
  std::vector<std::string> site_ids;
  Method method = Method::cosine;
  std::vector<double> scores;  // row-major, size() x size()
  std::size_t zero_magnitude_pairs = 0;

  std::size_t size() const { return site_ids.size(); }
  double at(std::size_t i, std::size_t j) const { return scores[i * size() + j]; }
};

/// Pairwise scores in input order. The EASB method first canonicalizes the
/// points and weights each pair with pair_balance of the site weights.
inline SimilarityMatrix similarity_matrix(std::span<const SiteProfile> sites, Method method,
                                          double eps = kDefaultEps) {
  if (sites.size() < 2) throw ValidationError("similarity_matrix needs at least two sites");
  const std::size_t n = sites.size();
  std::vector<BalancePoint> pts;
  std::vector<double> hw;
  pts.reserve(n);
  for (const auto& s : sites) {
    pts.push_back(balance_point(s));
    hw.push_back(pts.back().x * pts.back().y);
  }
  if (method == Method::easb) pts = symmetric_transform(pts);

  SimilarityMatrix m;
  m.method = method;
  m.scores.assign(n * n, 0.0);
  for (const auto& s : sites) m.site_ids.push_back(s.id);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double v = 0.0;
      switch (method) {
        case Method::euclidean:
          v = euclidean_distance(pts[i], pts[j]);
          break;
        case Method::cosine:
        case Method::easb: {
          const auto c = cosine_score(pts[i], pts[j]);
          if (c.zero_magnitude) ++m.zero_magnitude_pairs;
          v = method == Method::easb ? easb_similarity(pts[i], pts[j], pair_balance(hw[i], hw[j], eps))
                                     : c.value;
          break;
        }
      }
      m.scores[i * n + j] = v;
      m.scores[j * n + i] = v;
    }
  }
  if (m.zero_magnitude_pairs > 0)
    log::warn(m.zero_magnitude_pairs, " site pair(s) involve a zero-magnitude balance point; cosine fell back to 0");
  return m;
}

}  // namespace easb
