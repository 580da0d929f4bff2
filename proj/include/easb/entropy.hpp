#pragma once

// Categorical entropy, per-site balance weights and the pairwise balance
// score that weights the entropy-aware similarity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "easb/error.hpp"

namespace easb {

inline constexpr double kProbSumTolerance = 1e-9;
inline constexpr double kDefaultEps = 1e-6;

enum class Attribute { gender, age };

inline std::string_view to_string(Attribute a) { return a == Attribute::gender ? "gender" : "age"; }

/// Nonnegative counts (or probabilities) over an ordered list of class labels.
/// Exactly one of counts/probs is populated.
class CategoricalDistribution {
 public:
  static CategoricalDistribution from_counts(std::vector<std::string> classes,
                                             std::vector<std::int64_t> counts) {
    if (classes.empty()) throw ValidationError("distribution needs at least one class");
    if (classes.size() != counts.size())
      throw ValidationError("class list and counts differ in length");
    bool any_positive = false;
    for (auto c : counts) {
      if (c < 0) throw ValidationError("negative class count");
      any_positive = any_positive || c > 0;
    }
    if (!any_positive) throw ValidationError("distribution has no positive count");
    CategoricalDistribution d;
    d.classes_ = std::move(classes);
    d.counts_ = std::move(counts);
    return d;
  }

  static CategoricalDistribution from_probs(std::vector<std::string> classes,
                                            std::vector<double> probs) {
    if (classes.empty()) throw ValidationError("distribution needs at least one class");
    if (classes.size() != probs.size())
      throw ValidationError("class list and probabilities differ in length");
    double sum = 0.0;
    for (auto p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("negative or non-finite probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance)
      throw ValidationError("probabilities do not sum to 1");
    CategoricalDistribution d;
    d.classes_ = std::move(classes);
    d.probs_ = std::move(probs);
    return d;
  }

  /// Labels "c0", "c1", ... for callers that only care about the shape.
  static std::vector<std::string> default_labels(std::size_t k) {
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back("c" + std::to_string(i));
    return out;
  }

  std::size_t size() const { return classes_.size(); }
  const std::vector<std::string>& classes() const { return classes_; }
  bool has_counts() const { return !counts_.empty(); }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::span<const double> probs() const { return probs_; }

  std::int64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

  std::vector<double> probabilities() const {
    if (!has_counts()) return probs_;
    const double n = static_cast<double>(total());
    std::vector<double> out;
    out.reserve(counts_.size());
    for (auto c : counts_) out.push_back(static_cast<double>(c) / n);
    return out;
  }

  friend bool operator==(const CategoricalDistribution&, const CategoricalDistribution&) = default;

 private:
  CategoricalDistribution() = default;

  std::vector<std::string> classes_;
  std::vector<std::int64_t> counts_;
  std::vector<double> probs_;
};

/// Shannon entropy divided by log2(K), in [0,1]. K == 1 yields 0.
/// Terms are summed in ascending probability order so the result does not
/// depend on class order, bit for bit.
inline double normalized_entropy(const CategoricalDistribution& dist) {
  const std::size_t k = dist.size();
  if (k < 2) return 0.0;
  std::vector<double> p = dist.probabilities();
  std::sort(p.begin(), p.end());
  double h = 0.0;
  for (double pk : p) {
    if (pk > 0.0) h -= pk * std::log2(pk);
  }
  return std::clamp(h / std::log2(static_cast<double>(k)), 0.0, 1.0);
}

/// A site's demographic description. For each attribute exactly one of the
/// raw distribution or the direct (fractional) entropy is present.
struct SiteProfile {
  std::string id;
  std::optional<CategoricalDistribution> gender;
  std::optional<CategoricalDistribution> age;
  std::optional<double> gender_entropy;
  std::optional<double> age_entropy;

  static SiteProfile from_entropies(std::string id, double gender_h, double age_h) {
    SiteProfile s;
    s.id = std::move(id);
    s.gender_entropy = gender_h;
    s.age_entropy = age_h;
    return s;
  }

  static SiteProfile from_distributions(std::string id, CategoricalDistribution g,
                                        CategoricalDistribution a) {
    SiteProfile s;
    s.id = std::move(id);
    s.gender = std::move(g);
    s.age = std::move(a);
    return s;
  }

  /// True when both attributes carry raw distributions.
  bool has_raw() const { return gender.has_value() && age.has_value(); }

  const std::optional<CategoricalDistribution>& distribution(Attribute a) const {
    return a == Attribute::gender ? gender : age;
  }

  friend bool operator==(const SiteProfile&, const SiteProfile&) = default;
};

inline void validate(const SiteProfile& site) {
  if (site.id.empty()) throw ValidationError("site id must be nonempty");
  auto check = [&](const std::optional<CategoricalDistribution>& d, const std::optional<double>& h,
                   std::string_view what) {
    if (d.has_value() == h.has_value())
      throw ValidationError("site " + site.id + ": exactly one of " + std::string(what) +
                            " distribution or " + std::string(what) + " entropy is required");
    if (h && !(*h >= 0.0 && *h <= 1.0))
      throw ValidationError("site " + site.id + ": " + std::string(what) + " entropy outside [0,1]");
  };
  check(site.gender, site.gender_entropy, "gender");
  check(site.age, site.age_entropy, "age");
}

inline double attribute_entropy(const SiteProfile& site, Attribute a) {
  const auto& dist = site.distribution(a);
  const auto& direct = a == Attribute::gender ? site.gender_entropy : site.age_entropy;
  if (dist && direct)
    throw ValidationError("site " + site.id + ": both distribution and entropy given for " +
                          std::string(to_string(a)));
  if (dist) return normalized_entropy(*dist);
  if (direct) {
    if (!(*direct >= 0.0 && *direct <= 1.0))
      throw ValidationError("site " + site.id + ": entropy outside [0,1]");
    return *direct;
  }
  throw ValidationError("site " + site.id + ": missing " + std::string(to_string(a)) + " attribute");
}

inline double gender_entropy(const SiteProfile& site) { return attribute_entropy(site, Attribute::gender); }
inline double age_entropy(const SiteProfile& site) { return attribute_entropy(site, Attribute::age); }

struct BalanceWeight {
  std::string site_id;
  double hw = 0.0;
};

/// Degree of balance of one site: product of its gender and age entropies.
inline BalanceWeight site_weight(const SiteProfile& site) {
  return {site.id, gender_entropy(site) * age_entropy(site)};
}

/// Balance of a prospective pair: mean weight p clamped to [eps, 1-eps], then
/// odds ratio, natural log and logistic, evaluated literally.
inline double pair_balance(double hw_i, double hw_j, double eps = kDefaultEps) {
  if (!(hw_i >= 0.0 && hw_i <= 1.0) || !(hw_j >= 0.0 && hw_j <= 1.0))
    throw ValidationError("pair_balance: weights must lie in [0,1]");
  if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("pair_balance: eps must lie in (0, 0.5)");
  const double p = std::clamp((hw_i + hw_j) / 2.0, eps, 1.0 - eps);
  const double odds = p / (1.0 - p);
  const double z = std::log(odds);
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace easb
