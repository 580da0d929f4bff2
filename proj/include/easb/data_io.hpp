#pragma once

// Site ingestion (records CSV, histogram JSON, entropy-profile JSON), the
// two built-in hospital scenarios, and seeded synthetic scenario generation.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "easb/entropy.hpp"
#include "easb/error.hpp"
#include "easb/log.hpp"
#include "easb/rng.hpp"
#include "json.hpp"

namespace easb {

using json = nlohmann::json;

inline constexpr int kDefaultAgeBins = 9;
inline constexpr int kAgeBinWidth = 10;
inline constexpr int kMaxAge = 130;

/// Decade bins [0,10), [10,20), ... with the last bin open-ended.
struct AgeBinning {
  int bins = kDefaultAgeBins;

  void validate() const {
    if (bins < 2) throw ValidationError("age_bins must be at least 2");
  }

  std::size_t bin_of(int age) const {
    return static_cast<std::size_t>(std::min(age / kAgeBinWidth, bins - 1));
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (int b = 0; b < bins; ++b) {
      const int lo = b * kAgeBinWidth;
      out.push_back("[" + std::to_string(lo) + "," +
                    (b + 1 == bins ? std::string("inf") : std::to_string(lo + kAgeBinWidth)) + ")");
    }
    return out;
  }
};

struct RecordSchema {
  std::vector<std::string> gender_classes{"M", "F"};
  AgeBinning age;
};

struct RecordRow {
  std::string record_id;
  std::string site_id;
  std::string gender;
  int age = 0;
  std::optional<std::string> label;

  friend bool operator==(const RecordRow&, const RecordRow&) = default;
};

struct IngestStats {
  std::size_t rows_read = 0;
  std::size_t rows_rejected = 0;
  std::size_t sites_dropped = 0;
};

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char l, char r) {
           return std::tolower(static_cast<unsigned char>(l)) == std::tolower(static_cast<unsigned char>(r));
         });
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits one CSV line, honouring double-quoted fields. nullopt on an
/// unterminated quote.
inline std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  if (quoted) return std::nullopt;
  return out;
}

}  // namespace detail

/// Reads a records CSV with header `record_id,site_id,gender,age,label`.
/// Malformed rows are skipped and counted.
inline std::vector<RecordRow> read_records_csv(std::istream& in, IngestStats* stats = nullptr) {
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("records CSV is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv(line);
  static const std::vector<std::string> expected{"record_id", "site_id", "gender", "age", "label"};
  if (!header || header->size() != expected.size() ||
      !std::equal(header->begin(), header->end(), expected.begin(),
                  [](const std::string& h, const std::string& e) { return detail::trim(h) == e; }))
    throw ValidationError("records CSV header must be record_id,site_id,gender,age,label");

  std::vector<RecordRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    ++st.rows_read;
    const auto fields = detail::split_csv(line);
    if (!fields || fields->size() != expected.size()) {
      ++st.rows_rejected;
      log::debug("records line ", line_no, ": wrong field count");
      continue;
    }
    RecordRow r;
    r.record_id = std::string(detail::trim((*fields)[0]));
    r.site_id = std::string(detail::trim((*fields)[1]));
    r.gender = std::string(detail::trim((*fields)[2]));
    const auto age_text = detail::trim((*fields)[3]);
    const auto* end = age_text.data() + age_text.size();
    auto [ptr, ec] = std::from_chars(age_text.data(), end, r.age);
    if (ec != std::errc{} || ptr != end || r.site_id.empty()) {
      ++st.rows_rejected;
      log::debug("records line ", line_no, ": bad age or site id");
      continue;
    }
    const auto label = detail::trim((*fields)[4]);
    if (!label.empty()) r.label = std::string(label);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Groups rows by site (first-appearance order) and tallies gender classes
/// and age bins. Rows with an unknown gender or an age outside [0,130) are
/// rejected and counted; sites left without rows are dropped.
inline std::vector<SiteProfile> ingest_records(std::span<const RecordRow> rows, const RecordSchema& schema = {},
                                               IngestStats* stats = nullptr) {
  schema.age.validate();
  if (schema.gender_classes.empty()) throw ValidationError("gender schema is empty");
  if (rows.empty()) throw ValidationError("no records to ingest");
  IngestStats local;
  IngestStats& st = stats ? *stats : local;

  struct Tally {
    std::vector<std::int64_t> gender;
    std::vector<std::int64_t> age;
    bool any = false;
  };
  std::vector<std::string> site_order;
  std::map<std::string, Tally> tallies;
  const std::size_t k_gender = schema.gender_classes.size();
  const auto k_age = static_cast<std::size_t>(schema.age.bins);

  std::size_t rejected = 0;
  for (const auto& r : rows) {
    auto [it, inserted] = tallies.try_emplace(r.site_id);
    if (inserted) {
      site_order.push_back(r.site_id);
      it->second.gender.assign(k_gender, 0);
      it->second.age.assign(k_age, 0);
    }
    const auto g = std::find_if(schema.gender_classes.begin(), schema.gender_classes.end(),
                                [&](const std::string& c) { return detail::iequals(c, r.gender); });
    if (g == schema.gender_classes.end() || r.age < 0 || r.age >= kMaxAge || r.site_id.empty()) {
      ++rejected;
      continue;
    }
    it->second.gender[static_cast<std::size_t>(g - schema.gender_classes.begin())] += 1;
    it->second.age[schema.age.bin_of(r.age)] += 1;
    it->second.any = true;
  }
  st.rows_rejected += rejected;
  if (rejected > 0) log::warn(rejected, " record(s) rejected (unknown gender label or age out of range)");

  std::vector<SiteProfile> sites;
  const auto age_labels = schema.age.labels();
  for (const auto& id : site_order) {
    const auto& t = tallies.at(id);
    if (!t.any) {
      ++st.sites_dropped;
      log::warn("site ", id, " has no valid records; dropped");
      continue;
    }
    sites.push_back(SiteProfile::from_distributions(
        id, CategoricalDistribution::from_counts(schema.gender_classes, t.gender),
        CategoricalDistribution::from_counts(age_labels, t.age)));
  }
  if (sites.empty()) throw ValidationError("no site has valid records");
  return sites;
}

namespace detail {

template <class F>
auto with_json_errors(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed document: ") + e.what());
  }
}

inline void check_unique_ids(std::span<const SiteProfile> sites) {
  std::vector<std::string> ids;
  for (const auto& s : sites) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) throw ValidationError("duplicate site id '" + *dup + "'");
}

inline const json& sites_array(const json& doc) {
  if (!doc.is_object() || !doc.contains("sites") || !doc.at("sites").is_array())
    throw ValidationError("document needs a \"sites\" array");
  if (doc.at("sites").empty()) throw ValidationError("document lists no sites");
  return doc.at("sites");
}

}  // namespace detail

/// Entropy-profile document: {"sites": [{"id", "gender_entropy_pct", "age_entropy_pct"}]},
/// percentages in [0,100].
inline std::vector<SiteProfile> ingest_profiles(const json& doc) {
  return detail::with_json_errors([&] {
    std::vector<SiteProfile> out;
    for (const auto& s : detail::sites_array(doc)) {
      const auto id = s.at("id").get<std::string>();
      const double g = s.at("gender_entropy_pct").get<double>();
      const double a = s.at("age_entropy_pct").get<double>();
      if (!(g >= 0.0 && g <= 100.0) || !(a >= 0.0 && a <= 100.0))
        throw ValidationError("site " + id + ": entropy percentage outside [0,100]");
      out.push_back(SiteProfile::from_entropies(id, g / 100.0, a / 100.0));
      validate(out.back());
    }
    detail::check_unique_ids(out);
    return out;
  });
}

inline json profile_document(std::span<const SiteProfile> sites) {
  json arr = json::array();
  for (const auto& s : sites)
    arr.push_back({{"id", s.id}, {"gender_entropy_pct", 100.0 * gender_entropy(s)},
                   {"age_entropy_pct", 100.0 * age_entropy(s)}});
  return {{"sites", arr}};
}

/// Histogram document:
/// {"schema": {"gender_classes": [...], "age_bins": N},
///  "sites": [{"id", "gender_counts": [...], "age_counts": [...]}]}
inline std::vector<SiteProfile> ingest_histograms(const json& doc) {
  return detail::with_json_errors([&] {
    const auto& schema = doc.at("schema");
    RecordSchema rs;
    rs.gender_classes = schema.at("gender_classes").get<std::vector<std::string>>();
    rs.age.bins = schema.at("age_bins").get<int>();
    rs.age.validate();
    if (rs.gender_classes.empty()) throw ValidationError("gender_classes is empty");
    const auto age_labels = rs.age.labels();
    std::vector<SiteProfile> out;
    for (const auto& s : detail::sites_array(doc)) {
      const auto id = s.at("id").get<std::string>();
      auto g = s.at("gender_counts").get<std::vector<std::int64_t>>();
      auto a = s.at("age_counts").get<std::vector<std::int64_t>>();
      if (g.size() != rs.gender_classes.size() || a.size() != age_labels.size())
        throw ValidationError("site " + id + ": count vector length does not match the schema");
      out.push_back(SiteProfile::from_distributions(id, CategoricalDistribution::from_counts(rs.gender_classes, g),
                                                    CategoricalDistribution::from_counts(age_labels, a)));
      validate(out.back());
    }
    detail::check_unique_ids(out);
    return out;
  });
}

/// Serializes raw-count sites. All sites must share gender classes and the
/// decade age binning.
inline json histogram_document(std::span<const SiteProfile> sites) {
  if (sites.empty()) throw ValidationError("no sites to serialize");
  for (const auto& s : sites)
    if (!s.has_raw() || !s.gender->has_counts() || !s.age->has_counts())
      throw ValidationError("site " + s.id + " has no raw counts");
  const auto& classes = sites.front().gender->classes();
  const AgeBinning binning{static_cast<int>(sites.front().age->size())};
  json arr = json::array();
  for (const auto& s : sites) {
    if (s.gender->classes() != classes || s.age->classes() != binning.labels())
      throw ValidationError("site " + s.id + " uses a different class schema");
    arr.push_back({{"id", s.id},
                   {"gender_counts", std::vector<std::int64_t>(s.gender->counts().begin(), s.gender->counts().end())},
                   {"age_counts", std::vector<std::int64_t>(s.age->counts().begin(), s.age->counts().end())}});
  }
  return {{"schema", {{"gender_classes", classes}, {"age_bins", binning.bins}}}, {"sites", arr}};
}

/// Dispatches on content: `.csv` files are records; JSON documents with a
/// "schema" are histograms, otherwise entropy profiles.
inline std::vector<SiteProfile> load_sites(const std::filesystem::path& path, int age_bins = kDefaultAgeBins,
                                           IngestStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input '" + path.string() + "'");
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".csv") {
    IngestStats local;
    IngestStats& st = stats ? *stats : local;
    const auto rows = read_records_csv(in, &st);
    if (st.rows_rejected > 0) log::warn(st.rows_rejected, " malformed CSV row(s) skipped");
    RecordSchema schema;
    schema.age.bins = age_bins;
    return ingest_records(rows, schema, &st);
  }
  const json doc = detail::with_json_errors([&] { return json::parse(in); });
  if (doc.is_object() && doc.contains("schema")) return ingest_histograms(doc);
  return ingest_profiles(doc);
}

// ---------------------------------------------------------------------------
// Built-in hospital scenarios (entropy profiles, fractions).

namespace detail {

inline std::vector<SiteProfile> from_pct(std::initializer_list<std::tuple<const char*, double, double>> rows) {
  std::vector<SiteProfile> out;
  for (const auto& [id, g, a] : rows) out.push_back(SiteProfile::from_entropies(id, g / 100.0, a / 100.0));
  return out;
}

}  // namespace detail

inline std::vector<SiteProfile> scenario1_profiles() {
  return detail::from_pct({{"H0", 38.52, 90.36}, {"H1", 29.74, 71.12}, {"H2", 69.39, 36.06}, {"H3", 65.20, 0.0},
                           {"H4", 99.86, 100.0}});
}

inline std::vector<SiteProfile> scenario2_profiles() {
  return detail::from_pct({{"H0", 69.22, 35.11}, {"H1", 68.37, 86.61}, {"H2", 43.87, 0.0}, {"H3", 41.26, 70.98},
                           {"H4", 85.91, 31.65}, {"H5", 87.00, 100.0}, {"H6", 99.86, 48.17}});
}

// ---------------------------------------------------------------------------
// Synthetic scenarios

enum class Archetype { balanced, gender_skewed, age_skewed, doubly_skewed };

inline std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::balanced: return "balanced";
    case Archetype::gender_skewed: return "gender_skewed";
    case Archetype::age_skewed: return "age_skewed";
    case Archetype::doubly_skewed: return "doubly_skewed";
  }
  return "";
}

struct ArchetypeMix {
  double balanced = 0.25;
  double gender_skewed = 0.25;
  double age_skewed = 0.25;
  double doubly_skewed = 0.25;

  std::array<double, 4> fractions() const { return {balanced, gender_skewed, age_skewed, doubly_skewed}; }

  void validate() const {
    double sum = 0.0;
    for (double f : fractions()) {
      if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("mix fractions must lie in [0,1]");
      sum += f;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) throw ValidationError("mix fractions must sum to 1");
  }

  friend bool operator==(const ArchetypeMix&, const ArchetypeMix&) = default;
};

/// Parses "b,g,a,d".
inline ArchetypeMix parse_mix(std::string_view text) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto field = detail::trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
      throw ValidationError("mix must be four comma-separated numbers");
    v.push_back(x);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (v.size() != 4) throw ValidationError("mix must be four comma-separated numbers");
  ArchetypeMix m{v[0], v[1], v[2], v[3]};
  m.validate();
  return m;
}

struct ScenarioSpec {
  std::size_t n_sites = 8;
  std::uint64_t seed = 1;
  int age_bins = kDefaultAgeBins;
  ArchetypeMix mix;
  std::uint64_t population_min = 200;
  std::uint64_t population_max = 1000;

  void validate() const {
    if (n_sites < 2) throw ValidationError("a scenario needs at least two sites");
    AgeBinning{age_bins}.validate();
    mix.validate();
    if (population_min < 1 || population_min > population_max)
      throw ValidationError("population range must be nonempty and positive");
  }
};

/// Dominant-class share of a skewed attribute and the relative jitter applied
/// to each class probability before renormalizing.
inline constexpr double kSkewShare = 0.95;
inline constexpr double kJitter = 0.10;

struct SyntheticSite {
  SiteProfile profile;
  Archetype archetype = Archetype::balanced;
  std::vector<double> gender_probs;  // the site's drawn generating distribution
  std::vector<double> age_probs;
};

namespace detail {

inline std::vector<double> archetype_probs(std::size_t k, bool skewed, Xoshiro256StarStar& rng) {
  std::vector<double> p(k, 1.0 / static_cast<double>(k));
  if (skewed) {
    const auto dominant = rng.uniform_int(0, k - 1);
    std::fill(p.begin(), p.end(), (1.0 - kSkewShare) / static_cast<double>(k - 1));
    p[dominant] = kSkewShare;
  }
  double sum = 0.0;
  for (auto& x : p) {
    x *= 1.0 + kJitter * (2.0 * rng.uniform01() - 1.0);
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return p;
}

inline std::size_t draw_class(std::span<const double> probs, Xoshiro256StarStar& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline std::string synthetic_id(std::size_t i, std::size_t n) {
  const auto width = std::to_string(n - 1).size();
  auto digits = std::to_string(i);
  return "S" + std::string(width - digits.size(), '0') + digits;
}

/// Walks the generator: per site, archetype, gender probs, age probs,
/// population, then one (gender, age bin) draw per record.
template <class OnRecord>
std::vector<SyntheticSite> generate(const ScenarioSpec& spec, OnRecord on_record) {
  spec.validate();
  auto rng = Xoshiro256StarStar::from_seed(spec.seed);
  const RecordSchema schema{{"M", "F"}, AgeBinning{spec.age_bins}};
  const auto age_labels = schema.age.labels();
  const auto mix = spec.mix.fractions();
  std::vector<SyntheticSite> out;
  for (std::size_t i = 0; i < spec.n_sites; ++i) {
    const double u = rng.uniform01();
    double acc = 0.0;
    std::size_t arch = 3;
    for (std::size_t a = 0; a < mix.size(); ++a) {
      acc += mix[a];
      if (u < acc) {
        arch = a;
        break;
      }
    }
    while (mix[arch] == 0.0 && arch > 0) --arch;  // rounding spill past the last nonzero share
    const auto archetype = static_cast<Archetype>(arch);
    const bool g_skew = archetype == Archetype::gender_skewed || archetype == Archetype::doubly_skewed;
    const bool a_skew = archetype == Archetype::age_skewed || archetype == Archetype::doubly_skewed;
    auto gp = archetype_probs(schema.gender_classes.size(), g_skew, rng);
    auto ap = archetype_probs(age_labels.size(), a_skew, rng);
    const auto population = rng.uniform_int(spec.population_min, spec.population_max);

    const auto id = synthetic_id(i, spec.n_sites);
    std::vector<std::int64_t> gc(gp.size(), 0), ac(ap.size(), 0);
    for (std::uint64_t r = 0; r < population; ++r) {
      const auto g = draw_class(gp, rng);
      const auto a = draw_class(ap, rng);
      ++gc[g];
      ++ac[a];
      on_record(id, r, schema.gender_classes[g], a);
    }
    out.push_back({SiteProfile::from_distributions(id, CategoricalDistribution::from_counts(schema.gender_classes, gc),
                                                   CategoricalDistribution::from_counts(age_labels, ac)),
                   archetype, std::move(gp), std::move(ap)});
  }
  return out;
}

}  // namespace detail

inline std::vector<SyntheticSite> generate_scenario_detailed(const ScenarioSpec& spec) {
  return detail::generate(spec, [](auto&&...) {});
}

/// Sites with raw counts; depends only on `spec`.
inline std::vector<SiteProfile> generate_scenario(const ScenarioSpec& spec) {
  std::vector<SiteProfile> out;
  for (auto& s : generate_scenario_detailed(spec)) out.push_back(std::move(s.profile));
  return out;
}

/// Per-patient rows for the same draws generate_scenario makes; ages sit
/// inside the drawn decade bin, so ingest_records reproduces the same counts.
inline std::vector<RecordRow> generate_records(const ScenarioSpec& spec) {
  std::vector<RecordRow> rows;
  detail::generate(spec, [&](const std::string& site, std::uint64_t r, const std::string& gender, std::size_t bin) {
    const int age = static_cast<int>(bin) * kAgeBinWidth + static_cast<int>(r % kAgeBinWidth);
    rows.push_back({site + "-" + std::to_string(r), site, gender, age, std::nullopt});
  });
  return rows;
}

}  // namespace easb
