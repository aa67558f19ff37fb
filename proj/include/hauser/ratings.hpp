#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hauser/stats.hpp"
#include "hauser/text.hpp"

namespace hauser {

enum class Perspective { quality, creativity, informativeness };

inline const char* to_string(Perspective p) {
  switch (p) {
    case Perspective::quality: return "quality";
    case Perspective::creativity: return "creativity";
    case Perspective::informativeness: return "informativeness";
  }
  return "?";
}

inline Perspective perspective_from_string(std::string_view s) {
  const auto l = to_lower(trim(s));
  if (l == "quality") return Perspective::quality;
  if (l == "creativity") return Perspective::creativity;
  if (l == "informativeness") return Perspective::informativeness;
  throw std::invalid_argument("unknown perspective '" + std::string(s) + "'");
}

using CandidateKey = std::pair<std::string, std::string>;  // (set_id, candidate_id)

struct RatingEntry {
  std::string set_id;
  std::string candidate_id;
  std::string rater_id;
  Perspective perspective = Perspective::quality;
  int score = 3;
  bool lacks_context = false;

  CandidateKey key() const { return {set_id, candidate_id}; }
};

class ratings_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RatingsDataset {
  std::vector<RatingEntry> entries;

  void validate() const {
    std::set<std::tuple<std::string, std::string, std::string, int>> seen;
    for (const auto& e : entries) {
      if (e.score < 1 || e.score > 5) throw ratings_error("score out of range 1..5 for " + e.set_id + "/" + e.candidate_id);
      if (!seen.emplace(e.set_id, e.candidate_id, e.rater_id, static_cast<int>(e.perspective)).second) {
        throw ratings_error("duplicate rating for " + e.set_id + "/" + e.candidate_id + " by " + e.rater_id);
      }
    }
  }

  /// Mean human score per candidate for one perspective.
  std::map<CandidateKey, double> consensus(Perspective p) const {
    std::map<CandidateKey, std::pair<double, int>> acc;
    for (const auto& e : entries) {
      if (e.perspective != p) continue;
      auto& a = acc[e.key()];
      a.first += e.score;
      ++a.second;
    }
    std::map<CandidateKey, double> out;
    for (const auto& [k, a] : acc) out[k] = a.first / a.second;
    return out;
  }

  std::set<std::string> raters(Perspective p) const {
    std::set<std::string> r;
    for (const auto& e : entries) {
      if (e.perspective == p) r.insert(e.rater_id);
    }
    return r;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline bool parse_bool(std::string_view s) {
  const auto l = to_lower(trim(s));
  if (l == "1" || l == "true" || l == "yes" || l == "y") return true;
  if (l == "0" || l == "false" || l == "no" || l == "n" || l.empty()) return false;
  throw ratings_error("not a boolean: '" + std::string(s) + "'");
}

}  // namespace detail

/// Reads "set_id,candidate_id,rater_id,perspective,score,lacks_context" CSV
/// with a header row.
inline RatingsDataset read_ratings_csv(std::istream& in) {
  RatingsDataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto f = detail::split_csv_line(line);
    if (header) {
      header = false;
      const std::vector<std::string> expect{"set_id", "candidate_id", "rater_id", "perspective", "score", "lacks_context"};
      for (auto& x : f) x = std::string(trim(x));
      if (f != expect) throw ratings_error("ratings CSV header must be: set_id,candidate_id,rater_id,perspective,score,lacks_context");
      continue;
    }
    if (f.size() != 6) throw ratings_error("line " + std::to_string(lineno) + ": expected 6 fields");
    RatingEntry e;
    e.set_id = std::string(trim(f[0]));
    e.candidate_id = std::string(trim(f[1]));
    e.rater_id = std::string(trim(f[2]));
    try {
      e.perspective = perspective_from_string(f[3]);
      const auto s = std::string(trim(f[4]));
      std::size_t used = 0;
      e.score = std::stoi(s, &used);
      if (used != s.size()) throw ratings_error("bad score");
      e.lacks_context = detail::parse_bool(f[5]);
    } catch (const std::exception& ex) {
      throw ratings_error("line " + std::to_string(lineno) + ": " + ex.what());
    }
    ds.entries.push_back(std::move(e));
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------

struct AgreementSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  std::size_t defined = 0;  // raters whose held-out correlation was defined
};

struct AgreementResult {
  AgreementSummary pearson;
  AgreementSummary spearman;
  std::vector<std::string> excluded_raters;  // undefined held-out correlation
  std::size_t items = 0;
  std::size_t raters = 0;
};

/// Held-out inter-rater agreement: each rater's scores correlated against the
/// mean of all other raters, summarized as mean and max over raters.
inline AgreementResult inter_rater_agreement(const RatingsDataset& ratings, Perspective p) {
  std::map<std::string, std::map<CandidateKey, double>> by_rater;
  std::set<CandidateKey> items;
  for (const auto& e : ratings.entries) {
    if (e.perspective != p) continue;
    by_rater[e.rater_id][e.key()] = e.score;
    items.insert(e.key());
  }
  if (by_rater.size() < 2) throw ratings_error("agreement needs at least two raters");
  for (const auto& [r, scores] : by_rater) {
    if (scores.size() != items.size()) throw ratings_error("rater " + r + " does not cover every item");
  }
  AgreementResult res;
  res.items = items.size();
  res.raters = by_rater.size();
  std::vector<double> pear;
  std::vector<double> spear;
  for (const auto& [held, scores] : by_rater) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& item : items) {
      x.push_back(scores.at(item));
      double sum = 0.0;
      for (const auto& [other, os] : by_rater) {
        if (other != held) sum += os.at(item);
      }
      y.push_back(sum / static_cast<double>(by_rater.size() - 1));
    }
    try {
      const auto pc = pearson(x, y);
      const auto sc = spearman(x, y);
      pear.push_back(pc.coefficient);
      spear.push_back(sc.coefficient);
    } catch (const undefined_correlation&) {
      res.excluded_raters.push_back(held);
    }
  }
  const auto summarize = [](const std::vector<double>& v) {
    AgreementSummary s;
    s.defined = v.size();
    if (v.empty()) return s;
    double sum = 0.0;
    for (double c : v) sum += c;
    s.mean = sum / static_cast<double>(v.size());
    s.max = *std::max_element(v.begin(), v.end());
    return s;
  };
  res.pearson = summarize(pear);
  res.spearman = summarize(spear);
  return res;
}

// ---------------------------------------------------------------------------

struct Removal {
  CandidateKey candidate;
  std::string reason;  // "lacks_context" or "divided_quality"
};

struct FilterResult {
  RatingsDataset kept;
  std::vector<Removal> removed;
  std::set<CandidateKey> kept_candidates;
  std::vector<std::string> ranking_sets;          // sets with >= 3 kept candidates
  std::vector<std::string> dropped_ranking_sets;  // sets left with fewer
};

inline constexpr std::size_t kMinRankingCandidates = 3;

/// Drops candidates flagged as lacking context by any rater, and those whose
/// quality ratings contain both a low (1-2) and a high (4-5) score. `sets`
/// lists the candidates of each set; when empty it is derived from the
/// ratings.
inline FilterResult filter_dataset(const RatingsDataset& ratings,
                                   std::map<std::string, std::vector<std::string>> sets = {}) {
  if (sets.empty()) {
    for (const auto& e : ratings.entries) {
      auto& v = sets[e.set_id];
      if (std::find(v.begin(), v.end(), e.candidate_id) == v.end()) v.push_back(e.candidate_id);
    }
  }
  std::set<CandidateKey> context;
  std::map<CandidateKey, std::pair<bool, bool>> low_high;
  for (const auto& e : ratings.entries) {
    if (e.lacks_context) context.insert(e.key());
    if (e.perspective == Perspective::quality) {
      auto& lh = low_high[e.key()];
      if (e.score <= 2) lh.first = true;
      if (e.score >= 4) lh.second = true;
    }
  }
  FilterResult res;
  std::set<CandidateKey> removed;
  for (const auto& [set_id, cands] : sets) {
    std::size_t kept = 0;
    for (const auto& c : cands) {
      const CandidateKey k{set_id, c};
      if (context.count(k)) {
        res.removed.push_back({k, "lacks_context"});
        removed.insert(k);
      } else if (auto it = low_high.find(k); it != low_high.end() && it->second.first && it->second.second) {
        res.removed.push_back({k, "divided_quality"});
        removed.insert(k);
      } else {
        res.kept_candidates.insert(k);
        ++kept;
      }
    }
    (kept >= kMinRankingCandidates ? res.ranking_sets : res.dropped_ranking_sets).push_back(set_id);
  }
  for (const auto& e : ratings.entries) {
    if (!removed.count(e.key())) res.kept.entries.push_back(e);
  }
  return res;
}

}  // namespace hauser
