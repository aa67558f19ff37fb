#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hauser/classifier.hpp"
#include "hauser/reference_index.hpp"
#include "hauser/simile.hpp"
#include "json.hpp"

namespace hauser {

enum class RelevanceMode { kb, approx };

inline const char* to_string(RelevanceMode m) { return m == RelevanceMode::kb ? "kb" : "approx"; }

inline RelevanceMode relevance_mode_from_string(const std::string& s) {
  if (s == "kb") return RelevanceMode::kb;
  if (s == "approx") return RelevanceMode::approx;
  throw std::invalid_argument("unknown relevance mode '" + s + "' (expected kb or approx)");
}

struct RawScores {
  double relevance = 0.0;        // r >= 0
  double logical = 0.0;          // c_l in [0, 1]
  double sentiment = 0.0;        // c_s in [-1, 1]
  double creativity = 0.0;       // C <= 0
  double informativeness = 0.0;  // I >= 1
};

struct NormalizedScores {
  double relevance = 0.5;
  double logical = 0.5;
  double sentiment = 0.5;
};

/// Non-negative weights for relevance, logical and sentiment consistency,
/// rescaled to sum to one on construction.
class QualityWeights {
 public:
  QualityWeights() : QualityWeights(3.0, 2.0, 1.0) {}
  QualityWeights(double alpha, double beta, double gamma) {
    for (double w : {alpha, beta, gamma}) {
      if (!(std::isfinite(w) && w >= 0.0)) throw std::invalid_argument("weights must be finite and >= 0");
    }
    const double sum = alpha + beta + gamma;
    if (!(sum > 0.0)) throw std::invalid_argument("at least one weight must be positive");
    alpha_ = alpha / sum;
    beta_ = beta / sum;
    gamma_ = gamma / sum;
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

 private:
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double gamma_ = 0.0;
};

/// Mean reference support of the simile's (topic, vehicle) pairs. Instances
/// without a topic are left out of both the sum and the pair count; with no
/// pairs at all the score is 0.
inline double relevance(const ReferenceIndex& index, const SimileSentence& simile, RelevanceMode mode) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& inst : simile.instances) {
    if (!inst.topic) continue;
    const auto topic = simile.slice(*inst.topic);
    const auto vehicle = simile.slice(inst.vehicle);
    if (normalize_phrase(topic).empty()) continue;
    sum += mode == RelevanceMode::kb ? index.pair_weighted_mass(topic, vehicle)
                                     : static_cast<double>(index.pair_frequency(topic, vehicle));
    ++pairs;
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

inline std::size_t topic_vehicle_pairs(const SimileSentence& simile) {
  return static_cast<std::size_t>(std::count_if(simile.instances.begin(), simile.instances.end(), [&](const auto& i) {
    return i.topic && !normalize_phrase(simile.slice(*i.topic)).empty();
  }));
}

/// 1 - P(contradiction) with the literal as premise and the simile as
/// hypothesis.
inline double logical_consistency(Gateway& gateway, const std::string& literal, const std::string& simile) {
  return 1.0 - gateway.nli(literal, simile).contradiction;
}

struct SentimentConsistency {
  double value = 0.0;
  bool degraded = false;  // literal prefix fell back to the full literal
  std::string simile_prefix;
  std::string literal_prefix;
};

/// Text of `literal` up to the end of the simile's first event, or nullopt
/// when it cannot be located.
inline std::optional<std::string> literal_event_prefix(const std::string& literal, const SimileSentence& simile) {
  if (simile.instances.empty() || !simile.instances.front().event) return std::nullopt;
  const auto& ev = *simile.instances.front().event;
  const auto prefix = collapse_whitespace(std::string_view(simile.text).substr(0, ev.end));
  const auto lit = collapse_whitespace(literal);
  if (lit.compare(0, prefix.size(), prefix) == 0) return prefix;
  const auto event_word = to_lower(simile.slice(ev));
  for (const auto& t : tokenize(literal)) {
    if (t.is_word && t.lower == event_word) return literal.substr(0, t.end);
  }
  return std::nullopt;
}

/// P(simile prefix has polarity a) - P(literal prefix has polarity a), where a
/// is the polarity predicted for the literal prefix (positive on a tie). The
/// simile prefix ends at its first vehicle, the literal prefix at the first
/// event.
inline SentimentConsistency sentiment_consistency(Gateway& gateway, const std::string& literal,
                                                  const SimileSentence& simile) {
  if (simile.instances.empty()) throw invalid_simile("sentiment consistency needs a vehicle");
  SentimentConsistency out;
  out.simile_prefix = simile.text.substr(0, simile.instances.front().vehicle.end);
  if (auto p = literal_event_prefix(literal, simile)) {
    out.literal_prefix = *p;
  } else {
    out.literal_prefix = literal;
    out.degraded = true;
  }
  const auto lit = gateway.sentiment(out.literal_prefix);
  const auto sim = gateway.sentiment(out.simile_prefix);
  const bool positive = lit.positive >= lit.negative;
  out.value = positive ? sim.positive - lit.positive : sim.negative - lit.negative;
  return out;
}

inline SentimentConsistency sentiment_consistency(Gateway& gateway, const LiteralSimilePair& pair) {
  return sentiment_consistency(gateway, pair.literal, pair.simile);
}

/// (v - min) / (max - min); every value becomes 0.5 when all are equal.
inline std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("minmax_normalize: empty input");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("minmax_normalize: non-finite value");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  std::vector<double> out(values.size(), 0.5);
  if (*hi == *lo) return out;
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

inline double quality(const NormalizedScores& n, const QualityWeights& w) {
  return w.alpha() * n.relevance + w.beta() * n.logical + w.gamma() * n.sentiment;
}

/// -ln(mean N_v + 1), or -mean N_v when apply_log is false.
inline double creativity(const ReferenceIndex& index, const SimileSentence& simile, bool apply_log = true) {
  if (simile.instances.empty()) throw invalid_simile("creativity: simile has no vehicles");
  double sum = 0.0;
  for (const auto& inst : simile.instances) {
    sum += static_cast<double>(index.vehicle_frequency(simile.slice(inst.vehicle)));
  }
  const double mean = sum / static_cast<double>(simile.instances.size());
  const double c = apply_log ? -std::log(mean + 1.0) : -mean;
  return c == 0.0 ? 0.0 : c;  // no negative zero for unseen vehicles
}

/// Mean whitespace-token length of the raw vehicle spans.
inline double informativeness(const SimileSentence& simile) {
  if (simile.instances.empty()) throw invalid_simile("informativeness: simile has no vehicles");
  double sum = 0.0;
  for (const auto& inst : simile.instances) {
    sum += static_cast<double>(whitespace_tokens(simile.slice(inst.vehicle)).size());
  }
  return sum / static_cast<double>(simile.instances.size());
}

// ---------------------------------------------------------------------------

struct ScoringOptions {
  QualityWeights weights;
  RelevanceMode mode = RelevanceMode::kb;
  bool creativity_log = true;
  ExtractOptions extract;
};

struct CandidateInput {
  std::string id;
  std::string text;
  std::optional<SimileSentence> simile;  // pre-annotated; extracted otherwise
};

/// One line of the candidate-set input file:
/// {"set_id", "literal", "candidates": [{"id", "text", "instances"?}], "reference"?}
struct SetInput {
  std::string set_id;
  std::string literal;
  std::vector<CandidateInput> candidates;
  std::optional<std::string> reference;
};

struct CandidateScore {
  std::string id;
  bool valid = false;
  RawScores raw;
  NormalizedScores normalized;
  double quality = 0.0;
  std::vector<std::string> flags;
};

struct ScoreReport {
  std::string set_id;
  std::vector<CandidateScore> candidates;
  QualityWeights weights;
  RelevanceMode mode = RelevanceMode::kb;
  ModelIds models;

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count_if(candidates.begin(), candidates.end(), [](const auto& c) { return c.valid; }));
  }
};

/// Scores every candidate, then min-max normalizes relevance and both
/// consistencies over the valid candidates of the set. Creativity and
/// informativeness stay raw. Candidates whose components cannot be extracted
/// are kept in the report, flagged and marked invalid. Gateway errors
/// propagate.
inline ScoreReport score_set(const ReferenceIndex& index, Gateway& gateway, const SetInput& set,
                             const ScoringOptions& opts) {
  ScoreReport rep;
  rep.set_id = set.set_id;
  rep.weights = opts.weights;
  rep.mode = opts.mode;
  rep.models = gateway.model_ids();
  std::vector<std::size_t> valid;
  for (const auto& cand : set.candidates) {
    CandidateScore cs;
    cs.id = cand.id;
    std::optional<SimileSentence> simile = cand.simile;
    if (!simile) simile = extract_components(cand.text, opts.extract);
    if (!simile) {
      cs.flags.push_back("invalid:no_simile_components");
      rep.candidates.push_back(std::move(cs));
      continue;
    }
    try {
      simile->validate();
    } catch (const invalid_simile& e) {
      cs.flags.push_back(std::string("invalid:") + e.what());
      rep.candidates.push_back(std::move(cs));
      continue;
    }
    cs.valid = true;
    cs.raw.relevance = relevance(index, *simile, opts.mode);
    if (topic_vehicle_pairs(*simile) == 0) cs.flags.push_back("no_topic");
    cs.raw.logical = logical_consistency(gateway, set.literal, simile->text);
    const auto sc = sentiment_consistency(gateway, set.literal, *simile);
    cs.raw.sentiment = sc.value;
    if (sc.degraded) cs.flags.push_back("sentiment_degraded");
    cs.raw.creativity = creativity(index, *simile, opts.creativity_log);
    cs.raw.informativeness = informativeness(*simile);
    valid.push_back(rep.candidates.size());
    rep.candidates.push_back(std::move(cs));
  }
  if (!valid.empty()) {
    std::vector<double> r;
    std::vector<double> cl;
    std::vector<double> cs;
    for (auto i : valid) {
      r.push_back(rep.candidates[i].raw.relevance);
      cl.push_back(rep.candidates[i].raw.logical);
      cs.push_back(rep.candidates[i].raw.sentiment);
    }
    const auto rn = minmax_normalize(r);
    const auto cln = minmax_normalize(cl);
    const auto csn = minmax_normalize(cs);
    for (std::size_t k = 0; k < valid.size(); ++k) {
      auto& c = rep.candidates[valid[k]];
      c.normalized = {rn[k], cln[k], csn[k]};
      c.quality = quality(c.normalized, opts.weights);
    }
  }
  return rep;
}

/// Scores an already-extracted candidate set.
inline ScoreReport score_candidate_set(const ReferenceIndex& index, Gateway& gateway, const CandidateSet& set,
                                       const ScoringOptions& opts) {
  if (set.candidates.empty()) throw std::invalid_argument("candidate set is empty");
  if (set.candidate_ids.size() != set.candidates.size()) {
    throw std::invalid_argument("candidate ids and candidates differ in length");
  }
  SetInput in{set.set_id, set.literal, {}, std::nullopt};
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    in.candidates.push_back({set.candidate_ids[i], set.candidates[i].text, set.candidates[i]});
  }
  return score_set(index, gateway, in, opts);
}

// ---------------------------------------------------------------------------

struct RerankRatio {
  double quality = 2.0;
  double creativity = 2.0;
  double informativeness = 1.0;
};

namespace detail {

// Competition ranks (1 = best, ties share the smaller rank), higher is better.
inline std::vector<std::size_t> descending_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> r(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] > v[i]) ++r[i];
    }
  }
  return r;
}

}  // namespace detail

/// Orders valid candidates by wq*rank(Q) + wc*rank(C) + wi*rank(I),
/// ascending; ties go to higher Q, then input order.
inline std::vector<std::string> combined_rerank(const ScoreReport& report, const RerankRatio& ratio = {}) {
  std::vector<const CandidateScore*> valid;
  for (const auto& c : report.candidates) {
    if (c.valid) valid.push_back(&c);
  }
  if (valid.size() < 2) throw std::invalid_argument("rerank needs at least two valid candidates");
  std::vector<double> q;
  std::vector<double> cr;
  std::vector<double> inf;
  for (const auto* c : valid) {
    q.push_back(c->quality);
    cr.push_back(c->raw.creativity);
    inf.push_back(c->raw.informativeness);
  }
  const auto rq = detail::descending_ranks(q);
  const auto rc = detail::descending_ranks(cr);
  const auto ri = detail::descending_ranks(inf);
  std::vector<double> key(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    key[i] = ratio.quality * static_cast<double>(rq[i]) + ratio.creativity * static_cast<double>(rc[i]) +
             ratio.informativeness * static_cast<double>(ri[i]);
  }
  std::vector<std::size_t> order(valid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return q[a] > q[b];
  });
  std::vector<std::string> ids;
  for (auto i : order) ids.push_back(valid[i]->id);
  return ids;
}

// ---------------------------------------------------------------------------
// Report serialization: one JSON object per candidate,
// {"set_id","candidate_id","r","c_l","c_s","r_n","c_l_n","c_s_n","Q","C","I","flags"}.
// Invalid candidates carry null scores.

inline std::vector<nlohmann::ordered_json> report_rows(const ScoreReport& rep) {
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& c : rep.candidates) {
    nlohmann::ordered_json j;
    j["set_id"] = rep.set_id;
    j["candidate_id"] = c.id;
    if (c.valid) {
      j["r"] = c.raw.relevance;
      j["c_l"] = c.raw.logical;
      j["c_s"] = c.raw.sentiment;
      j["r_n"] = c.normalized.relevance;
      j["c_l_n"] = c.normalized.logical;
      j["c_s_n"] = c.normalized.sentiment;
      j["Q"] = c.quality;
      j["C"] = c.raw.creativity;
      j["I"] = c.raw.informativeness;
    } else {
      for (const char* k : {"r", "c_l", "c_s", "r_n", "c_l_n", "c_s_n", "Q", "C", "I"}) j[k] = nullptr;
    }
    j["flags"] = c.flags;
    rows.push_back(std::move(j));
  }
  return rows;
}

/// Reassembles reports from JSON-lines rows, grouped by set_id in order of
/// first appearance.
inline std::vector<ScoreReport> reports_from_rows(const std::vector<nlohmann::json>& rows) {
  std::vector<ScoreReport> out;
  std::map<std::string, std::size_t> where;
  auto num = [](const nlohmann::json& j, const char* k) {
    if (!j.contains(k) || !j[k].is_number()) throw std::invalid_argument(std::string("report row lacks numeric '") + k + "'");
    return j[k].get<double>();
  };
  for (const auto& j : rows) {
    const auto set_id = j.at("set_id").get<std::string>();
    auto [it, inserted] = where.emplace(set_id, out.size());
    if (inserted) {
      out.emplace_back();
      out.back().set_id = set_id;
    }
    CandidateScore c;
    c.id = j.at("candidate_id").get<std::string>();
    if (j.contains("flags")) c.flags = j["flags"].get<std::vector<std::string>>();
    c.valid = j.contains("Q") && !j["Q"].is_null();
    if (c.valid) {
      c.raw = {num(j, "r"), num(j, "c_l"), num(j, "c_s"), num(j, "C"), num(j, "I")};
      c.normalized = {num(j, "r_n"), num(j, "c_l_n"), num(j, "c_s_n")};
      c.quality = num(j, "Q");
    }
    out[it->second].candidates.push_back(std::move(c));
  }
  return out;
}

inline SetInput set_input_from_json(const nlohmann::json& j) {
  SetInput s;
  s.set_id = j.at("set_id").get<std::string>();
  s.literal = j.at("literal").get<std::string>();
  if (j.contains("reference") && j["reference"].is_string()) s.reference = j["reference"].get<std::string>();
  for (const auto& cj : j.at("candidates")) {
    CandidateInput c;
    c.id = cj.at("id").get<std::string>();
    c.text = cj.at("text").get<std::string>();
    if (cj.contains("instances")) c.simile = simile_from_json({{"text", c.text}, {"instances", cj["instances"]}});
    s.candidates.push_back(std::move(c));
  }
  return s;
}

}  // namespace hauser
