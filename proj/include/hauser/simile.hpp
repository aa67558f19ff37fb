#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hauser/lexicon.hpp"
#include "hauser/text.hpp"
#include "json.hpp"

namespace hauser {

enum class ComponentKind { topic, event, comparator, vehicle };

/// Half-open byte range [start, end) into the owning sentence text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
  bool operator==(const Span&) const = default;
};

struct SimileInstance {
  std::optional<Span> topic;
  std::optional<Span> event;
  Span comparator;
  Span vehicle;

  bool operator==(const SimileInstance&) const = default;
};

class invalid_simile : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SimileSentence {
  std::string text;
  std::vector<SimileInstance> instances;

  std::string_view slice(const Span& s) const {
    return std::string_view(text).substr(s.start, s.end - s.start);
  }

  /// Throws invalid_simile when any structural invariant is broken.
  void validate() const {
    if (instances.empty()) throw invalid_simile("simile has no instances");
    const auto check = [&](const Span& s, const char* what) {
      if (!(s.start < s.end && s.end <= text.size())) {
        throw invalid_simile(std::string(what) + " span out of range");
      }
    };
    std::size_t prev_comparator = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& inst = instances[i];
      check(inst.comparator, "comparator");
      check(inst.vehicle, "vehicle");
      if (inst.topic) check(*inst.topic, "topic");
      if (inst.event) check(*inst.event, "event");
      const auto cmp = to_lower(slice(inst.comparator));
      if (cmp != "like" && cmp != "as") {
        throw invalid_simile("comparator must be 'like' or 'as', got '" + cmp + "'");
      }
      if (inst.vehicle.start < inst.comparator.end) {
        throw invalid_simile("vehicle must start after its comparator");
      }
      if (i > 0 && inst.comparator.start < prev_comparator) {
        throw invalid_simile("instances must be ordered by comparator offset");
      }
      prev_comparator = inst.comparator.start;
      std::vector<Span> spans{inst.comparator, inst.vehicle};
      if (inst.topic) spans.push_back(*inst.topic);
      if (inst.event) spans.push_back(*inst.event);
      for (std::size_t a = 0; a < spans.size(); ++a) {
        for (std::size_t b = a + 1; b < spans.size(); ++b) {
          if (spans[a].overlaps(spans[b])) throw invalid_simile("component spans overlap");
        }
      }
    }
  }

  bool operator==(const SimileSentence&) const = default;
};

/// A simile with its comparator+vehicle segments removed.
struct LiteralSimilePair {
  std::string literal;
  SimileSentence simile;
  // Offsets into `literal` where each instance's segment was removed, in
  // instance order.
  std::vector<std::size_t> insertion_offsets;
};

struct CandidateSet {
  std::string set_id;
  std::string literal;
  std::vector<std::string> candidate_ids;
  std::vector<SimileSentence> candidates;
};

struct ExtractOptions {
  // Recognize "as ADJ as NP" in addition to "like NP".
  bool allow_as = false;
  const RuleTable* rules = nullptr;
};

namespace detail {

class Extractor {
 public:
  Extractor(std::string_view text, const RuleTable& rules)
      : text_(text), rules_(rules), toks_(tokenize(text)) {}

  std::optional<SimileSentence> run(bool allow_as) {
    SimileSentence out{std::string(text_), {}};
    std::size_t floor = 0;  // first token index the next instance may use
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      std::size_t cmp = npos;
      std::size_t scan_end = i;  // tokens before this index precede the comparator
      if (toks_[i].lower == "like" && like_is_comparator(i)) {
        cmp = i;
      } else if (allow_as && toks_[i].lower == "as" && i + 3 < toks_.size() &&
                 toks_[i + 1].is_word && !rules_.is_function_word(toks_[i + 1].lower) &&
                 toks_[i + 2].lower == "as" && toks_[i + 3].is_word) {
        cmp = i + 2;
      }
      if (cmp == npos) continue;
      auto veh = vehicle_tokens(cmp + 1);
      if (!veh) continue;
      SimileInstance inst;
      inst.comparator = {toks_[cmp].start, toks_[cmp].end};
      inst.vehicle = {toks_[veh->first].start, toks_[veh->second].end};
      if (auto ev = find_event(floor, scan_end)) {
        inst.event = Span{toks_[*ev].start, toks_[*ev].end};
        if (auto tp = find_topic(floor, *ev)) {
          inst.topic = Span{toks_[tp->first].start, toks_[tp->second].end};
        }
      }
      out.instances.push_back(inst);
      floor = veh->second + 1;
      i = veh->second;
    }
    if (out.instances.empty()) return std::nullopt;
    return out;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  static bool is_clause_punct(const Token& t) {
    return !t.is_word && (t.text == "," || t.text == "." || t.text == ";" || t.text == ":" ||
                          t.text == "!" || t.text == "?");
  }

  static bool is_ly_adverb(const std::string& w) {
    return w.size() > 4 && w.compare(w.size() - 2, 2, "ly") == 0;
  }

  bool is_adverb(const std::string& w) const {
    return rules_.adverbs.count(w) > 0 || is_ly_adverb(w);
  }

  static bool is_be_contraction(const std::string& w) {
    for (std::string_view suf : {"'s", "'re", "'m"}) {
      if (w.size() > suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0) {
        return true;
      }
    }
    return false;
  }

  bool is_pronoun_contraction(const std::string& w) const {
    if (!is_be_contraction(w)) return false;
    const auto base = w.substr(0, w.find('\''));
    return rules_.pronouns.count(base) > 0 || base == "that" || base == "there";
  }

  bool verb_like(const Token& t) const {
    if (!t.is_word) return false;
    const auto& w = t.lower;
    if (rules_.irregular.count(w) || rules_.verbs.count(w) || rules_.linking.count(w)) return true;
    if (is_pronoun_contraction(w)) return true;
    if (rules_.auxiliaries.count(w)) return true;
    if (rules_.is_function_word(w)) return false;
    if (w.size() > 4 && w.compare(w.size() - 2, 2, "ed") == 0) return true;
    const auto lemma = lemmatize_verb(w, rules_);
    return lemma != w && (rules_.verbs.count(lemma) || rules_.linking.count(lemma));
  }

  bool like_is_comparator(std::size_t i) const {
    if (i + 1 >= toks_.size() || !toks_[i + 1].is_word) return false;
    if (toks_[i + 1].lower == "to") return false;
    if (i > 0 && toks_[i - 1].is_word && rules_.like_verb_cues.count(toks_[i - 1].lower)) {
      return false;
    }
    return true;
  }

  // Finite-verb check inside a vehicle: a past-tense form following a
  // content word (not a determiner or adverb) starts a new predicate.
  bool ends_vehicle_as_verb(std::size_t j) const {
    const auto& w = toks_[j].lower;
    const auto& prev = toks_[j - 1].lower;
    if (rules_.determiners.count(prev) || is_adverb(prev)) return false;
    if (auto it = rules_.irregular.find(w); it != rules_.irregular.end()) {
      return it->first != it->second;
    }
    if (w.size() > 4 && w.compare(w.size() - 2, 2, "ed") == 0) {
      return rules_.verbs.count(lemmatize_verb(w, rules_)) > 0;
    }
    return false;
  }

  bool vehicle_terminator(std::size_t j, bool first) const {
    const auto& t = toks_[j];
    if (!t.is_word) return true;
    const auto& w = t.lower;
    if (w == "like" || w == "to") return true;
    if (rules_.subordinators.count(w) || rules_.coordinators.count(w) ||
        rules_.relatives.count(w) || rules_.auxiliaries.count(w)) {
      return true;
    }
    if (is_pronoun_contraction(w)) return true;
    if (first) return false;
    if (rules_.pronouns.count(w)) return true;
    if (rules_.prepositions.count(w) && !rules_.np_continuations.count(w)) {
      // "in" followed by a determiner continues the phrase ("a kid in a candy store").
      const bool det_follows = j + 1 < toks_.size() && rules_.determiners.count(toks_[j + 1].lower);
      return !(w == "in" && det_follows);
    }
    return ends_vehicle_as_verb(j);
  }

  std::optional<std::pair<std::size_t, std::size_t>> vehicle_tokens(std::size_t from) const {
    if (from >= toks_.size() || vehicle_terminator(from, true)) return std::nullopt;
    std::size_t last = from;
    for (std::size_t j = from + 1; j < toks_.size(); ++j) {
      if (vehicle_terminator(j, false)) break;
      last = j;
    }
    // A dangling preposition or determiner is not part of the phrase.
    while (last > from && (rules_.prepositions.count(toks_[last].lower) ||
                           rules_.determiners.count(toks_[last].lower))) {
      --last;
    }
    return std::make_pair(from, last);
  }

  std::optional<std::size_t> find_event(std::size_t floor, std::size_t before) const {
    for (std::size_t k = before; k > floor; --k) {
      const auto& t = toks_[k - 1];
      if (is_clause_punct(t)) return std::nullopt;
      if (!t.is_word) continue;
      // "the beam": a verb form after a determiner is a noun
      const bool after_det = k - 1 > floor && rules_.determiners.count(toks_[k - 2].lower) > 0;
      if (verb_like(t) && !rules_.auxiliaries.count(t.lower) && !after_det) return k - 1;
      if (rules_.auxiliaries.count(t.lower) && rules_.irregular.count(t.lower)) {
        // "is", "was", "had": a finite auxiliary directly before the
        // comparator acts as the main verb.
        return k - 1;
      }
      if (is_pronoun_contraction(t.lower)) return k - 1;
      if (rules_.subordinators.count(t.lower) || rules_.relatives.count(t.lower)) {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  std::optional<std::pair<std::size_t, std::size_t>> find_topic(std::size_t floor,
                                                                std::size_t event) const {
    if (is_pronoun_contraction(toks_[event].lower)) return std::nullopt;
    std::size_t k = event;
    // Skip auxiliaries, adverbs and coordinated verbs ("yelps and howls").
    while (k > floor) {
      const auto& t = toks_[k - 1];
      if (!t.is_word) break;
      if (rules_.auxiliaries.count(t.lower) || is_adverb(t.lower) || t.lower == "to") {
        --k;
        continue;
      }
      if (rules_.coordinators.count(t.lower) && k - 1 > floor && verb_like(toks_[k - 2])) {
        k -= 2;
        continue;
      }
      break;
    }
    if (k == floor) return std::nullopt;
    const auto& head = toks_[k - 1];
    if (!head.is_word) return std::nullopt;
    if (rules_.pronouns.count(head.lower)) return std::make_pair(k - 1, k - 1);
    if (rules_.is_function_word(head.lower)) return std::nullopt;
    std::size_t first = k - 1;
    constexpr std::size_t max_len = 6;
    while (first > floor && k - first < max_len) {
      const auto& t = toks_[first - 1];
      if (!t.is_word) break;
      if (rules_.determiners.count(t.lower)) {
        --first;
        break;
      }
      if (rules_.is_function_word(t.lower) || is_adverb(t.lower)) break;
      --first;
    }
    return std::make_pair(first, k - 1);
  }

  std::string_view text_;
  const RuleTable& rules_;
  std::vector<Token> toks_;
};

}  // namespace detail

/// Rule-based component extraction. Returns nullopt when no comparator with
/// a following noun phrase is found.
inline std::optional<SimileSentence> extract_components(std::string_view sentence,
                                                        const ExtractOptions& opts = {}) {
  const RuleTable& rules = opts.rules ? *opts.rules : RuleTable::defaults();
  return detail::Extractor(sentence, rules).run(opts.allow_as);
}

/// True iff the head (last) verb of the event phrase lemmatizes to a
/// linking verb.
inline bool is_linking_verb_event(std::string_view event_text,
                                  const RuleTable& rules = RuleTable::defaults()) {
  const auto words = whitespace_tokens(event_text);
  if (words.empty()) return false;
  auto head = to_lower(words.back());
  if (auto apos = head.find('\''); apos != std::string::npos && apos > 0) {
    const auto suffix = head.substr(apos);
    if (suffix == "'s" || suffix == "'re" || suffix == "'m") return rules.linking.count("be") > 0;
  }
  return rules.linking.count(lemmatize_verb(head, rules)) > 0;
}

enum class RejectReason { linking_verb };

struct Rejected {
  RejectReason reason;
  std::size_t instance;  // index of the offending instance
};

using LiteralResult = std::variant<LiteralSimilePair, Rejected>;

/// Removes every comparator+vehicle segment, re-joining with single spaces
/// and no space before punctuation. Rejects similes whose event is a linking
/// verb.
inline LiteralResult make_literal(const SimileSentence& simile,
                                  const RuleTable& rules = RuleTable::defaults()) {
  simile.validate();
  for (std::size_t i = 0; i < simile.instances.size(); ++i) {
    const auto& ev = simile.instances[i].event;
    if (ev && is_linking_verb_event(simile.slice(*ev), rules)) {
      return Rejected{RejectReason::linking_verb, i};
    }
  }
  LiteralSimilePair pair;
  pair.simile = simile;
  std::string out;
  const auto append = [&out](std::string_view piece) {
    const auto part = collapse_whitespace(piece);
    if (part.empty()) return;
    const bool attach = detail::is_ascii_punct(static_cast<unsigned char>(part.front())) &&
                        part.front() != '(' && part.front() != '"';
    if (!out.empty() && !attach) out.push_back(' ');
    out += part;
  };
  std::size_t cursor = 0;
  const std::string_view text(simile.text);
  for (const auto& inst : simile.instances) {
    append(text.substr(cursor, inst.comparator.start - cursor));
    pair.insertion_offsets.push_back(out.size());
    cursor = inst.vehicle.end;
  }
  append(text.substr(cursor));
  pair.literal = std::move(out);
  return pair;
}

/// Splices each instance's comparator+vehicle text back into the literal.
inline std::string reinsert_segments(const LiteralSimilePair& pair) {
  std::string out = pair.literal;
  const auto& s = pair.simile;
  for (std::size_t i = pair.insertion_offsets.size(); i-- > 0;) {
    const auto& inst = s.instances[i];
    std::string seg(std::string_view(s.text).substr(inst.comparator.start,
                                                    inst.vehicle.end - inst.comparator.start));
    const std::size_t at = pair.insertion_offsets[i];
    if (at > 0) seg.insert(seg.begin(), ' ');
    if (at < out.size() && out[at] != ' ' &&
        !detail::is_ascii_punct(static_cast<unsigned char>(out[at]))) {
      seg.push_back(' ');
    }
    out.insert(at, seg);
  }
  return collapse_whitespace(out);
}

// ---------------------------------------------------------------------------
// JSON-lines simile corpus format:
// {"text": str, "instances": [{"topic": [s,e]|null, "event": [s,e]|null,
//                              "comparator": [s,e], "vehicle": [s,e]}]}

inline nlohmann::json span_to_json(const std::optional<Span>& s) {
  if (!s) return nullptr;
  return nlohmann::json::array({s->start, s->end});
}

inline std::optional<Span> span_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned()) {
    throw invalid_simile("span must be [start, end] with non-negative integers");
  }
  return Span{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

inline nlohmann::json to_json(const SimileSentence& s) {
  nlohmann::json inst = nlohmann::json::array();
  for (const auto& i : s.instances) {
    inst.push_back({{"topic", span_to_json(i.topic)},
                    {"event", span_to_json(i.event)},
                    {"comparator", span_to_json(i.comparator)},
                    {"vehicle", span_to_json(i.vehicle)}});
  }
  return {{"text", s.text}, {"instances", inst}};
}

/// Parses and validates one corpus record. Throws invalid_simile or
/// nlohmann::json::exception on malformed input.
inline SimileSentence simile_from_json(const nlohmann::json& j) {
  SimileSentence s;
  s.text = j.at("text").get<std::string>();
  for (const auto& ij : j.at("instances")) {
    SimileInstance inst;
    inst.topic = ij.contains("topic") ? span_from_json(ij["topic"]) : std::nullopt;
    inst.event = ij.contains("event") ? span_from_json(ij["event"]) : std::nullopt;
    auto cmp = span_from_json(ij.at("comparator"));
    auto veh = span_from_json(ij.at("vehicle"));
    if (!cmp || !veh) throw invalid_simile("comparator and vehicle are required");
    inst.comparator = *cmp;
    inst.vehicle = *veh;
    s.instances.push_back(inst);
  }
  s.validate();
  return s;
}

inline nlohmann::json to_json(const LiteralSimilePair& p) {
  return {{"literal", p.literal},
          {"simile", to_json(p.simile)},
          {"insertion_offsets", p.insertion_offsets}};
}

}  // namespace hauser
