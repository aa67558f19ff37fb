#pragma once

#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hauser/text.hpp"
#include "json.hpp"

namespace hauser {

struct NliDistribution {
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;

  bool valid(double tol = 1e-6) const {
    for (double p : {entailment, neutral, contradiction}) {
      if (!(p >= 0.0 && p <= 1.0)) return false;
    }
    return std::abs(entailment + neutral + contradiction - 1.0) <= tol;
  }
  bool operator==(const NliDistribution&) const = default;
};

struct SentimentDistribution {
  double positive = 0.5;
  double negative = 0.5;

  bool valid(double tol = 1e-6) const {
    for (double p : {positive, negative}) {
      if (!(p >= 0.0 && p <= 1.0)) return false;
    }
    return std::abs(positive + negative - 1.0) <= tol;
  }
  bool operator==(const SentimentDistribution&) const = default;
};

struct ModelIds {
  std::string nli_model;
  std::string sentiment_model;
};

class gateway_error : public std::runtime_error {
 public:
  enum class Kind { precondition, timeout, transport, malformed_response, server };

  gateway_error(Kind kind, const std::string& what, int status = 0)
      : std::runtime_error(what), kind_(kind), status_(status) {}

  Kind kind() const { return kind_; }
  int status() const { return status_; }

 private:
  Kind kind_;
  int status_;
};

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual NliDistribution nli(const std::string& premise, const std::string& hypothesis) = 0;
  virtual SentimentDistribution sentiment(const std::string& text) = 0;
  virtual ModelIds model_ids() = 0;
};

// ---------------------------------------------------------------------------
// Stub backend. Deterministic lexical rules, for offline runs and tests:
//
// nli(premise, hypothesis), over lowercased word sets P and H:
//   1. some word in H is a listed antonym of some word in P
//        -> entailment 0.1, neutral 0.1, contradiction 0.8
//   2. P is a subset of H or H is a subset of P
//        -> entailment 0.9, neutral 0.1, contradiction 0.0
//   3. otherwise, with j = |P & H| / |P | H|
//        -> entailment 0.6 j, contradiction 0.3 (1 - j), neutral the rest
//
// sentiment(text): p, n = hits in the positive / negative lexicons;
//   positive = (p + 1) / (p + n + 2), negative = 1 - positive.

struct StubLexicon {
  std::unordered_set<std::string> positive;
  std::unordered_set<std::string> negative;
  std::vector<std::pair<std::string, std::string>> antonyms;

  static const StubLexicon& defaults();
};

namespace detail {

inline void add_lexicon_words(std::unordered_set<std::string>& set, std::string_view words) {
  std::size_t i = 0;
  while (i < words.size()) {
    while (i < words.size() && words[i] == ' ') ++i;
    std::size_t j = i;
    while (j < words.size() && words[j] != ' ') ++j;
    if (j > i) set.emplace(words.substr(i, j - i));
    i = j;
  }
}

inline StubLexicon make_default_lexicon() {
  StubLexicon lx;
  add_lexicon_words(lx.positive,
                    "good great happy joy joyful love lovely beautiful bright warm gentle calm "
                    "peaceful sweet kind brave bold strong graceful elegant easy precisely "
                    "delight delighted glad cheerful smile smiling laugh laughing shine shining "
                    "glow glowing gleam gleamed glitter sparkle sparkling diamond diamonds "
                    "angel dancer ballerina flower rose roses sun sunshine light hope proud "
                    "free soft pure fresh wonderful brilliant clear gold golden treasure "
                    "controlled triumph victory glory thunderous");
  add_lexicon_words(lx.negative,
                    "bad sad angry anger fear afraid scared frightened terrible horrible awful "
                    "cruel cold dark darkness pain painful hurt cry crying tears weep broken "
                    "dead death die dying ugly evil hell monster destruction shadow storm "
                    "wounded sick poison drug fiend coward cowards cowardly rag deflated "
                    "collapsed lonely empty hate hated violent rage grim bleak dull heavy "
                    "stone lead sink sank drown earthquake vitriol predator volcano boiling");
  lx.antonyms = {{"slow", "fast"},     {"slowly", "quickly"}, {"calm", "angry"},
                 {"easy", "hard"},     {"easy", "difficult"}, {"quiet", "loud"},
                 {"gentle", "violent"}, {"light", "heavy"},    {"hot", "cold"},
                 {"happy", "sad"},     {"controlled", "wild"}, {"precisely", "clumsily"},
                 {"rise", "sink"},     {"up", "down"},        {"bright", "dark"},
                 {"alive", "dead"},    {"young", "old"},      {"soft", "hard"}};
  return lx;
}

inline std::vector<std::string> lexical_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) {
    if (t.is_word) out.push_back(std::move(t.lower));
  }
  return out;
}

}  // namespace detail

inline const StubLexicon& StubLexicon::defaults() {
  static const StubLexicon lx = detail::make_default_lexicon();
  return lx;
}

class StubBackend final : public ClassifierBackend {
 public:
  explicit StubBackend(StubLexicon lexicon = StubLexicon::defaults()) : lx_(std::move(lexicon)) {}

  NliDistribution nli(const std::string& premise, const std::string& hypothesis) override {
    if (trim(premise).empty() || trim(hypothesis).empty()) {
      throw gateway_error(gateway_error::Kind::precondition, "nli: empty premise or hypothesis");
    }
    const auto pw = detail::lexical_words(premise);
    const auto hw = detail::lexical_words(hypothesis);
    const std::unordered_set<std::string> P(pw.begin(), pw.end());
    const std::unordered_set<std::string> H(hw.begin(), hw.end());
    for (const auto& [a, b] : lx_.antonyms) {
      if ((P.count(a) && H.count(b)) || (P.count(b) && H.count(a))) {
        return {0.1, 0.1, 0.8};
      }
    }
    std::size_t common = 0;
    for (const auto& w : P) common += H.count(w);
    if (common == P.size() || common == H.size()) return {0.9, 0.1, 0.0};
    const double j = static_cast<double>(common) / static_cast<double>(P.size() + H.size() - common);
    const double e = 0.6 * j;
    const double c = 0.3 * (1.0 - j);
    return {e, 1.0 - e - c, c};
  }

  SentimentDistribution sentiment(const std::string& text) override {
    if (trim(text).empty()) {
      throw gateway_error(gateway_error::Kind::precondition, "sentiment: empty text");
    }
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& w : detail::lexical_words(text)) {
      pos += lx_.positive.count(w);
      neg += lx_.negative.count(w);
    }
    const double p = static_cast<double>(pos + 1) / static_cast<double>(pos + neg + 2);
    return {p, 1.0 - p};
  }

  ModelIds model_ids() override { return {"stub-nli-v1", "stub-sentiment-v1"}; }

 private:
  StubLexicon lx_;
};

// ---------------------------------------------------------------------------

struct BackendConfig {
  enum class Kind { remote, stub };
  Kind kind = Kind::stub;
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  int timeout_ms = 10000;
  int max_in_flight = 4;
  std::size_t cache_capacity = 4096;

  void validate() const {
    if (timeout_ms <= 0) throw std::invalid_argument("backend timeout must be positive");
    if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be at least 1");
    if (kind == Kind::remote && endpoint.empty()) {
      throw std::invalid_argument("remote backend requires an endpoint URL");
    }
  }
};

namespace detail {

/// Counting gate bounding concurrent remote requests.
class InFlightGate {
 public:
  explicit InFlightGate(int limit) : free_(limit) {}

  class Slot {
   public:
    explicit Slot(InFlightGate& g) : g_(g) { g_.acquire(); }
    ~Slot() { g_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightGate& g_;
  };

 private:
  void acquire() {
    std::unique_lock lock(m_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
  }
  void release() {
    {
      std::lock_guard lock(m_);
      ++free_;
    }
    cv_.notify_one();
  }

  std::mutex m_;
  std::condition_variable cv_;
  int free_;
};

}  // namespace detail

/// HTTP client for the classifier wire protocol:
///   POST /v1/nli       {"premise","hypothesis"} -> {"entailment","neutral","contradiction"}
///   POST /v1/sentiment {"text"}                 -> {"positive","negative"}
///   GET  /v1/health                             -> {"status","nli_model","sentiment_model"}
class RemoteBackend final : public ClassifierBackend {
 public:
  explicit RemoteBackend(BackendConfig cfg);
  ~RemoteBackend() override;

  NliDistribution nli(const std::string& premise, const std::string& hypothesis) override;
  SentimentDistribution sentiment(const std::string& text) override;
  ModelIds model_ids() override;

 private:
  nlohmann::json call(const std::string& method, const std::string& path, const nlohmann::json* body);

  BackendConfig cfg_;
  detail::InFlightGate gate_;
};

/// Shared front door: validates inputs, caches responses by exact request
/// bytes. Cached entries are evicted oldest-inserted first; lookups take a
/// shared lock, inserts an exclusive one.
class Gateway {
 public:
  explicit Gateway(std::unique_ptr<ClassifierBackend> backend, std::size_t cache_capacity = 4096)
      : backend_(std::move(backend)), capacity_(cache_capacity) {}

  NliDistribution nli(const std::string& premise, const std::string& hypothesis) {
    if (trim(premise).empty() || trim(hypothesis).empty()) {
      throw gateway_error(gateway_error::Kind::precondition, "nli: empty premise or hypothesis");
    }
    std::string key;
    key.reserve(premise.size() + hypothesis.size() + 16);
    key += "nli:";
    key += std::to_string(premise.size());
    key += ':';
    key += premise;
    key += hypothesis;
    if (auto hit = lookup(key)) return hit->nli;
    const auto d = backend_->nli(premise, hypothesis);
    if (!d.valid()) {
      throw gateway_error(gateway_error::Kind::malformed_response, "nli: invalid distribution");
    }
    insert(std::move(key), Entry{d, {}});
    return d;
  }

  SentimentDistribution sentiment(const std::string& text) {
    if (trim(text).empty()) {
      throw gateway_error(gateway_error::Kind::precondition, "sentiment: empty text");
    }
    std::string key = "sen:" + text;
    if (auto hit = lookup(key)) return hit->sentiment;
    const auto d = backend_->sentiment(text);
    if (!d.valid()) {
      throw gateway_error(gateway_error::Kind::malformed_response, "sentiment: invalid distribution");
    }
    insert(std::move(key), Entry{{}, d});
    return d;
  }

  /// Backend model identities, fetched once.
  ModelIds model_ids() {
    std::lock_guard lock(ids_mutex_);
    if (!ids_) ids_ = backend_->model_ids();
    return *ids_;
  }

  std::size_t cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

 private:
  struct Entry {
    NliDistribution nli;
    SentimentDistribution sentiment;
  };

  std::optional<Entry> lookup(const std::string& key) const {
    if (capacity_ == 0) return std::nullopt;
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) return std::nullopt;
    return it->second;
  }

  void insert(std::string key, Entry e) {
    if (capacity_ == 0) return;
    std::unique_lock lock(mutex_);
    if (cache_.count(key)) return;
    while (cache_.size() >= capacity_) {
      cache_.erase(order_.front());
      order_.pop_front();
    }
    order_.push_back(key);
    cache_.emplace(std::move(key), e);
  }

  std::unique_ptr<ClassifierBackend> backend_;
  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Entry> cache_;
  std::deque<std::string> order_;
  std::mutex ids_mutex_;
  std::optional<ModelIds> ids_;
};

inline std::unique_ptr<ClassifierBackend> make_backend(const BackendConfig& cfg) {
  cfg.validate();
  if (cfg.kind == BackendConfig::Kind::stub) return std::make_unique<StubBackend>();
  return std::make_unique<RemoteBackend>(cfg);
}

}  // namespace hauser

#include "hauser/detail/remote_backend.hpp"
