#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hauser/scoring.hpp"

using namespace hauser;

namespace {

SimileSentence parse(const std::string& text) {
  auto s = extract_components(text);
  EXPECT_TRUE(s) << text;
  return *s;
}

// Backend returning fixed distributions, for consistency-metric arithmetic.
class FixedBackend : public ClassifierBackend {
 public:
  NliDistribution nli_value{1.0, 0.0, 0.0};
  std::map<std::string, double> positive;  // by exact text, default 0.5

  NliDistribution nli(const std::string&, const std::string&) override { return nli_value; }
  SentimentDistribution sentiment(const std::string& t) override {
    const double p = positive.count(t) ? positive.at(t) : 0.5;
    return {p, 1.0 - p};
  }
  ModelIds model_ids() override { return {"fixed", "fixed"}; }
};

Gateway fixed_gateway(FixedBackend** out) {
  auto b = std::make_unique<FixedBackend>();
  *out = b.get();
  return Gateway(std::move(b), 0);
}

}  // namespace

TEST(Normalize, Examples) {
  EXPECT_EQ(minmax_normalize(std::vector<double>{1, 2, 3}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(minmax_normalize(std::vector<double>{5, 5, 5}), (std::vector<double>{0.5, 0.5, 0.5}));
  EXPECT_EQ(minmax_normalize(std::vector<double>{0.2}), (std::vector<double>{0.5}));
  EXPECT_THROW(minmax_normalize(std::vector<double>{1, NAN}), std::invalid_argument);
  EXPECT_THROW(minmax_normalize(std::vector<double>{INFINITY}), std::invalid_argument);
  EXPECT_THROW(minmax_normalize(std::vector<double>{}), std::invalid_argument);
}

TEST(Normalize, ScaleInvarianceAndOrder) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 50);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(5);
    for (auto& x : v) x = u(rng);
    const auto a = minmax_normalize(v);
    std::vector<double> doubled;
    std::vector<double> cubed;
    for (double x : v) {
      doubled.push_back(2 * x);
      cubed.push_back(x * x * x + 7);
    }
    const auto b = minmax_normalize(doubled);
    const auto c = minmax_normalize(cubed);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-12);
      EXPECT_TRUE(*std::min_element(a.begin(), a.end()) == 0.0 && *std::max_element(a.begin(), a.end()) == 1.0);
      for (std::size_t j = 0; j < v.size(); ++j) EXPECT_EQ(a[i] < a[j], c[i] < c[j]);
    }
  }
}

TEST(Quality, Examples) {
  const QualityWeights w;
  EXPECT_DOUBLE_EQ(w.alpha(), 3.0 / 6.0);
  EXPECT_DOUBLE_EQ(w.beta(), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(w.gamma(), 1.0 / 6.0);
  EXPECT_NEAR(quality({1, 1, 1}, w), 1.0, 1e-12);
  EXPECT_EQ(quality({0, 0, 0}, w), 0.0);
  EXPECT_DOUBLE_EQ(quality({0.7, 0.2, 0.9}, QualityWeights(1, 0, 0)), 0.7);
  const QualityWeights scaled(30, 20, 10);
  EXPECT_DOUBLE_EQ(scaled.alpha(), w.alpha());
  EXPECT_THROW(QualityWeights(-1, 1, 1), std::invalid_argument);
  EXPECT_THROW(QualityWeights(0, 0, 0), std::invalid_argument);
}

TEST(Quality, BoundedAndMonotone) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const QualityWeights w(u(rng), u(rng), u(rng) + 1e-3);
    NormalizedScores n{u(rng), u(rng), u(rng)};
    const double q = quality(n, w);
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, 1.0 + 1e-15);
    n.logical = std::min(1.0, n.logical + 0.1);
    EXPECT_GE(quality(n, w), q);
  }
}

TEST(Relevance, ApproxAndKb) {
  const auto s = parse("He yelps and howls like a wolf.");
  std::vector<SimileSentence> corpus(3, s);
  const auto corpus_idx = build_from_corpus(corpus);
  EXPECT_DOUBLE_EQ(relevance(corpus_idx, s, RelevanceMode::approx), 3.0);

  const auto kb = build_from_kb({{"he", "wild", "wolf", 4, 0.5}, {"he", "loud", "wolf", 2, 1.0}});
  EXPECT_DOUBLE_EQ(relevance(kb, s, RelevanceMode::kb), 4.0);
}

TEST(Relevance, AveragesOverPairs) {
  const auto two = parse("If she escapes like a scared rabbit, I will fly like a bird to catch her.");
  std::vector<SimileSentence> corpus;
  for (int i = 0; i < 3; ++i) corpus.push_back(parse("And she ran like a scared rabbit."));
  corpus.push_back(parse("I soared like a bird."));
  const auto idx = build_from_corpus(corpus);
  EXPECT_EQ(idx.pair_frequency("she", "scared rabbit"), 3u);
  EXPECT_EQ(idx.pair_frequency("i", "bird"), 1u);
  EXPECT_DOUBLE_EQ(relevance(idx, two, RelevanceMode::approx), 2.0);
}

TEST(Relevance, MissingTopicExcluded) {
  auto s = parse("He yelps and howls like a wolf.");
  s.instances[0].topic.reset();
  const auto idx = build_from_corpus(std::vector<SimileSentence>{parse("He yelps and howls like a wolf.")});
  EXPECT_EQ(relevance(idx, s, RelevanceMode::approx), 0.0);
  EXPECT_EQ(topic_vehicle_pairs(s), 0u);
}

TEST(Relevance, CorpusDuplicationDoubles) {
  std::vector<SimileSentence> corpus{parse("He yelps and howls like a wolf."), parse("He ran like a wolf."),
                                     parse("The sea roared like a lion.")};
  const auto once = build_from_corpus(corpus);
  auto twice_corpus = corpus;
  twice_corpus.insert(twice_corpus.end(), corpus.begin(), corpus.end());
  const auto twice = build_from_corpus(twice_corpus);
  for (const char* t : {"He howled like a wolf.", "The sea roared like a lion.", "The cat sat like a stone."}) {
    const auto s = parse(t);
    EXPECT_DOUBLE_EQ(relevance(twice, s, RelevanceMode::approx), 2 * relevance(once, s, RelevanceMode::approx));
  }
}

TEST(LogicalConsistency, Endpoints) {
  FixedBackend* b = nullptr;
  auto gw = fixed_gateway(&b);
  b->nli_value = {1, 0, 0};
  EXPECT_EQ(logical_consistency(gw, "a", "b"), 1.0);
  b->nli_value = {0, 0, 1};
  EXPECT_EQ(logical_consistency(gw, "a", "b"), 0.0);

  Gateway stub(std::make_unique<StubBackend>());
  EXPECT_EQ(logical_consistency(stub, "The idea resounded.", "The idea resounded like a thunderclap."), 1.0);
}

TEST(SentimentConsistency, ArithmeticAndPrefixes) {
  FixedBackend* b = nullptr;
  auto gw = fixed_gateway(&b);
  const auto s = parse("If she escapes like a scared rabbit, I will fly like a bird to catch her.");
  const std::string literal = "If she escapes, I will fly to catch her.";
  auto r = sentiment_consistency(gw, literal, s);
  EXPECT_EQ(r.simile_prefix, "If she escapes like a scared rabbit");
  EXPECT_EQ(r.literal_prefix, "If she escapes");
  EXPECT_FALSE(r.degraded);
  EXPECT_EQ(r.value, 0.0);

  b->positive["If she escapes"] = 0.6;
  b->positive["If she escapes like a scared rabbit"] = 0.9;
  r = sentiment_consistency(gw, literal, s);
  EXPECT_NEAR(r.value, 0.3, 1e-12);

  // literal leaning negative: a = negative
  b->positive["If she escapes"] = 0.2;
  b->positive["If she escapes like a scared rabbit"] = 0.1;
  EXPECT_NEAR(sentiment_consistency(gw, literal, s).value, 0.9 - 0.8, 1e-12);
}

TEST(SentimentConsistency, DegradesWithoutEvent) {
  FixedBackend* b = nullptr;
  auto gw = fixed_gateway(&b);
  auto s = parse("He yelps and howls like a wolf.");
  s.instances[0].event.reset();
  const auto r = sentiment_consistency(gw, "He yelps and howls.", s);
  EXPECT_TRUE(r.degraded);
  EXPECT_EQ(r.literal_prefix, "He yelps and howls.");
}

TEST(Creativity, Examples) {
  const auto s = parse("He yelps and howls like a wolf.");
  EXPECT_EQ(creativity(ReferenceIndex(), s), 0.0);
  EXPECT_FALSE(std::signbit(creativity(ReferenceIndex(), s)));
  std::vector<SimileSentence> corpus(3, parse("She ran like a wolf."));
  const auto idx = build_from_corpus(corpus);
  EXPECT_NEAR(creativity(idx, s), -std::log(4.0), 1e-12);
  EXPECT_NEAR(creativity(idx, s, false), -3.0, 1e-12);

  const auto kb = build_from_kb({{"x", "p", "scared rabbit", 2, 1}, {"x", "p", "bird", 4, 1}});
  const auto two = parse("If she escapes like a scared rabbit, I will fly like a bird to catch her.");
  EXPECT_NEAR(creativity(kb, two), -std::log(4.0), 1e-12);
}

TEST(Creativity, AntiMonotone) {
  const auto s = parse("He yelps and howls like a wolf.");
  double prev_log = 1;
  double prev_raw = 1;
  for (std::uint64_t n = 1; n < 50; ++n) {
    const auto idx = build_from_kb({{"t", "p", "wolf", n, 1.0}});
    const double c = creativity(idx, s);
    const double raw = creativity(idx, s, false);
    EXPECT_LT(c, prev_log);
    EXPECT_LT(raw, prev_raw);
    EXPECT_LE(c, 0.0);
    prev_log = c;
    prev_raw = raw;
  }
}

TEST(Informativeness, Examples) {
  EXPECT_EQ(informativeness(parse("Her eyes glowed like the eyes of an angry cat.")), 6.0);
  EXPECT_EQ(informativeness(parse("He yelps and howls like wolves.")), 1.0);
  const auto two = parse("The brook ran like a stream, and the gems fell like a stream of diamonds.");
  ASSERT_EQ(two.instances.size(), 2u);
  EXPECT_EQ(informativeness(two), 3.0);
  EXPECT_THROW(informativeness(SimileSentence{"x", {}}), invalid_simile);
  EXPECT_THROW(creativity(ReferenceIndex(), SimileSentence{"x", {}}), invalid_simile);
}

TEST(ScoreSet, SingleAndIdenticalCandidates) {
  Gateway gw(std::make_unique<StubBackend>());
  const auto idx = build_from_kb({{"he", "wild", "wolf", 4, 0.5}});
  SetInput one{"s1", "He yelps and howls.", {{"c1", "He yelps and howls like a wolf.", std::nullopt}}, std::nullopt};
  for (const auto& w : {QualityWeights(), QualityWeights(1, 0, 0), QualityWeights(0.2, 0.5, 0.3)}) {
    ScoringOptions o;
    o.weights = w;
    const auto rep = score_set(idx, gw, one, o);
    EXPECT_NEAR(rep.candidates[0].quality, 0.5, 1e-12);
  }
  SetInput same{"s2", "He yelps and howls.", {}, std::nullopt};
  for (int i = 0; i < 4; ++i) same.candidates.push_back({"c" + std::to_string(i), "He yelps and howls like a wolf.", {}});
  const auto rep = score_set(idx, gw, same, {});
  for (const auto& c : rep.candidates) EXPECT_NEAR(c.quality, 0.5, 1e-12);
}

TEST(ScoreSet, InvalidCandidatesExcludedFromNormalization) {
  Gateway gw(std::make_unique<StubBackend>());
  const auto idx = build_from_kb({{"he", "wild", "wolf", 4, 0.5}, {"he", "p", "storm", 1, 1.0}});
  SetInput set{"s", "He yelps and howls.",
               {{"a", "He yelps and howls like a wolf.", {}},
                {"bad", "He yelps and howls loudly.", {}},
                {"b", "He yelps and howls like a storm.", {}}},
               std::nullopt};
  const auto rep = score_set(idx, gw, set, {});
  ASSERT_EQ(rep.candidates.size(), 3u);
  EXPECT_FALSE(rep.candidates[1].valid);
  EXPECT_EQ(rep.candidates[1].flags.front().rfind("invalid:", 0), 0u);
  EXPECT_EQ(rep.valid_count(), 2u);
  EXPECT_EQ(rep.candidates[0].normalized.relevance, 1.0);
  EXPECT_EQ(rep.candidates[2].normalized.relevance, 0.0);
  for (const auto& c : rep.candidates) {
    if (!c.valid) continue;
    const double q = rep.weights.alpha() * c.normalized.relevance + rep.weights.beta() * c.normalized.logical +
                     rep.weights.gamma() * c.normalized.sentiment;
    EXPECT_NEAR(c.quality, q, 1e-12);
  }
  const auto rows = report_rows(rep);
  EXPECT_TRUE(rows[1]["Q"].is_null());
  EXPECT_EQ(rows[0].begin().key(), "set_id");
}

TEST(ScoreSet, EquivalenceOnUnitPlausibilityKb) {
  // One triple per sentence with P = 1: Eq. 2 collapses to Eq. 3.
  std::vector<SimileSentence> corpus{parse("He ran like a wolf."), parse("He ran like a wolf."),
                                     parse("The sea roared like a lion.")};
  std::vector<SimileTriple> kb;
  for (const auto& s : corpus) {
    const auto& i = s.instances[0];
    kb.push_back({std::string(s.slice(*i.topic)), "p", std::string(s.slice(i.vehicle)), 1, 1.0});
  }
  const auto ci = build_from_corpus(corpus);
  const auto ki = build_from_kb(kb);
  for (const char* t : {"He howled like a wolf.", "The sea roared like a lion.", "The sea roared like a wolf."}) {
    const auto s = parse(t);
    EXPECT_NEAR(relevance(ci, s, RelevanceMode::approx), relevance(ki, s, RelevanceMode::kb), 1e-9);
  }
}

TEST(Rerank, Examples) {
  ScoreReport rep;
  auto cand = [](const char* id, double q, double c, double i) {
    CandidateScore s;
    s.id = id;
    s.valid = true;
    s.quality = q;
    s.raw.creativity = c;
    s.raw.informativeness = i;
    return s;
  };
  // Q ranks (1,2), C ranks (2,1), I ranks (1,2): keys 7 and 8.
  rep.candidates = {cand("first", 0.9, -2.0, 3), cand("second", 0.1, -1.0, 2)};
  EXPECT_EQ(combined_rerank(rep), (std::vector<std::string>{"first", "second"}));
  // dominance
  rep.candidates = {cand("a", 0.1, -3, 1), cand("b", 0.2, -2, 2), cand("best", 0.9, -0.5, 4)};
  EXPECT_EQ(combined_rerank(rep).front(), "best");
  // ratio 1:0:0 follows quality order
  EXPECT_EQ(combined_rerank(rep, {1, 0, 0}), (std::vector<std::string>{"best", "b", "a"}));
  // key tie broken by higher Q, then input order
  rep.candidates = {cand("x", 0.2, -1, 1), cand("y", 0.8, -2, 1)};
  EXPECT_EQ(combined_rerank(rep, {1, 1, 0}), (std::vector<std::string>{"y", "x"}));
  rep.candidates = {cand("p", 0.5, -1, 1), cand("q", 0.5, -1, 1)};
  EXPECT_EQ(combined_rerank(rep), (std::vector<std::string>{"p", "q"}));
  // fewer than two valid candidates
  rep.candidates = {cand("only", 0.5, -1, 1)};
  EXPECT_THROW(combined_rerank(rep), std::invalid_argument);
}

TEST(ReportRows, RoundTrip) {
  Gateway gw(std::make_unique<StubBackend>());
  const auto idx = build_from_kb({{"he", "wild", "wolf", 4, 0.5}});
  SetInput set{"s", "He yelps and howls.",
               {{"a", "He yelps and howls like a wolf.", {}}, {"b", "He yelps and howls like a storm.", {}},
                {"bad", "no simile here", {}}},
               std::nullopt};
  const auto rep = score_set(idx, gw, set, {});
  std::vector<nlohmann::json> rows;
  for (const auto& r : report_rows(rep)) rows.push_back(nlohmann::json::parse(r.dump()));
  const auto back = reports_from_rows(rows);
  ASSERT_EQ(back.size(), 1u);
  ASSERT_EQ(back[0].candidates.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[0].candidates[i].valid, rep.candidates[i].valid);
    EXPECT_EQ(back[0].candidates[i].quality, rep.candidates[i].quality);
    EXPECT_EQ(back[0].candidates[i].raw.creativity, rep.candidates[i].raw.creativity);
  }
  EXPECT_EQ(combined_rerank(back[0]), combined_rerank(rep));
}
