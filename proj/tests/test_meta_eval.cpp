#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hauser/meta_eval.hpp"

using namespace hauser;

namespace {

struct Synthetic {
  std::vector<ScoreReport> reports;
  RatingsDataset ratings;
};

// sets x cands candidates, two raters per perspective with scores drawn
// from `score(set, cand, rater)`; metric values from `metric(human_mean)`.
Synthetic make(int sets, int cands, const std::function<int(int, int, int)>& score,
               const std::function<double(double)>& metric) {
  Synthetic out;
  for (int s = 0; s < sets; ++s) {
    ScoreReport rep;
    rep.set_id = "set" + std::to_string(100 + s);
    for (int c = 0; c < cands; ++c) {
      const auto id = "c" + std::to_string(c);
      double sum = 0;
      for (int r = 0; r < 2; ++r) {
        const int v = score(s, c, r);
        sum += v;
        for (auto p : {Perspective::quality, Perspective::creativity, Perspective::informativeness}) {
          out.ratings.entries.push_back({rep.set_id, id, "r" + std::to_string(r), p, v, false});
        }
      }
      const double m = metric(sum / 2);
      CandidateScore cs;
      cs.id = id;
      cs.valid = true;
      cs.quality = m;
      cs.normalized = {m, m, m};
      cs.raw = {m, m, m, m, m};
      rep.candidates.push_back(cs);
    }
    out.reports.push_back(rep);
  }
  return out;
}

const CorrelationRow& row(const EvaluationReport& r, const std::string& metric, Perspective p) {
  for (const auto& c : r.correlations) {
    if (c.metric == metric && c.perspective == p) return c;
  }
  throw std::runtime_error("no row " + metric);
}

const RecommendationRow& rec(const EvaluationReport& r, const std::string& metric, Perspective p) {
  for (const auto& c : r.recommendation) {
    if (c.metric == metric && c.perspective == p) return c;
  }
  throw std::runtime_error("no recommendation row " + metric);
}

}  // namespace

TEST(MetaEval, SelfAgreementCeiling) {
  std::mt19937 rng(1);
  const auto data = make(8, 5, [&](int, int, int) { return 1 + static_cast<int>(rng() % 5); }, [](double h) { return h; });
  const auto r = run_meta_evaluation(data.reports, data.ratings, {});
  for (const auto& [m, p] : {std::pair{"Q", Perspective::quality}, std::pair{"C", Perspective::creativity},
                             std::pair{"I", Perspective::informativeness}}) {
    const auto& c = row(r, m, p);
    ASSERT_TRUE(c.pearson && c.spearman) << m;
    EXPECT_NEAR(c.pearson->coefficient, 1.0, 1e-12) << m;
    EXPECT_NEAR(c.spearman->coefficient, 1.0, 1e-12) << m;
    EXPECT_EQ(c.n, 40u);
    const auto& rr = rec(r, m, p);
    EXPECT_EQ(rr.hr.front().second, 1.0);
    EXPECT_EQ(rr.mrr, 1.0);
    for (const auto& [k, v] : rr.ndcg) EXPECT_NEAR(v, 1.0, 1e-12);
  }
  EXPECT_EQ(r.joined_candidates, 40u);
  EXPECT_TRUE(r.join_failures.empty());
}

TEST(MetaEval, NegatedMetric) {
  std::mt19937 rng(2);
  const auto data = make(6, 4, [&](int, int, int) { return 1 + static_cast<int>(rng() % 5); }, [](double h) { return -h; });
  const auto r = run_meta_evaluation(data.reports, data.ratings, {});
  EXPECT_NEAR(row(r, "Q", Perspective::quality).spearman->coefficient, -1.0, 1e-12);
}

TEST(MetaEval, PlantedCorrelationRecovered) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> score(1, 5);
  // Human means first, then a metric with correlation 0.6 to them.
  std::map<std::pair<int, int>, std::array<int, 2>> scores;
  std::vector<double> human;
  for (int s = 0; s < 30; ++s) {
    for (int c = 0; c < 5; ++c) {
      scores[{s, c}] = {score(rng), score(rng)};
      human.push_back((scores[{s, c}][0] + scores[{s, c}][1]) / 2.0);
    }
  }
  double mean = 0, var = 0;
  for (double h : human) mean += h / human.size();
  for (double h : human) var += (h - mean) * (h - mean) / human.size();
  std::size_t idx = 0;
  std::vector<double> metric;
  for (double h : human) metric.push_back(0.6 * (h - mean) / std::sqrt(var) + 0.8 * n01(rng));
  const auto data = make(
      30, 5, [&](int s, int c, int r) { return scores[{s, c}][r]; }, [&](double) { return metric[idx++]; });
  const auto r = run_meta_evaluation(data.reports, data.ratings, {});
  const auto& c = row(r, "Q", Perspective::quality);
  EXPECT_EQ(c.n, 150u);
  EXPECT_NEAR(c.pearson->coefficient, 0.6, 0.1);
  EXPECT_LT(c.pearson->p_value, 0.05);
}

TEST(MetaEval, JoinFailuresAndEmptyJoin) {
  auto data = make(3, 3, [](int s, int c, int r) { return 1 + (s + c + r) % 5; }, [](double h) { return h; });
  CandidateScore extra;
  extra.id = "unrated";
  extra.valid = true;
  data.reports[0].candidates.push_back(extra);
  const auto r = run_meta_evaluation(data.reports, data.ratings, {});
  ASSERT_EQ(r.join_failures.size(), 1u);
  EXPECT_NE(r.join_failures[0].find("unrated"), std::string::npos);
  EXPECT_THROW(run_meta_evaluation(data.reports, RatingsDataset{}, {}), std::invalid_argument);
}

TEST(MetaEval, FilterDropsDividedAndSmallSets) {
  // set100/c0 gets ratings 1 and 5: removed; set100 then has 2 candidates
  auto data = make(2, 3, [](int s, int c, int r) { return s == 0 && c == 0 ? (r == 0 ? 1 : 5) : 2 + c; },
                   [](double h) { return h; });
  MetaEvalConfig cfg;
  cfg.filter = true;
  const auto r = run_meta_evaluation(data.reports, data.ratings, cfg);
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].candidate, (CandidateKey{"set100", "c0"}));
  EXPECT_EQ(r.joined_candidates, 5u);
  EXPECT_EQ(rec(r, "Q", Perspective::quality).tasks, 1u);
}

TEST(MetaEval, BaselinesAndOutputFiles) {
  auto data = make(2, 3, [](int s, int c, int r) { return 1 + (s + 2 * c + r) % 5; }, [](double h) { return h; });
  MetaEvalConfig cfg;
  const char* texts[] = {"He howled like a wolf.", "He howled like a lonely wolf.", "He howled like the wind."};
  for (const auto& rep : data.reports) {
    SetInput s{rep.set_id, "He howled.", {}, std::string("He howled like a wolf.")};
    for (int c = 0; c < 3; ++c) s.candidates.push_back({"c" + std::to_string(c), texts[c], std::nullopt});
    cfg.sets.emplace(rep.set_id, s);
  }
  const auto r = run_meta_evaluation(data.reports, data.ratings, cfg);
  EXPECT_NO_THROW(row(r, "BLEU4", Perspective::quality));
  EXPECT_NO_THROW(row(r, "ROUGEL", Perspective::quality));
  EXPECT_NO_THROW(row(r, "SelfBLEU4", Perspective::creativity));
  EXPECT_EQ(r.inter_metric.size(), 15u);

  const auto dir = std::filesystem::temp_directory_path() / ("hauser_eval_" + std::to_string(::getpid()));
  write_evaluation(r, dir, true);
  for (const char* f : {"correlations.csv", "recommendation.csv", "inter_metric.csv", "removed.csv", "summary.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "scatter" / "quality__Q.tsv"));
  std::ifstream summary(dir / "summary.json");
  const auto j = nlohmann::json::parse(summary);
  EXPECT_EQ(j["significance_test"], kSignificanceTest);
  std::filesystem::remove_all(dir);
}
