#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hauser/ngram.hpp"
#include "hauser/ranking.hpp"
#include "hauser/ratings.hpp"
#include "hauser/scoring.hpp"
#include "hauser/stats.hpp"
#include "json.hpp"

namespace hauser {

struct MetaEvalConfig {
  bool filter = false;
  // Weights used to rebuild ablated quality variants from normalized parts.
  QualityWeights weights;
  // Candidate sets with reference similes enable the n-gram baselines.
  std::map<std::string, SetInput> sets;
  std::vector<std::size_t> hr_k{1, 3};
  HitRule hit_rule = HitRule::human_best_in_metric_top;
  std::vector<std::size_t> ndcg_k{1, 3};
};

struct CorrelationRow {
  std::string metric;
  Perspective perspective = Perspective::quality;
  std::size_t n = 0;
  std::optional<CorrelationResult> pearson;
  std::optional<CorrelationResult> spearman;
};

struct RecommendationRow {
  std::string metric;
  Perspective perspective = Perspective::quality;
  std::size_t tasks = 0;
  std::vector<std::pair<std::size_t, double>> hr;    // (k, HR@k)
  std::vector<std::pair<std::size_t, double>> ndcg;  // (k, NDCG@k)
  double mrr = 0.0;
  std::size_t degenerate_tasks = 0;  // all human scores equal
};

struct PairwiseRow {
  std::string a;
  std::string b;
  std::optional<CorrelationResult> pearson;
  std::optional<CorrelationResult> spearman;
};

struct ScatterSeries {
  std::string metric;
  Perspective perspective = Perspective::quality;
  std::vector<std::pair<double, double>> points;  // (metric, human)
};

struct EvaluationReport {
  std::vector<CorrelationRow> correlations;
  std::vector<RecommendationRow> recommendation;
  std::vector<PairwiseRow> inter_metric;
  std::vector<ScatterSeries> scatter;
  std::vector<std::string> join_failures;
  std::vector<Removal> removed;
  std::vector<std::string> dropped_ranking_sets;
  std::size_t joined_candidates = 0;
  HitRule hit_rule = HitRule::human_best_in_metric_top;
};

namespace detail {

struct JoinedCandidate {
  std::string set_id;
  std::string candidate_id;
  std::map<std::string, double> metrics;
};

inline double ablated_quality(const CandidateScore& c, const QualityWeights& w, int drop) {
  double a = w.alpha();
  double b = w.beta();
  double g = w.gamma();
  if (drop == 0) a = 0.0;
  if (drop == 1) b = 0.0;
  if (drop == 2) g = 0.0;
  if (a + b + g <= 0.0) return 0.5;
  return quality(c.normalized, QualityWeights(a, b, g));
}

inline std::optional<CorrelationResult> try_corr(
    const std::function<CorrelationResult(std::span<const double>, std::span<const double>)>& f,
    const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return f(x, y);
  } catch (const undefined_correlation&) {
    return std::nullopt;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

// Per-set baseline scores, min-max normalized among the set's candidates.
inline void add_baselines(const SetInput& set, const ScoreReport& rep, std::map<std::string, std::map<std::string, double>>& out) {
  std::vector<std::string> ids;
  std::vector<Tokens> toks;
  for (const auto& c : set.candidates) {
    auto it = std::find_if(rep.candidates.begin(), rep.candidates.end(), [&](const auto& s) { return s.id == c.id; });
    if (it == rep.candidates.end() || !it->valid) continue;
    auto t = baseline_tokens(c.text);
    if (t.empty()) continue;
    ids.push_back(c.id);
    toks.push_back(std::move(t));
  }
  if (ids.empty()) return;
  std::map<std::string, std::vector<double>> raw;
  if (set.reference) {
    const auto ref = baseline_tokens(*set.reference);
    if (!ref.empty()) {
      for (const auto& t : toks) {
        for (std::size_t n = 1; n <= 4; ++n) raw["BLEU" + std::to_string(n)].push_back(bleu(t, ref, n));
        raw["ROUGE1"].push_back(rouge_n(t, ref, 1));
        raw["ROUGE2"].push_back(rouge_n(t, ref, 2));
        raw["ROUGEL"].push_back(rouge_l(t, ref));
      }
    }
  }
  if (toks.size() >= 2) raw["SelfBLEU4"] = self_bleu(toks, 4);
  for (auto& [name, values] : raw) {
    const auto norm = minmax_normalize(values);
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]][name] = norm[i];
  }
}

}  // namespace detail

/// Metrics compared against each human perspective.
inline std::vector<std::string> metrics_for(Perspective p) {
  switch (p) {
    case Perspective::quality:
      return {"Q", "Q-relevance", "Q-consistency_l", "Q-consistency_s", "r_n", "c_l_n", "c_s_n",
              "BLEU1", "BLEU2", "BLEU3", "BLEU4", "ROUGE1", "ROUGE2", "ROUGEL"};
    case Perspective::creativity: return {"C", "C-log", "SelfBLEU4"};
    case Perspective::informativeness: return {"I"};
  }
  return {};
}

/// Joins score reports with human ratings and computes correlation tables,
/// recommendation metrics and inter-metric correlations.
inline EvaluationReport run_meta_evaluation(const std::vector<ScoreReport>& reports, const RatingsDataset& ratings,
                                            const MetaEvalConfig& cfg) {
  EvaluationReport out;
  out.hit_rule = cfg.hit_rule;
  RatingsDataset used = ratings;
  std::optional<std::set<CandidateKey>> allowed;
  if (cfg.filter) {
    std::map<std::string, std::vector<std::string>> sets;
    for (const auto& rep : reports) {
      for (const auto& c : rep.candidates) sets[rep.set_id].push_back(c.id);
    }
    auto fr = filter_dataset(ratings, sets);
    used = std::move(fr.kept);
    out.removed = std::move(fr.removed);
    allowed = std::move(fr.kept_candidates);
  }
  std::map<Perspective, std::map<CandidateKey, double>> human;
  for (auto p : {Perspective::quality, Perspective::creativity, Perspective::informativeness}) {
    human[p] = used.consensus(p);
  }

  std::vector<detail::JoinedCandidate> joined;
  for (const auto& rep : reports) {
    std::map<std::string, std::map<std::string, double>> baselines;
    if (auto it = cfg.sets.find(rep.set_id); it != cfg.sets.end()) detail::add_baselines(it->second, rep, baselines);
    for (const auto& c : rep.candidates) {
      const CandidateKey key{rep.set_id, c.id};
      if (!c.valid) continue;
      if (allowed && !allowed->count(key)) continue;
      bool rated = false;
      for (const auto& [p, m] : human) rated = rated || m.count(key);
      if (!rated) {
        out.join_failures.push_back(rep.set_id + "/" + c.id + ": no human ratings");
        continue;
      }
      detail::JoinedCandidate j{rep.set_id, c.id, {}};
      j.metrics["Q"] = c.quality;
      j.metrics["Q-relevance"] = detail::ablated_quality(c, cfg.weights, 0);
      j.metrics["Q-consistency_l"] = detail::ablated_quality(c, cfg.weights, 1);
      j.metrics["Q-consistency_s"] = detail::ablated_quality(c, cfg.weights, 2);
      j.metrics["r_n"] = c.normalized.relevance;
      j.metrics["c_l_n"] = c.normalized.logical;
      j.metrics["c_s_n"] = c.normalized.sentiment;
      j.metrics["r"] = c.raw.relevance;
      j.metrics["c_l"] = c.raw.logical;
      j.metrics["c_s"] = c.raw.sentiment;
      j.metrics["C"] = c.raw.creativity;
      // Undo the log damping: C = -ln(mean + 1)  =>  -mean = 1 - exp(-C).
      j.metrics["C-log"] = 1.0 - std::exp(-c.raw.creativity);
      j.metrics["I"] = c.raw.informativeness;
      if (auto b = baselines.find(c.id); b != baselines.end()) {
        for (const auto& [name, v] : b->second) j.metrics[name] = v;
      }
      joined.push_back(std::move(j));
    }
  }
  if (joined.empty()) throw std::invalid_argument("meta-evaluation: no score rows joined with ratings");
  out.joined_candidates = joined.size();

  for (auto p : {Perspective::quality, Perspective::creativity, Perspective::informativeness}) {
    const auto& hm = human[p];
    for (const auto& metric : metrics_for(p)) {
      std::vector<double> x;
      std::vector<double> y;
      ScatterSeries series{metric, p, {}};
      std::map<std::string, RankingTask> tasks;
      for (const auto& j : joined) {
        auto mv = j.metrics.find(metric);
        auto hv = hm.find({j.set_id, j.candidate_id});
        if (mv == j.metrics.end() || hv == hm.end()) continue;
        x.push_back(mv->second);
        y.push_back(hv->second);
        series.points.emplace_back(mv->second, hv->second);
        auto& t = tasks[j.set_id];
        t.set_id = j.set_id;
        t.candidate_ids.push_back(j.candidate_id);
        t.reference.push_back(hv->second);
        t.hypothesis.push_back(mv->second);
      }
      if (x.empty()) continue;
      CorrelationRow row{metric, p, x.size(), detail::try_corr(pearson, x, y), detail::try_corr(spearman, x, y)};
      out.correlations.push_back(row);
      out.scatter.push_back(std::move(series));

      std::vector<RankingTask> eligible;
      for (auto& [sid, t] : tasks) {
        if (t.size() >= kMinRankingCandidates) {
          eligible.push_back(std::move(t));
        } else if (metric == metrics_for(p).front()) {
          out.dropped_ranking_sets.push_back(std::string(to_string(p)) + ":" + sid);
        }
      }
      if (eligible.empty()) continue;
      RecommendationRow rr{metric, p, eligible.size(), {}, {}, mrr(eligible), 0};
      for (auto k : cfg.hr_k) rr.hr.emplace_back(k, hr_at_k(eligible, k, cfg.hit_rule));
      for (auto k : cfg.ndcg_k) rr.ndcg.emplace_back(k, ndcg_at_k(eligible, k));
      for (const auto& t : eligible) rr.degenerate_tasks += ndcg_degenerate(t) ? 1 : 0;
      out.recommendation.push_back(std::move(rr));
    }
  }

  const std::vector<std::string> pair_metrics{"Q", "C", "I", "r", "c_l", "c_s"};
  for (std::size_t a = 0; a < pair_metrics.size(); ++a) {
    for (std::size_t b = a + 1; b < pair_metrics.size(); ++b) {
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& j : joined) {
        x.push_back(j.metrics.at(pair_metrics[a]));
        y.push_back(j.metrics.at(pair_metrics[b]));
      }
      out.inter_metric.push_back({pair_metrics[a], pair_metrics[b], detail::try_corr(pearson, x, y),
                                  detail::try_corr(spearman, x, y)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output tables.

namespace detail {

inline std::string fmt_num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fmt_corr(const std::optional<CorrelationResult>& c) {
  if (!c) return ",,";
  return fmt_num(c->coefficient) + "," + fmt_num(c->p_value) + "," + (c->p_value > 0.05 ? "1" : "0");
}

inline nlohmann::ordered_json corr_json(const std::optional<CorrelationResult>& c) {
  if (!c) return nullptr;
  return {{"coefficient", c->coefficient}, {"p_value", c->p_value}, {"n", c->n}, {"p_gt_0.05", c->p_value > 0.05}};
}

}  // namespace detail

/// Writes correlations.csv, recommendation.csv, inter_metric.csv,
/// removed.csv and summary.json; with emit_scatter also
/// scatter/<perspective>__<metric>.tsv.
inline void write_evaluation(const EvaluationReport& rep, const std::filesystem::path& dir, bool emit_scatter = false) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(dir / "correlations.csv");
    f << "perspective,metric,n,pearson,pearson_p,pearson_p_gt_0.05,spearman,spearman_p,spearman_p_gt_0.05\n";
    for (const auto& r : rep.correlations) {
      f << to_string(r.perspective) << ',' << r.metric << ',' << r.n << ',' << detail::fmt_corr(r.pearson) << ','
        << detail::fmt_corr(r.spearman) << '\n';
    }
  }
  {
    auto f = open(dir / "recommendation.csv");
    f << "perspective,metric,tasks";
    if (!rep.recommendation.empty()) {
      for (const auto& [k, v] : rep.recommendation.front().hr) f << ",HR@" << k;
      for (const auto& [k, v] : rep.recommendation.front().ndcg) f << ",NDCG@" << k;
    }
    f << ",MRR,degenerate_tasks\n";
    for (const auto& r : rep.recommendation) {
      f << to_string(r.perspective) << ',' << r.metric << ',' << r.tasks;
      for (const auto& [k, v] : r.hr) f << ',' << detail::fmt_num(v);
      for (const auto& [k, v] : r.ndcg) f << ',' << detail::fmt_num(v);
      f << ',' << detail::fmt_num(r.mrr) << ',' << r.degenerate_tasks << '\n';
    }
  }
  {
    auto f = open(dir / "inter_metric.csv");
    f << "metric_a,metric_b,pearson,pearson_p,pearson_p_gt_0.05,spearman,spearman_p,spearman_p_gt_0.05\n";
    for (const auto& r : rep.inter_metric) {
      f << r.a << ',' << r.b << ',' << detail::fmt_corr(r.pearson) << ',' << detail::fmt_corr(r.spearman) << '\n';
    }
  }
  {
    auto f = open(dir / "removed.csv");
    f << "set_id,candidate_id,reason\n";
    for (const auto& r : rep.removed) f << r.candidate.first << ',' << r.candidate.second << ',' << r.reason << '\n';
  }
  nlohmann::ordered_json s;
  s["significance_test"] = kSignificanceTest;
  s["hit_rule"] = rep.hit_rule == HitRule::human_best_in_metric_top ? "human-in-metric" : "metric-in-human";
  s["joined_candidates"] = rep.joined_candidates;
  s["join_failures"] = rep.join_failures;
  s["removed"] = rep.removed.size();
  s["dropped_ranking_sets"] = rep.dropped_ranking_sets;
  auto& corr = s["correlations"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.correlations) {
    corr.push_back({{"perspective", to_string(r.perspective)}, {"metric", r.metric}, {"n", r.n},
                    {"pearson", detail::corr_json(r.pearson)}, {"spearman", detail::corr_json(r.spearman)}});
  }
  auto& rec = s["recommendation"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.recommendation) {
    nlohmann::ordered_json j{{"perspective", to_string(r.perspective)}, {"metric", r.metric}, {"tasks", r.tasks}};
    for (const auto& [k, v] : r.hr) j["HR@" + std::to_string(k)] = v;
    for (const auto& [k, v] : r.ndcg) j["NDCG@" + std::to_string(k)] = v;
    j["MRR"] = r.mrr;
    j["degenerate_tasks"] = r.degenerate_tasks;
    rec.push_back(std::move(j));
  }
  auto& im = s["inter_metric"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.inter_metric) {
    im.push_back({{"a", r.a}, {"b", r.b}, {"pearson", detail::corr_json(r.pearson)}, {"spearman", detail::corr_json(r.spearman)}});
  }
  open(dir / "summary.json") << s.dump(2) << '\n';
  if (emit_scatter) {
    std::filesystem::create_directories(dir / "scatter");
    for (const auto& series : rep.scatter) {
      auto f = open(dir / "scatter" / (std::string(to_string(series.perspective)) + "__" + series.metric + ".tsv"));
      f << "metric\thuman\n";
      for (const auto& [m, h] : series.points) f << detail::fmt_num(m) << '\t' << detail::fmt_num(h) << '\n';
    }
  }
}

}  // namespace hauser
