#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hauser {

/// One recommendation task: the candidates of a literal sentence with human
/// consensus scores (reference) and metric scores (hypothesis).
struct RankingTask {
  std::string set_id;
  std::vector<std::string> candidate_ids;
  std::vector<double> reference;   // O_ref
  std::vector<double> hypothesis;  // O_hypo

  std::size_t size() const { return reference.size(); }

  void validate() const {
    if (reference.size() != hypothesis.size() ||
        (!candidate_ids.empty() && candidate_ids.size() != reference.size())) {
      throw std::invalid_argument("ranking task: score lists differ in length");
    }
    if (reference.empty()) throw std::invalid_argument("ranking task: no candidates");
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (!std::isfinite(reference[i]) || !std::isfinite(hypothesis[i])) {
        throw std::invalid_argument("ranking task: non-finite score");
      }
    }
  }
};

/// Candidate indices by descending score; equal scores keep input order.
inline std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

/// Indices of every candidate tied at the best human score.
inline std::vector<std::size_t> human_argmax(const RankingTask& task) {
  const double best = *std::max_element(task.reference.begin(), task.reference.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < task.reference.size(); ++i) {
    if (task.reference[i] == best) out.push_back(i);
  }
  return out;
}

/// 1-based metric rank of the best-placed human-argmax candidate.
inline std::size_t best_hit_rank(const RankingTask& task) {
  task.validate();
  const auto order = order_descending(task.hypothesis);
  const auto best = human_argmax(task);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (std::find(best.begin(), best.end(), order[pos]) != best.end()) return pos + 1;
  }
  return order.size();  // unreachable: argmax is never empty
}

/// 1 iff a human-argmax candidate is among the metric's top k.
inline int hr_at_k(const RankingTask& task, std::size_t k) {
  if (k == 0) throw std::invalid_argument("hr_at_k: k must be >= 1");
  return best_hit_rank(task) <= k ? 1 : 0;
}

/// Which side's best must land in the other side's top k. The default asks
/// whether the human best is in the metric's top k; the converse swaps roles
/// (a metric-argmax candidate among the human top k).
enum class HitRule { human_best_in_metric_top, metric_best_in_human_top };

inline int hr_at_k(const RankingTask& task, std::size_t k, HitRule rule) {
  if (rule == HitRule::human_best_in_metric_top) return hr_at_k(task, k);
  return hr_at_k(RankingTask{task.set_id, task.candidate_ids, task.hypothesis, task.reference}, k);
}

inline double hr_at_k(std::span<const RankingTask> tasks, std::size_t k,
                      HitRule rule = HitRule::human_best_in_metric_top) {
  if (tasks.empty()) throw std::invalid_argument("hr_at_k: no tasks");
  double sum = 0.0;
  for (const auto& t : tasks) sum += hr_at_k(t, k, rule);
  return sum / static_cast<double>(tasks.size());
}

/// DCG of human gains taken in the given candidate order, cut at k.
inline double dcg_at_k(std::span<const double> gains, std::span<const std::size_t> order, std::size_t k) {
  double dcg = 0.0;
  const std::size_t limit = std::min(k, order.size());
  for (std::size_t i = 1; i <= limit; ++i) {
    dcg += gains[order[i - 1]] / std::log2(1.0 + static_cast<double>(i));
  }
  return dcg;
}

/// True when every human score is equal, where NDCG is reported as 1.
inline bool ndcg_degenerate(const RankingTask& task) {
  const auto [lo, hi] = std::minmax_element(task.reference.begin(), task.reference.end());
  return *lo == *hi;
}

/// Human scores are the gains; the numerator orders candidates by the
/// metric, the denominator by the human scores.
inline double ndcg_at_k(const RankingTask& task, std::size_t k) {
  task.validate();
  if (k == 0) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  if (ndcg_degenerate(task)) return 1.0;
  const auto hyp = order_descending(task.hypothesis);
  const auto ideal = order_descending(task.reference);
  const double denom = dcg_at_k(task.reference, ideal, k);
  if (denom <= 0.0) throw std::invalid_argument("ndcg_at_k: ideal DCG must be positive");
  return dcg_at_k(task.reference, hyp, k) / denom;
}

inline double ndcg_at_k(std::span<const RankingTask> tasks, std::size_t k) {
  if (tasks.empty()) throw std::invalid_argument("ndcg_at_k: no tasks");
  double sum = 0.0;
  for (const auto& t : tasks) sum += ndcg_at_k(t, k);
  return sum / static_cast<double>(tasks.size());
}

inline double mrr(std::span<const RankingTask> tasks) {
  if (tasks.empty()) throw std::invalid_argument("mrr: no tasks");
  double sum = 0.0;
  for (const auto& t : tasks) sum += 1.0 / static_cast<double>(best_hit_rank(t));
  return sum / static_cast<double>(tasks.size());
}

}  // namespace hauser
