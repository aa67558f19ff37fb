#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hauser/text.hpp"

namespace hauser {

// Reference-based n-gram baselines. Tokenization: lowercase, punctuation
// split into its own tokens, whitespace separated.

using Tokens = std::vector<std::string>;
using NGram = std::vector<std::string>;

inline Tokens baseline_tokens(std::string_view text) {
  Tokens out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.lower));
  return out;
}

inline std::map<NGram, std::size_t> ngram_counts(const Tokens& toks, std::size_t n) {
  std::map<NGram, std::size_t> counts;
  if (n == 0 || toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[NGram(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

/// BLEU-n against one or more references: geometric mean of clipped 1..n-gram
/// precisions with uniform weights and the brevity penalty against the
/// closest reference length (shorter on ties). No smoothing: any zero
/// precision, including an order longer than the candidate, gives 0.
inline double bleu(const Tokens& candidate, std::span<const Tokens> references, std::size_t n = 4) {
  if (n < 1 || n > 4) throw std::invalid_argument("bleu: n must be in 1..4");
  if (candidate.empty()) throw std::invalid_argument("bleu: empty candidate");
  if (references.empty()) throw std::invalid_argument("bleu: no references");
  for (const auto& r : references) {
    if (r.empty()) throw std::invalid_argument("bleu: empty reference");
  }
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto cand = ngram_counts(candidate, k);
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const auto& [g, c] : cand) {
      std::size_t max_ref = 0;
      for (const auto& r : references) {
        const auto rc = ngram_counts(r, k);
        auto it = rc.find(g);
        if (it != rc.end()) max_ref = std::max(max_ref, it->second);
      }
      matched += std::min(c, max_ref);
      total += c;
    }
    if (total == 0 || matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  const double c = static_cast<double>(candidate.size());
  double r = static_cast<double>(references.front().size());
  for (const auto& ref : references) {
    const double len = static_cast<double>(ref.size());
    if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) r = len;
  }
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(n));
}

inline double bleu(const Tokens& candidate, const Tokens& reference, std::size_t n = 4) {
  return bleu(candidate, std::span<const Tokens>(&reference, 1), n);
}

/// ROUGE-n recall: clipped overlapping n-grams over reference n-grams.
inline double rouge_n(const Tokens& candidate, const Tokens& reference, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rouge_n: n must be >= 1");
  if (candidate.empty() || reference.empty()) throw std::invalid_argument("rouge_n: empty input");
  const auto ref = ngram_counts(reference, n);
  const auto cand = ngram_counts(candidate, n);
  std::size_t total = 0;
  std::size_t overlap = 0;
  for (const auto& [g, c] : ref) {
    total += c;
    auto it = cand.find(g);
    if (it != cand.end()) overlap += std::min(c, it->second);
  }
  return total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(total);
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// ROUGE-L F1 from the longest common subsequence.
inline double rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) throw std::invalid_argument("rouge_l: empty input");
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

/// Distinct n-grams over all n-grams pooled across the candidates.
inline double distinct_n(std::span<const Tokens> candidates, std::size_t n) {
  if (n == 0) throw std::invalid_argument("distinct_n: n must be >= 1");
  std::set<NGram> distinct;
  std::size_t total = 0;
  for (const auto& c : candidates) {
    for (const auto& [g, cnt] : ngram_counts(c, n)) {
      distinct.insert(g);
      total += cnt;
    }
  }
  if (total == 0) throw std::invalid_argument("distinct_n: candidates contain no n-grams");
  return static_cast<double>(distinct.size()) / static_cast<double>(total);
}

/// BLEU-n of each candidate against all the others as references.
inline std::vector<double> self_bleu(std::span<const Tokens> candidates, std::size_t n = 4) {
  if (candidates.size() < 2) throw std::invalid_argument("self_bleu: need at least two candidates");
  std::vector<double> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::vector<Tokens> refs;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (j != i) refs.push_back(candidates[j]);
    }
    out.push_back(bleu(candidates[i], refs, n));
  }
  return out;
}

}  // namespace hauser
