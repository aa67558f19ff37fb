// Extract a simile, derive its literal sentence and score two candidates
// against a tiny KB with the offline stub classifiers.

#include <iostream>
#include <variant>

#include "hauser/hauser.hpp"

int main() {
  using namespace hauser;

  const auto simile = extract_components("The idea resounded like a thunderclap throughout the land.");
  if (!simile) return 1;
  for (const auto& inst : simile->instances) {
    std::cout << "vehicle: " << simile->slice(inst.vehicle) << '\n';
    if (inst.event) std::cout << "event:   " << simile->slice(*inst.event) << '\n';
    if (inst.topic) std::cout << "topic:   " << simile->slice(*inst.topic) << '\n';
  }
  const auto literal = make_literal(*simile);
  if (const auto* pair = std::get_if<LiteralSimilePair>(&literal)) {
    std::cout << "literal: " << pair->literal << '\n';
  }

  const auto index = build_from_kb({{"idea", "loud", "thunderclap", 4, 0.5}, {"idea", "sudden", "lightning", 2, 1.0}});
  Gateway gw(make_backend({}));
  SetInput set{"demo", "The idea resounded throughout the land.", {}, std::nullopt};
  set.candidates.push_back({"a", "The idea resounded like a thunderclap throughout the land.", std::nullopt});
  set.candidates.push_back({"b", "The idea resounded like distant lightning throughout the land.", std::nullopt});
  const auto report = score_set(index, gw, set, {});
  for (const auto& row : report_rows(report)) std::cout << row.dump() << '\n';
  for (const auto& id : combined_rerank(report)) std::cout << id << ' ';
  std::cout << '\n';
}
