// hauser command-line tool: index building, dataset prep, scoring, reranking
// and meta-evaluation.
//
// Exit codes: 0 ok, 1 partial (per-record failures logged), 2 usage or
// config error, 3 backend/transport error.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hauser/hauser.hpp"

namespace {

using namespace hauser;
namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kPartial = 1, kUsage = 2, kBackend = 3 };

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log(const std::string& msg) { std::cerr << "hauser: " << msg << '\n'; }

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw usage_error("cannot read " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw usage_error("cannot write " + path);
  return f;
}

// Build time recorded in index headers; pinned for reproducible output.
std::uint64_t build_timestamp() {
  if (const char* s = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw usage_error("SOURCE_DATE_EPOCH is not an integer");
    }
  }
  return 0;
}

std::vector<double> parse_triple(const std::string& s, const char* what) {
  std::vector<double> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, s.find(':') != std::string::npos ? ':' : ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw usage_error(std::string("bad ") + what + " '" + s + "'");
    }
  }
  if (out.size() != 3) throw usage_error(std::string(what) + " needs three values, got '" + s + "'");
  return out;
}

QualityWeights parse_weights(const std::string& s) {
  const auto v = parse_triple(s, "weights");
  try {
    return QualityWeights(v[0], v[1], v[2]);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
}

RerankRatio parse_ratio(const std::string& s) {
  const auto v = parse_triple(s, "ratio");
  for (double x : v) {
    if (!(x >= 0.0)) throw usage_error("ratio values must be >= 0");
  }
  return {v[0], v[1], v[2]};
}

ReferenceIndex load_index(const std::string& path) {
  if (!fs::exists(path)) throw usage_error("index file not found: " + path);
  try {
    return hauser::load(path);
  } catch (const index_format_error& e) {
    throw usage_error(e.what());
  }
}

std::vector<nlohmann::json> read_jsonl(const std::string& path, std::size_t& malformed) {
  auto in = open_in(path);
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      log(path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
      ++malformed;
    }
  }
  return rows;
}

RatingsDataset read_ratings(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_ratings_csv(in);
  } catch (const ratings_error& e) {
    throw usage_error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct BackendFlags {
  std::string kind = "stub";
  std::string endpoint;
  int timeout_ms = 10000;
  int max_in_flight = 4;
  std::size_t cache = 4096;

  void add(CLI::App* cmd) {
    cmd->add_option("--backend", kind, "Classifier backend")->check(CLI::IsMember({"stub", "remote"}));
    cmd->add_option("--endpoint", endpoint, "Remote backend URL (default: $HAUSER_BACKEND_URL)");
    cmd->add_option("--timeout-ms", timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);
    cmd->add_option("--max-in-flight", max_in_flight, "Concurrent remote requests")->check(CLI::PositiveNumber);
    cmd->add_option("--cache", cache, "Response cache capacity (0 disables)");
  }

  Gateway gateway() const {
    BackendConfig cfg;
    cfg.kind = kind == "remote" ? BackendConfig::Kind::remote : BackendConfig::Kind::stub;
    cfg.endpoint = endpoint;
    if (cfg.endpoint.empty()) {
      if (const char* env = std::getenv("HAUSER_BACKEND_URL")) cfg.endpoint = env;
    }
    cfg.timeout_ms = timeout_ms;
    cfg.max_in_flight = max_in_flight;
    cfg.cache_capacity = cache;
    try {
      return Gateway(make_backend(cfg), cfg.cache_capacity);
    } catch (const std::invalid_argument& e) {
      throw usage_error(e.what());
    }
  }
};

struct ScoreFlags {
  std::string index;
  std::string mode = "kb";
  std::string weights = "3,2,1";
  bool no_log = false;
  bool allow_as = false;
  int jobs = 1;

  void add(CLI::App* cmd, bool index_required) {
    auto* opt = cmd->add_option("--index", index, "Reference index (.hidx)");
    if (index_required) opt->required();
    cmd->add_option("--mode", mode, "Relevance estimator")->check(CLI::IsMember({"kb", "approx"}));
    cmd->add_option("--weights", weights, "Quality weights alpha,beta,gamma");
    cmd->add_flag("--no-creativity-log", no_log, "Use -mean(N_v) instead of -ln(mean(N_v)+1)");
    cmd->add_flag("--allow-as", allow_as, "Also extract 'as ADJ as NP' similes");
    cmd->add_option("--jobs", jobs, "Sets scored in parallel")->check(CLI::PositiveNumber);
  }

  ScoringOptions options() const {
    ScoringOptions o;
    o.weights = parse_weights(weights);
    o.mode = relevance_mode_from_string(mode);
    o.creativity_log = !no_log;
    o.extract.allow_as = allow_as;
    return o;
  }
};

struct SetsFile {
  std::vector<SetInput> sets;
  std::size_t malformed = 0;
};

SetsFile read_sets(const std::string& path) {
  SetsFile out;
  for (const auto& j : read_jsonl(path, out.malformed)) {
    try {
      out.sets.push_back(set_input_from_json(j));
    } catch (const std::exception& e) {
      log(path + ": bad candidate set: " + e.what());
      ++out.malformed;
    }
  }
  return out;
}

// Scores every set; output order follows input order regardless of jobs.
std::vector<ScoreReport> score_sets(const ReferenceIndex& index, Gateway& gw, const std::vector<SetInput>& sets,
                                    const ScoringOptions& opts, int jobs) {
  std::vector<ScoreReport> out(sets.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= sets.size()) return;
      try {
        out[i] = score_set(index, gw, sets[i], opts);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = sets.size();
        return;
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(sets.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_index_build(const std::string& corpus, const std::string& kb, const std::string& out, double frac,
                    std::uint64_t seed) {
  if (corpus.empty() == kb.empty()) throw usage_error("index build: give exactly one of --corpus or --kb");
  const std::string src = corpus.empty() ? kb : corpus;
  auto in = open_in(src);
  RecordFilter keep;
  try {
    if (frac < 1.0) keep = bernoulli_filter(frac, seed);
    else if (frac != 1.0) throw std::invalid_argument("sample fraction must be in (0, 1]");
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  const auto name = fs::path(src).filename().string();
  auto idx = corpus.empty() ? build_from_kb(in, name, keep) : build_from_corpus(in, name, keep);
  IndexMeta meta = idx.meta();
  meta.build_timestamp = build_timestamp();
  idx = ReferenceIndex(meta, idx.pairs(), idx.vehicles());
  try {
    save(idx, out);
  } catch (const index_format_error& e) {
    throw usage_error(e.what());
  }
  log("indexed " + std::to_string(meta.mode == IndexMode::kb ? meta.triples : meta.sentences) + " records (" +
      std::to_string(meta.skipped) + " skipped), " + std::to_string(idx.pairs().size()) + " pairs, " +
      std::to_string(idx.vehicles().size()) + " vehicles -> " + out);
  return meta.skipped ? kPartial : kOk;
}

int cmd_index_dump(const std::string& path) {
  const auto idx = load_index(path);
  std::map<PairKey, PairStats> pairs(idx.pairs().begin(), idx.pairs().end());
  std::map<std::string, std::uint64_t> vehicles(idx.vehicles().begin(), idx.vehicles().end());
  char mass[64];
  for (const auto& [k, s] : pairs) {
    std::snprintf(mass, sizeof mass, "%.17g", s.mass);
    std::cout << "pair\t" << k.topic << '\t' << k.vehicle << '\t' << s.count << '\t' << mass << '\n';
  }
  for (const auto& [v, n] : vehicles) std::cout << "vehicle\t" << v << '\t' << n << '\n';
  return kOk;
}

int cmd_index_info(const std::string& path) {
  const auto idx = load_index(path);
  const auto& m = idx.meta();
  nlohmann::ordered_json j{{"mode", m.mode == IndexMode::kb ? "kb" : "corpus"},
                           {"source", m.source},
                           {"build_timestamp", m.build_timestamp},
                           {"sentences", m.sentences},
                           {"triples", m.triples},
                           {"skipped", m.skipped},
                           {"pairs", idx.pairs().size()},
                           {"vehicles", idx.vehicles().size()}};
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_index_query(const std::string& path, const std::string& topic, const std::string& vehicle) {
  const auto idx = load_index(path);
  nlohmann::ordered_json j;
  j["topic"] = normalize_phrase(topic);
  j["vehicle"] = normalize_phrase(vehicle);
  j["pair_frequency"] = idx.pair_frequency(topic, vehicle);
  j["pair_weighted_mass"] = idx.pair_weighted_mass(topic, vehicle);
  j["vehicle_frequency"] = idx.vehicle_frequency(vehicle);
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_prep(const std::string& similes, const std::string& out_path, bool allow_as) {
  std::size_t malformed = 0;
  const auto rows = read_jsonl(similes, malformed);
  auto out = open_out(out_path);
  ExtractOptions opts;
  opts.allow_as = allow_as;
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::size_t no_simile = 0;
  for (const auto& j : rows) {
    std::optional<SimileSentence> s;
    try {
      if (j.contains("instances")) {
        s = simile_from_json(j);
      } else {
        s = extract_components(j.at("text").get<std::string>(), opts);
      }
    } catch (const std::exception& e) {
      log(similes + ": bad record: " + e.what());
      ++malformed;
      continue;
    }
    if (!s) {
      ++no_simile;
      continue;
    }
    const auto r = make_literal(*s);
    if (const auto* pair = std::get_if<LiteralSimilePair>(&r)) {
      out << to_json(*pair).dump() << '\n';
      ++kept;
    } else {
      ++rejected;
    }
  }
  std::cout << "kept " << kept << "\nrejected_linking_verb " << rejected << "\nno_simile " << no_simile
            << "\nmalformed " << malformed << '\n';
  return malformed ? kPartial : kOk;
}

int cmd_score(const std::string& sets_path, const ScoreFlags& sf, const BackendFlags& bf, const std::string& out_path) {
  const auto opts = sf.options();
  const auto index = load_index(sf.index);
  auto sets = read_sets(sets_path);
  auto gw = bf.gateway();
  const auto reports = score_sets(index, gw, sets.sets, opts, sf.jobs);

  auto out = open_out(out_path);
  std::size_t failed_sets = 0;
  nlohmann::ordered_json meta;
  meta["index_mode"] = to_string(opts.mode);
  meta["index_source"] = index.meta().source;
  meta["creativity_log"] = opts.creativity_log;
  auto& per_set = meta["sets"] = nlohmann::ordered_json::array();
  for (const auto& rep : reports) {
    for (const auto& row : report_rows(rep)) out << row.dump() << '\n';
    if (rep.valid_count() == 0) {
      log("set " + rep.set_id + ": no valid candidates");
      ++failed_sets;
    }
    per_set.push_back({{"set_id", rep.set_id},
                       {"weights", {rep.weights.alpha(), rep.weights.beta(), rep.weights.gamma()}},
                       {"mode", to_string(rep.mode)},
                       {"nli_model", rep.models.nli_model},
                       {"sentiment_model", rep.models.sentiment_model}});
  }
  open_out(out_path + ".meta.json") << meta.dump(2) << '\n';
  log("scored " + std::to_string(reports.size()) + " sets -> " + out_path);
  return failed_sets || sets.malformed ? kPartial : kOk;
}

std::vector<ScoreReport> read_reports(const std::string& path, std::size_t& malformed) {
  const auto rows = read_jsonl(path, malformed);
  try {
    return reports_from_rows(rows);
  } catch (const std::exception& e) {
    throw usage_error(path + ": " + e.what());
  }
}

int cmd_rank(const std::string& report_path, const std::string& ratio_s, const std::string& out_path) {
  const auto ratio = parse_ratio(ratio_s);
  std::size_t malformed = 0;
  const auto reports = read_reports(report_path, malformed);
  auto out = open_out(out_path);
  out << "set_id,position,candidate_id\n";
  std::size_t skipped = 0;
  for (const auto& rep : reports) {
    try {
      const auto order = combined_rerank(rep, ratio);
      for (std::size_t i = 0; i < order.size(); ++i) out << rep.set_id << ',' << i + 1 << ',' << order[i] << '\n';
    } catch (const std::invalid_argument& e) {
      log("set " + rep.set_id + ": " + e.what());
      ++skipped;
    }
  }
  return skipped || malformed ? kPartial : kOk;
}

int cmd_evaluate(const std::string& report_path, const std::string& ratings_path, bool filter,
                 const std::string& hit_rule, const std::string& sets_path, bool scatter, const std::vector<std::string>& sweep,
                 const ScoreFlags& sf, const BackendFlags& bf, const std::string& out_dir) {
  std::size_t malformed = 0;
  const auto reports = read_reports(report_path, malformed);
  const auto ratings = read_ratings(ratings_path);
  MetaEvalConfig cfg;
  cfg.filter = filter;
  if (hit_rule == "metric-in-human") cfg.hit_rule = HitRule::metric_best_in_human_top;
  cfg.weights = parse_weights(sf.weights);
  SetsFile sets;
  if (!sets_path.empty()) {
    sets = read_sets(sets_path);
    for (const auto& s : sets.sets) cfg.sets.emplace(s.set_id, s);
  }
  if (!sweep.empty() && sets_path.empty()) throw usage_error("--sweep-index requires --sets");
  EvaluationReport rep;
  try {
    rep = run_meta_evaluation(reports, ratings, cfg);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  write_evaluation(rep, out_dir, scatter);
  for (const auto& f : rep.join_failures) log("join: " + f);

  if (!sweep.empty()) {
    auto gw = bf.gateway();
    const auto opts = sf.options();
    auto out = open_out((fs::path(out_dir) / "sweep.csv").string());
    out << "index,records,perspective,metric,n,pearson,pearson_p,spearman,spearman_p\n";
    for (const auto& path : sweep) {
      const auto index = load_index(path);
      const auto swept = score_sets(index, gw, sets.sets, opts, sf.jobs);
      const auto ev = run_meta_evaluation(swept, ratings, cfg);
      const auto records = index.meta().mode == IndexMode::kb ? index.meta().triples : index.meta().sentences;
      for (const auto& row : ev.correlations) {
        if (!((row.metric == "Q" && row.perspective == Perspective::quality) ||
              (row.metric == "C" && row.perspective == Perspective::creativity))) {
          continue;
        }
        out << path << ',' << records << ',' << to_string(row.perspective) << ',' << row.metric << ',' << row.n;
        for (const auto& c : {row.pearson, row.spearman}) {
          if (c) out << ',' << fmt(c->coefficient) << ',' << fmt(c->p_value);
          else out << ",,";
        }
        out << '\n';
      }
    }
  }
  log("evaluated " + std::to_string(rep.joined_candidates) + " candidates -> " + out_dir);
  return rep.join_failures.empty() && !malformed && !sets.malformed ? kOk : kPartial;
}

int cmd_agreement(const std::string& ratings_path, const std::string& perspective, bool filter) {
  const auto ratings = read_ratings(ratings_path);
  const auto p = perspective_from_string(perspective);
  std::cout << "stage,raters,items,pearson_mean,pearson_max,spearman_mean,spearman_max,excluded_raters\n";
  auto row = [&](const char* stage, const RatingsDataset& ds) {
    AgreementResult a;
    try {
      a = inter_rater_agreement(ds, p);
    } catch (const ratings_error& e) {
      throw usage_error(e.what());
    }
    auto num = [](double v) { return std::isfinite(v) ? fmt(v) : std::string(); };
    std::string excluded;
    for (const auto& r : a.excluded_raters) excluded += (excluded.empty() ? "" : ";") + r;
    std::cout << stage << ',' << a.raters << ',' << a.items << ',' << num(a.pearson.mean) << ','
              << num(a.pearson.max) << ',' << num(a.spearman.mean) << ',' << num(a.spearman.max) << ','
              << excluded << '\n';
    for (const auto& r : a.excluded_raters) log("rater " + r + ": constant scores, held-out correlation undefined");
  };
  row("Before", ratings);
  if (filter) row("After", filter_dataset(ratings).kept);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HAUSER simile evaluation toolkit"};
  app.set_config("--config", "", "Config file (TOML key = value, [subcommand] sections); flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  auto* index = app.add_subcommand("index", "Build and inspect reference indices");
  index->require_subcommand(1);
  std::string corpus, kb, index_out, index_path, topic, vehicle;
  double frac = 1.0;
  std::uint64_t seed = 0;
  auto* build = index->add_subcommand("build", "Build an index from a simile corpus or KB triples");
  build->add_option("--corpus", corpus, "Annotated simile corpus (JSON lines)");
  build->add_option("--kb", kb, "KB triples (TSV)");
  build->add_option("--out", index_out, "Output index (.hidx)")->required();
  build->add_option("--sample-frac", frac, "Keep each record with this probability");
  build->add_option("--seed", seed, "Sampling seed");
  auto* dump = index->add_subcommand("dump", "Print every pair and vehicle count as TSV");
  dump->add_option("--index", index_path)->required();
  auto* info = index->add_subcommand("info", "Print index metadata");
  info->add_option("--index", index_path)->required();
  auto* query = index->add_subcommand("query", "Look up one topic/vehicle pair");
  query->add_option("--index", index_path)->required();
  query->add_option("--topic", topic);
  query->add_option("--vehicle", vehicle)->required();

  auto* prep = app.add_subcommand("prep", "Derive literal/simile pairs from simile sentences");
  std::string similes, prep_out;
  bool prep_as = false;
  prep->add_option("--similes", similes, "Simile sentences (JSON lines)")->required();
  prep->add_option("--out", prep_out, "Output pairs (JSON lines)")->required();
  prep->add_flag("--allow-as", prep_as, "Also extract 'as ADJ as NP' similes");

  auto* score = app.add_subcommand("score", "Score candidate sets");
  std::string sets_path, score_out;
  ScoreFlags score_flags;
  BackendFlags score_backend;
  score->add_option("--sets", sets_path, "Candidate sets (JSON lines)")->required();
  score->add_option("--out", score_out, "Score report (JSON lines)")->required();
  score_flags.add(score, true);
  score_backend.add(score);

  auto* rank = app.add_subcommand("rank", "Rerank candidates by combined criterion ranks");
  std::string rank_report, ratio = "2:2:1", rank_out;
  rank->add_option("--report", rank_report)->required();
  rank->add_option("--ratio", ratio, "quality:creativity:informativeness");
  rank->add_option("--out", rank_out)->required();

  auto* evaluate = app.add_subcommand("evaluate", "Meta-evaluate metrics against human ratings");
  std::string eval_report, eval_ratings, eval_sets, eval_out;
  bool eval_filter = false;
  std::string hit_rule = "human-in-metric";
  bool scatter = false;
  std::vector<std::string> sweep;
  ScoreFlags eval_flags;
  BackendFlags eval_backend;
  evaluate->add_option("--report", eval_report)->required();
  evaluate->add_option("--ratings", eval_ratings)->required();
  evaluate->add_flag("--filter", eval_filter, "Apply the lack-of-context and divided-rating filters");
  evaluate->add_option("--hr-rule", hit_rule, "HR@k: human best in metric top k, or the converse")
      ->check(CLI::IsMember({"human-in-metric", "metric-in-human"}));
  evaluate->add_option("--sets", eval_sets, "Candidate sets with references (enables n-gram baselines)");
  evaluate->add_flag("--emit-scatter", scatter, "Write (metric, human) point files");
  evaluate->add_option("--sweep-index", sweep, "Rescore --sets with each index and report correlations");
  evaluate->add_option("--out", eval_out, "Output directory")->required();
  eval_flags.add(evaluate, false);
  eval_backend.add(evaluate);

  auto* agreement = app.add_subcommand("agreement", "Held-out inter-rater agreement");
  std::string ag_ratings, ag_perspective = "quality";
  bool ag_filter = false;
  agreement->add_option("--ratings", ag_ratings)->required();
  agreement->add_option("--perspective", ag_perspective)->check(CLI::IsMember({"quality", "creativity", "informativeness"}));
  agreement->add_flag("--filter", ag_filter, "Also report agreement after filtering");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (build->parsed()) return cmd_index_build(corpus, kb, index_out, frac, seed);
    if (dump->parsed()) return cmd_index_dump(index_path);
    if (info->parsed()) return cmd_index_info(index_path);
    if (query->parsed()) return cmd_index_query(index_path, topic, vehicle);
    if (prep->parsed()) return cmd_prep(similes, prep_out, prep_as);
    if (score->parsed()) return cmd_score(sets_path, score_flags, score_backend, score_out);
    if (rank->parsed()) return cmd_rank(rank_report, ratio, rank_out);
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_report, eval_ratings, eval_filter, hit_rule, eval_sets, scatter, sweep, eval_flags, eval_backend,
                          eval_out);
    }
    if (agreement->parsed()) return cmd_agreement(ag_ratings, ag_perspective, ag_filter);
  } catch (const usage_error& e) {
    log(e.what());
    return kUsage;
  } catch (const gateway_error& e) {
    log(std::string("backend error: ") + e.what());
    return kBackend;
  } catch (const std::exception& e) {
    log(e.what());
    return kUsage;
  }
  return kUsage;
}
