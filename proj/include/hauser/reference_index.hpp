#pragma once

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <iterator>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hauser/simile.hpp"
#include "hauser/text.hpp"

namespace hauser {

/// (topic, property, vehicle) with frequency n and plausibility P.
struct SimileTriple {
  std::string topic;
  std::string property;
  std::string vehicle;
  std::uint64_t frequency = 1;
  double plausibility = 1.0;
};

struct PairKey {
  std::string topic;
  std::string vehicle;

  bool operator==(const PairKey&) const = default;
  auto operator<=>(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const {
    const std::size_t h1 = std::hash<std::string>{}(k.topic);
    const std::size_t h2 = std::hash<std::string>{}(k.vehicle);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};

enum class IndexMode : std::uint8_t { corpus = 0, kb = 1 };

struct IndexMeta {
  IndexMode mode = IndexMode::corpus;
  std::string source;
  std::uint64_t build_timestamp = 0;
  std::uint64_t sentences = 0;  // corpus records ingested
  std::uint64_t triples = 0;    // KB triples ingested
  std::uint64_t skipped = 0;    // malformed or invalid records

  bool operator==(const IndexMeta&) const = default;
};

struct PairStats {
  std::uint64_t count = 0;  // n(t,v)
  double mass = 0.0;        // sum of n * P over triples with (t,v)

  bool operator==(const PairStats&) const = default;
};

/// Immutable, query-only reference statistics. Absent keys read as zero.
class ReferenceIndex {
 public:
  using PairTable = std::unordered_map<PairKey, PairStats, PairKeyHash>;
  using VehicleTable = std::unordered_map<std::string, std::uint64_t>;

  ReferenceIndex() = default;
  ReferenceIndex(IndexMeta meta, PairTable pairs, VehicleTable vehicles)
      : meta_(std::move(meta)), pairs_(std::move(pairs)), vehicles_(std::move(vehicles)) {}

  std::uint64_t pair_frequency(std::string_view topic, std::string_view vehicle) const {
    auto it = pairs_.find(PairKey{normalize_phrase(topic), normalize_phrase(vehicle)});
    return it == pairs_.end() ? 0 : it->second.count;
  }

  double pair_weighted_mass(std::string_view topic, std::string_view vehicle) const {
    auto it = pairs_.find(PairKey{normalize_phrase(topic), normalize_phrase(vehicle)});
    return it == pairs_.end() ? 0.0 : it->second.mass;
  }

  std::uint64_t vehicle_frequency(std::string_view vehicle) const {
    auto it = vehicles_.find(normalize_phrase(vehicle));
    return it == vehicles_.end() ? 0 : it->second;
  }

  const IndexMeta& meta() const { return meta_; }
  const PairTable& pairs() const { return pairs_; }
  const VehicleTable& vehicles() const { return vehicles_; }

  /// Same statistics, ignoring build metadata.
  bool same_statistics(const ReferenceIndex& o) const {
    return pairs_ == o.pairs_ && vehicles_ == o.vehicles_;
  }

  bool operator==(const ReferenceIndex& o) const = default;

 private:
  IndexMeta meta_;
  PairTable pairs_;
  VehicleTable vehicles_;
};

/// Single-writer accumulator. Mass contributions are kept per pair and summed
/// in sorted order at finish(), so the result does not depend on input order.
class IndexBuilder {
 public:
  explicit IndexBuilder(IndexMode mode, std::string source = {}) {
    meta_.mode = mode;
    meta_.source = std::move(source);
  }

  /// Corpus mode: counts each distinct (topic, vehicle) once per sentence
  /// and every instance's vehicle once. Returns false (and counts a skip)
  /// when the sentence has no usable vehicle.
  bool add_sentence(const SimileSentence& s) {
    std::set<PairKey> seen;
    std::vector<std::string> vehicles;
    for (const auto& inst : s.instances) {
      auto v = normalize_phrase(s.slice(inst.vehicle));
      if (v.empty()) {
        ++meta_.skipped;
        return false;
      }
      if (inst.topic) {
        auto t = normalize_phrase(s.slice(*inst.topic));
        if (!t.empty()) seen.insert(PairKey{std::move(t), v});
      }
      vehicles.push_back(std::move(v));
    }
    if (vehicles.empty()) {
      ++meta_.skipped;
      return false;
    }
    for (const auto& k : seen) ++pairs_[k].count;
    for (const auto& v : vehicles) ++vehicles_[v];
    ++meta_.sentences;
    return true;
  }

  /// KB mode. Returns false (and counts a skip) for invalid triples.
  bool add_triple(const SimileTriple& t) {
    const bool valid_p = std::isfinite(t.plausibility) && t.plausibility >= 0.0 &&
                         t.plausibility <= 1.0;
    auto topic = normalize_phrase(t.topic);
    auto vehicle = normalize_phrase(t.vehicle);
    if (!valid_p || t.frequency == 0 || topic.empty() || vehicle.empty()) {
      ++meta_.skipped;
      return false;
    }
    PairKey key{std::move(topic), vehicle};
    pairs_[key].count += t.frequency;
    contributions_[key].push_back(static_cast<double>(t.frequency) * t.plausibility);
    vehicles_[vehicle] += t.frequency;
    ++meta_.triples;
    return true;
  }

  void skip() { ++meta_.skipped; }
  void set_timestamp(std::uint64_t ts) { meta_.build_timestamp = ts; }

  ReferenceIndex finish() && {
    for (auto& [key, parts] : contributions_) {
      std::sort(parts.begin(), parts.end());
      double sum = 0.0;
      for (double x : parts) sum += x;
      pairs_[key].mass = sum;
    }
    return ReferenceIndex(std::move(meta_), std::move(pairs_), std::move(vehicles_));
  }

 private:
  IndexMeta meta_;
  ReferenceIndex::PairTable pairs_;
  ReferenceIndex::VehicleTable vehicles_;
  std::unordered_map<PairKey, std::vector<double>, PairKeyHash> contributions_;
};

/// Keeps a record when the filter returns true; used for sampling sweeps.
using RecordFilter = std::function<bool()>;

/// Keeps each record independently with probability p, reproducibly for a
/// given seed: u = top 53 bits of a mt19937_64 draw scaled to [0,1), keep
/// iff u < p.
inline RecordFilter bernoulli_filter(double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sample fraction must be in (0, 1]");
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, p] { return static_cast<double>((*rng)() >> 11) * 0x1.0p-53 < p; };
}

/// Builds from the JSON-lines corpus format. Malformed lines are skipped and
/// counted in meta().skipped.
inline ReferenceIndex build_from_corpus(std::istream& in, std::string source = {},
                                        const RecordFilter& keep = {}) {
  IndexBuilder b(IndexMode::corpus, std::move(source));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (keep && !keep()) continue;
    try {
      b.add_sentence(simile_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      b.skip();
    }
  }
  return std::move(b).finish();
}

inline ReferenceIndex build_from_corpus(const std::vector<SimileSentence>& sentences) {
  IndexBuilder b(IndexMode::corpus);
  for (const auto& s : sentences) b.add_sentence(s);
  return std::move(b).finish();
}

/// Parses one "topic\tproperty\tvehicle\tfrequency\tplausibility" line.
inline std::optional<SimileTriple> parse_triple_line(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    f.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  if (f.size() != 5) return std::nullopt;
  SimileTriple t{std::string(f[0]), std::string(f[1]), std::string(f[2]), 0, 0.0};
  const auto freq = std::string(trim(f[3]));
  const auto plaus = std::string(trim(f[4]));
  if (freq.empty() || freq.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    t.frequency = std::stoull(freq);
    t.plausibility = std::stod(plaus, &used);
    if (used != plaus.size()) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return t;
}

/// Builds from KB triples in TSV form; '#' comment and blank lines are
/// ignored, unparsable or out-of-range rows are skipped and counted.
inline ReferenceIndex build_from_kb(std::istream& in, std::string source = {},
                                    const RecordFilter& keep = {}) {
  IndexBuilder b(IndexMode::kb, std::move(source));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    if (keep && !keep()) continue;
    auto t = parse_triple_line(line);
    if (!t) {
      b.skip();
      continue;
    }
    b.add_triple(*t);
  }
  return std::move(b).finish();
}

inline ReferenceIndex build_from_kb(const std::vector<SimileTriple>& triples) {
  IndexBuilder b(IndexMode::kb);
  for (const auto& t : triples) b.add_triple(t);
  return std::move(b).finish();
}

// ---------------------------------------------------------------------------
// Binary persistence (.hidx), all integers little-endian:
//
//   header   magic "HIDX" | u32 version | u8 mode | u8[3] zero
//            u64 build_timestamp | u64 sentences | u64 triples | u64 skipped
//            u32 source_len | source bytes
//            u64 pair_count | u64 vehicle_count
//   pairs    (u32 len | topic) (u32 len | vehicle) u64 count | f64 mass
//            sorted by (topic, vehicle)
//   vehicles (u32 len | vehicle) u64 count, sorted by vehicle
//   trailer  u32 CRC-32 of every preceding byte

inline constexpr std::uint32_t kIndexVersion = 1;
inline constexpr char kIndexMagic[4] = {'H', 'I', 'D', 'X'};

class index_format_error : public std::runtime_error {
 public:
  enum class Kind { io, truncated, bad_magic, version_mismatch, checksum, malformed };

  index_format_error(Kind kind, std::uint64_t offset, const std::string& what)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    buf_.insert(buf_.end(), raw, raw + sizeof(T));
  }
  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void put_bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  std::vector<unsigned char>& buffer() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, data_ + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    T v;
    std::memcpy(&v, raw, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (size_ - pos_ < n) {
      throw index_format_error(index_format_error::Kind::malformed, pos_,
                               "record extends past end of payload");
    }
  }
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::vector<unsigned char> serialize_index(const ReferenceIndex& index) {
  detail::ByteWriter w;
  const auto& m = index.meta();
  w.put_bytes(kIndexMagic, 4);
  w.put(kIndexVersion);
  w.put(static_cast<std::uint8_t>(m.mode));
  for (int i = 0; i < 3; ++i) w.put(std::uint8_t{0});
  w.put(m.build_timestamp);
  w.put(m.sentences);
  w.put(m.triples);
  w.put(m.skipped);
  w.put_string(m.source);

  std::vector<std::pair<const PairKey*, const PairStats*>> pairs;
  pairs.reserve(index.pairs().size());
  for (const auto& [k, v] : index.pairs()) pairs.emplace_back(&k, &v);
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return *a.first < *b.first; });
  std::vector<std::pair<const std::string*, std::uint64_t>> vehicles;
  vehicles.reserve(index.vehicles().size());
  for (const auto& [k, v] : index.vehicles()) vehicles.emplace_back(&k, v);
  std::sort(vehicles.begin(), vehicles.end(), [](const auto& a, const auto& b) { return *a.first < *b.first; });

  w.put(static_cast<std::uint64_t>(pairs.size()));
  w.put(static_cast<std::uint64_t>(vehicles.size()));
  for (const auto& [k, v] : pairs) {
    w.put_string(k->topic);
    w.put_string(k->vehicle);
    w.put(v->count);
    w.put(v->mass);
  }
  for (const auto& [k, v] : vehicles) {
    w.put_string(*k);
    w.put(v);
  }
  auto& buf = w.buffer();
  const auto crc = detail::crc32_of(buf.data(), buf.size());
  w.put(crc);
  return std::move(buf);
}

inline ReferenceIndex deserialize_index(const std::vector<unsigned char>& bytes) {
  using Kind = index_format_error::Kind;
  constexpr std::size_t kMinSize = 4 + 4 + 4 + 8 * 4 + 4 + 8 * 2 + 4;
  if (bytes.size() < 8) {
    throw index_format_error(Kind::truncated, bytes.size(), "file too short for header");
  }
  if (std::memcmp(bytes.data(), kIndexMagic, 4) != 0) {
    throw index_format_error(Kind::bad_magic, 0, "not an index file");
  }
  {
    detail::ByteReader hr(bytes.data() + 4, 4);
    const auto version = hr.get<std::uint32_t>();
    if (version != kIndexVersion) {
      throw index_format_error(Kind::version_mismatch, 4,
                               "unsupported index version " + std::to_string(version));
    }
  }
  if (bytes.size() < kMinSize) {
    throw index_format_error(Kind::truncated, bytes.size(), "file too short for header");
  }
  const std::size_t payload = bytes.size() - 4;
  detail::ByteReader tr(bytes.data() + payload, 4);
  const auto stored = tr.get<std::uint32_t>();
  if (stored != detail::crc32_of(bytes.data(), payload)) {
    throw index_format_error(Kind::checksum, payload, "checksum mismatch (truncated or corrupt file)");
  }

  detail::ByteReader r(bytes.data(), payload);
  r.get<std::uint32_t>();  // magic
  r.get<std::uint32_t>();  // version
  IndexMeta m;
  const auto mode = r.get<std::uint8_t>();
  if (mode > 1) throw index_format_error(Kind::malformed, 8, "unknown index mode");
  m.mode = static_cast<IndexMode>(mode);
  for (int i = 0; i < 3; ++i) r.get<std::uint8_t>();
  m.build_timestamp = r.get<std::uint64_t>();
  m.sentences = r.get<std::uint64_t>();
  m.triples = r.get<std::uint64_t>();
  m.skipped = r.get<std::uint64_t>();
  m.source = r.get_string();
  const auto n_pairs = r.get<std::uint64_t>();
  const auto n_vehicles = r.get<std::uint64_t>();
  // Each pair record needs at least 24 bytes, each vehicle record 12.
  if (n_pairs > r.remaining() / 24 || n_vehicles > r.remaining() / 12) {
    throw index_format_error(Kind::malformed, r.pos(), "record counts exceed payload size");
  }
  ReferenceIndex::PairTable pairs;
  pairs.reserve(n_pairs);
  for (std::uint64_t i = 0; i < n_pairs; ++i) {
    const auto at = r.pos();
    PairKey k;
    k.topic = r.get_string();
    k.vehicle = r.get_string();
    PairStats st;
    st.count = r.get<std::uint64_t>();
    st.mass = r.get<double>();
    if (!pairs.emplace(std::move(k), st).second) {
      throw index_format_error(Kind::malformed, at, "duplicate pair record");
    }
  }
  ReferenceIndex::VehicleTable vehicles;
  vehicles.reserve(n_vehicles);
  for (std::uint64_t i = 0; i < n_vehicles; ++i) {
    const auto at = r.pos();
    auto v = r.get_string();
    const auto c = r.get<std::uint64_t>();
    if (!vehicles.emplace(std::move(v), c).second) {
      throw index_format_error(Kind::malformed, at, "duplicate vehicle record");
    }
  }
  if (r.remaining() != 0) {
    throw index_format_error(Kind::malformed, r.pos(), "trailing bytes before checksum");
  }
  return ReferenceIndex(std::move(m), std::move(pairs), std::move(vehicles));
}

inline void save(const ReferenceIndex& index, const std::string& path) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw index_format_error(index_format_error::Kind::io, 0, "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw index_format_error(index_format_error::Kind::io, 0, "write failed: " + path);
}

inline ReferenceIndex load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw index_format_error(index_format_error::Kind::io, 0, "cannot open index: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(bytes);
}

}  // namespace hauser
