#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "hauser/text.hpp"

namespace hauser {

/// Word-class tables driving the rule-based extractor and lemmatizer.
///
/// The built-in defaults cover common English function words and a few
/// hundred frequent verbs. A replacement table can be loaded from a text file
/// with one entry per line:
///
///     <category> <word> [<word> ...]
///     irregular <inflected form> <lemma>
///
/// where category is one of verb, linking, auxiliary, determiner, pronoun,
/// preposition, subordinator, coordinator, adverb, relative, like_verb_cue,
/// np_continuation. '#' starts a comment line.
struct RuleTable {
  std::unordered_set<std::string> verbs;
  std::unordered_set<std::string> linking;
  std::unordered_set<std::string> auxiliaries;
  std::unordered_set<std::string> determiners;
  std::unordered_set<std::string> pronouns;
  std::unordered_set<std::string> prepositions;
  std::unordered_set<std::string> subordinators;
  std::unordered_set<std::string> coordinators;
  std::unordered_set<std::string> adverbs;
  std::unordered_set<std::string> relatives;
  // Words before "like" that mark it as the verb ("I like", "would like").
  std::unordered_set<std::string> like_verb_cues;
  // Prepositions allowed to extend a vehicle noun phrase.
  std::unordered_set<std::string> np_continuations;
  std::unordered_map<std::string, std::string> irregular;

  static const RuleTable& defaults();
  static RuleTable load(const std::string& path);

  bool is_function_word(const std::string& w) const {
    return auxiliaries.count(w) || determiners.count(w) || pronouns.count(w) ||
           prepositions.count(w) || subordinators.count(w) || coordinators.count(w) ||
           relatives.count(w);
  }
};

namespace detail {

inline void add_words(std::unordered_set<std::string>& set, std::string_view words) {
  std::istringstream in{std::string(words)};
  std::string w;
  while (in >> w) set.insert(w);
}

inline RuleTable make_default_rules() {
  RuleTable t;
  add_words(t.linking, "be seem turn become appear look feel sound smell taste grow remain stay");
  add_words(t.auxiliaries,
            "is am are was were be been being 's 're 'm will would can could shall should may "
            "might must do does did has have had 'd 'll 've not n't don't doesn't didn't won't "
            "wouldn't can't couldn't shouldn't isn't wasn't aren't weren't hasn't haven't hadn't");
  add_words(t.determiners,
            "a an the this that these those his her its their our my your some any every each "
            "no another many several few all both");
  add_words(t.pronouns,
            "i you he she it we they one someone somebody everyone everybody nobody nothing "
            "something everything anyone anybody");
  add_words(t.prepositions,
            "about above across against along among around at behind below beneath beside "
            "between beyond by down during for from in inside into near off on onto out outside "
            "over past through throughout toward towards under underneath up upon with within "
            "without of");
  add_words(t.subordinators,
            "if because when while although though since unless until whereas before after as "
            "once where whenever than so whether");
  add_words(t.coordinators, "and or but nor yet");
  add_words(t.relatives, "that which who whom whose");
  add_words(t.adverbs,
            "so very just still too almost much more really quite then even never always again "
            "back away here there now only also soon already ever once");
  add_words(t.like_verb_cues,
            "i you we they would do does did don't doesn't didn't not to 'd really also just "
            "might may will should could wouldn't");
  add_words(t.np_continuations, "of");
  add_words(t.verbs,
            "accept act add admire allow answer appear arrive ask attack bark bathe beam beat "
            "become beg begin behave believe bellow bend bite blast blaze bleed blink bloom blow "
            "blush boil bounce bow break breathe bring build burn burst buzz call carry cast "
            "catch change charge chase chatter cheer chew chirp choke clap clatter climb cling "
            "close clutch collapse come cook crack crash crawl creak creep cringe croak cross "
            "crouch crumble crumple cry curl cut dance dart dash die dig dive do drag draw "
            "dream dress drift drink drip drive drop drown eat echo escape explode fade fall "
            "feel fight find flap flare flash flee flicker fling float flood flop flow flush "
            "flutter fly fold follow freeze gallop gasp gaze get give glare gleam glide glint "
            "glisten glitter glow gnaw go grab grin grind grip groan grow growl grunt guard "
            "gush hammer hang happen hate have hear help hide hiss hit hold hop hover howl hug "
            "hum hunt hurl hurry hurt jerk jiggle join jump keep kick kill kiss kneel knock "
            "know laugh lay lead leak lean leap learn leave lie lift light limp linger listen "
            "live loom look love lumber lunge lurch make march melt move mumble murmur need "
            "nod open pace pant pass pause peer pile plod plunge point pop pounce pound pour "
            "pray press prowl pull pulse pump punch push quake quiver race rage rain rattle "
            "reach read remain resound rest return ride ring rip rise roar rock roll rot rub "
            "run rush sail say scamper scatter scramble scream scurry see seem send settle "
            "shake shatter shift shimmer shine shiver shoot shout shove shriek shrink shrug "
            "shudder shuffle shut sigh sing sink sit skip skitter slam sleep slide slip slither "
            "slump smash smell smile smoke snap snarl sneak snore snort soar sob spin spit "
            "splash spread spring sprint squat squeak squeal squirm stagger stalk stamp stand "
            "stare start stay steal steam step stick sting stomp stop storm stretch stride "
            "strike struggle strut stumble sulk surge survive swallow sway swear sweat sweep "
            "swell swim swing swirl take talk taste tear tell think throb throw thrash thunder "
            "tingle toss totter touch tower trail tremble trot tumble turn twist twitch wail "
            "wait wake walk wander want warble watch wave weep whimper whine whip whirl "
            "whisper whistle wiggle win wink wither wobble work worry wrap wriggle write yawn "
            "yell yelp yowl");
  const std::pair<const char*, const char*> irregular[] = {
      {"is", "be"},        {"am", "be"},          {"are", "be"},       {"was", "be"},
      {"were", "be"},      {"been", "be"},        {"being", "be"},     {"'s", "be"},
      {"'re", "be"},       {"'m", "be"},          {"became", "become"}, {"began", "begin"},
      {"begun", "begin"},  {"bit", "bite"},       {"bitten", "bite"},  {"bled", "bleed"},
      {"blew", "blow"},    {"blown", "blow"},     {"broke", "break"},  {"broken", "break"},
      {"brought", "bring"}, {"built", "build"},   {"burnt", "burn"},   {"caught", "catch"},
      {"came", "come"},    {"clung", "cling"},    {"crept", "creep"},  {"did", "do"},
      {"done", "do"},      {"dove", "dive"},      {"drew", "draw"},    {"drawn", "draw"},
      {"dreamt", "dream"}, {"drank", "drink"},    {"drunk", "drink"},  {"drove", "drive"},
      {"driven", "drive"}, {"ate", "eat"},        {"eaten", "eat"},    {"fell", "fall"},
      {"fallen", "fall"},  {"felt", "feel"},      {"fought", "fight"}, {"found", "find"},
      {"fled", "flee"},    {"flung", "fling"},    {"flew", "fly"},     {"flown", "fly"},
      {"froze", "freeze"}, {"frozen", "freeze"},  {"got", "get"},      {"gotten", "get"},
      {"gave", "give"},    {"given", "give"},     {"went", "go"},      {"gone", "go"},
      {"ground", "grind"}, {"grew", "grow"},      {"grown", "grow"},   {"hung", "hang"},
      {"had", "have"},     {"has", "have"},       {"heard", "hear"},   {"hid", "hide"},
      {"hidden", "hide"},  {"held", "hold"},      {"kept", "keep"},    {"knelt", "kneel"},
      {"knew", "know"},    {"known", "know"},     {"laid", "lay"},     {"led", "lead"},
      {"leapt", "leap"},   {"learnt", "learn"},   {"left", "leave"},   {"lay", "lie"},
      {"lain", "lie"},     {"lit", "light"},      {"made", "make"},    {"meant", "mean"},
      {"rode", "ride"},    {"ridden", "ride"},    {"rang", "ring"},    {"rung", "ring"},
      {"rose", "rise"},    {"risen", "rise"},     {"ran", "run"},      {"said", "say"},
      {"saw", "see"},      {"seen", "see"},       {"sent", "send"},    {"shook", "shake"},
      {"shaken", "shake"}, {"shone", "shine"},    {"shot", "shoot"},   {"shrank", "shrink"},
      {"shrunk", "shrink"}, {"sang", "sing"},     {"sung", "sing"},    {"sank", "sink"},
      {"sunk", "sink"},    {"sat", "sit"},        {"slept", "sleep"},  {"slid", "slide"},
      {"smelt", "smell"},  {"spat", "spit"},      {"spun", "spin"},    {"sprang", "spring"},
      {"sprung", "spring"}, {"stood", "stand"},   {"stole", "steal"},  {"stolen", "steal"},
      {"stuck", "stick"},  {"stung", "sting"},    {"strode", "stride"}, {"struck", "strike"},
      {"swore", "swear"},  {"swept", "sweep"},    {"swelled", "swell"}, {"swollen", "swell"},
      {"swam", "swim"},    {"swum", "swim"},      {"swung", "swing"},  {"took", "take"},
      {"taken", "take"},   {"tore", "tear"},      {"torn", "tear"},    {"told", "tell"},
      {"thought", "think"}, {"threw", "throw"},   {"thrown", "throw"}, {"woke", "wake"},
      {"woken", "wake"},   {"wept", "weep"},      {"won", "win"},      {"wrote", "write"},
      {"written", "write"}, {"beat", "beat"},     {"burst", "burst"},  {"cast", "cast"},
      {"cut", "cut"},      {"hit", "hit"},        {"hurt", "hurt"},    {"put", "put"},
      {"quit", "quit"},    {"set", "set"},        {"shut", "shut"},    {"spread", "spread"},
  };
  for (const auto& [form, lemma] : irregular) t.irregular.emplace(form, lemma);
  return t;
}

inline std::unordered_set<std::string>* category_set(RuleTable& t, const std::string& cat) {
  if (cat == "verb") return &t.verbs;
  if (cat == "linking") return &t.linking;
  if (cat == "auxiliary") return &t.auxiliaries;
  if (cat == "determiner") return &t.determiners;
  if (cat == "pronoun") return &t.pronouns;
  if (cat == "preposition") return &t.prepositions;
  if (cat == "subordinator") return &t.subordinators;
  if (cat == "coordinator") return &t.coordinators;
  if (cat == "adverb") return &t.adverbs;
  if (cat == "relative") return &t.relatives;
  if (cat == "like_verb_cue") return &t.like_verb_cues;
  if (cat == "np_continuation") return &t.np_continuations;
  return nullptr;
}

}  // namespace detail

inline const RuleTable& RuleTable::defaults() {
  static const RuleTable table = detail::make_default_rules();
  return table;
}

inline RuleTable RuleTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule table: " + path);
  RuleTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::string cat;
    fields >> cat;
    if (cat == "irregular") {
      std::string form;
      std::string lemma;
      if (!(fields >> form >> lemma)) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": irregular entry needs a form and a lemma");
      }
      t.irregular[form] = lemma;
      continue;
    }
    auto* set = detail::category_set(t, cat);
    if (set == nullptr) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown category '" +
                               cat + "'");
    }
    std::string w;
    while (fields >> w) set->insert(to_lower(w));
  }
  return t;
}

/// Suffix-rule lemmatizer for verbs (-s, -es, -ies, -ed, -ied, -ing with
/// consonant doubling and silent-e restoration) backed by the irregular table.
/// Among candidate stems, the first one found in the verb or linking tables
/// wins; otherwise the plain suffix strip is returned.
inline std::string lemmatize_verb(std::string_view word, const RuleTable& rules = RuleTable::defaults()) {
  const std::string w = to_lower(word);
  if (auto it = rules.irregular.find(w); it != rules.irregular.end()) return it->second;
  auto known = [&](const std::string& s) { return rules.verbs.count(s) || rules.linking.count(s); };
  if (known(w)) return w;

  auto ends_with = [&](std::string_view suf) {
    return w.size() > suf.size() + 1 && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };
  auto is_vowel = [](char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; };

  std::vector<std::string> candidates;
  auto strip_with_variants = [&](std::size_t cut) {
    std::string stem = w.substr(0, w.size() - cut);
    candidates.push_back(stem);
    candidates.push_back(stem + "e");
    if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
        !is_vowel(stem.back())) {
      candidates.push_back(stem.substr(0, stem.size() - 1));
    }
  };

  if (ends_with("ies")) {
    candidates.push_back(w.substr(0, w.size() - 3) + "y");
  } else if (ends_with("ied")) {
    candidates.push_back(w.substr(0, w.size() - 3) + "y");
  } else if (ends_with("ing")) {
    strip_with_variants(3);
  } else if (ends_with("ed")) {
    strip_with_variants(2);
    candidates.push_back(w.substr(0, w.size() - 1));
  } else if (ends_with("es")) {
    candidates.push_back(w.substr(0, w.size() - 2));
    candidates.push_back(w.substr(0, w.size() - 1));
  } else if (ends_with("s") && !ends_with("ss")) {
    candidates.push_back(w.substr(0, w.size() - 1));
  }

  for (const auto& c : candidates) {
    if (known(c)) return c;
  }
  return candidates.empty() ? w : candidates.front();
}

}  // namespace hauser
