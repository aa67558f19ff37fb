#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hauser {

/// One token of a sentence with its byte offsets into the owning text.
struct Token {
  std::string text;   // original spelling
  std::string lower;  // ASCII-lowercased spelling
  std::size_t start = 0;
  std::size_t end = 0;
  bool is_word = false;
};

namespace detail {

inline bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Bytes >= 0x80 belong to UTF-8 sequences and are kept inside words.
inline bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

inline bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace detail

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && detail::is_ascii_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && detail::is_ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Collapses every whitespace run to one space and trims both ends.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (detail::is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

/// Splits text into word tokens (alphanumerics with inner apostrophes and
/// hyphens) and single-character punctuation tokens.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (detail::is_ascii_space(c)) {
      ++i;
      continue;
    }
    if (detail::is_word_byte(c)) {
      std::size_t j = i + 1;
      while (j < n) {
        const auto d = static_cast<unsigned char>(text[j]);
        if (detail::is_word_byte(d)) {
          ++j;
        } else if ((d == '\'' || d == '-') && j + 1 < n &&
                   detail::is_word_byte(static_cast<unsigned char>(text[j + 1]))) {
          j += 2;
        } else {
          break;
        }
      }
      std::string word(text.substr(i, j - i));
      tokens.push_back({word, to_lower(word), i, j, true});
      i = j;
      continue;
    }
    std::string p(1, static_cast<char>(c));
    tokens.push_back({p, p, i, i + 1, false});
    ++i;
  }
  return tokens;
}

/// Canonical key for index lookups: lowercase, boundary punctuation removed,
/// whitespace collapsed, one leading article dropped. Applied to a fixed
/// point so the result is idempotent.
inline std::string normalize_phrase(std::string_view phrase) {
  std::string cur(phrase);
  while (true) {
    std::string next = to_lower(cur);
    std::size_t b = 0;
    std::size_t e = next.size();
    while (b < e && (detail::is_ascii_punct(static_cast<unsigned char>(next[b])) ||
                     detail::is_ascii_space(static_cast<unsigned char>(next[b])))) {
      ++b;
    }
    while (e > b && (detail::is_ascii_punct(static_cast<unsigned char>(next[e - 1])) ||
                     detail::is_ascii_space(static_cast<unsigned char>(next[e - 1])))) {
      --e;
    }
    next = collapse_whitespace(std::string_view(next).substr(b, e - b));
    for (std::string_view article : {"a ", "an ", "the "}) {
      if (next.size() > article.size() && next.compare(0, article.size(), article) == 0) {
        next.erase(0, article.size());
        break;
      }
    }
    if (next == cur) return next;
    cur = std::move(next);
  }
}

/// Whitespace tokens with ASCII punctuation stripped from both ends of each
/// token; tokens that become empty are dropped.
inline std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && detail::is_ascii_space(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !detail::is_ascii_space(static_cast<unsigned char>(s[j]))) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && detail::is_ascii_punct(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && detail::is_ascii_punct(static_cast<unsigned char>(s[e - 1]))) --e;
    if (e > b) out.emplace_back(s.substr(b, e - b));
    i = j;
  }
  return out;
}

}  // namespace hauser
