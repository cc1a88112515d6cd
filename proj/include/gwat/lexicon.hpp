#pragma once

// WordNet (WNDB format) reader and keyword search over synset lemmas.
//
// Data lines look like
//   00001740 03 n 01 entity 0 003 ~ 00001930 n 0000 ... | gloss text
// i.e. offset, lex_filenum, ss_type, w_cnt (hex), w_cnt (word, lex_id) pairs,
// p_cnt followed by 4-token pointers, a verb-only frame list, then " | " and
// the gloss. Pointers and frames are validated for shape and dropped.

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gwat/error.hpp"

namespace gwat {

enum class LexicalType : std::uint8_t { Noun, Verb, Adjective, Adverb };

inline constexpr std::array kLexicalTypes{LexicalType::Noun, LexicalType::Verb,
                                          LexicalType::Adjective,
                                          LexicalType::Adverb};

inline constexpr char type_tag(LexicalType t) {
  switch (t) {
    case LexicalType::Noun: return 'n';
    case LexicalType::Verb: return 'v';
    case LexicalType::Adjective: return 'a';
    case LexicalType::Adverb: return 'r';
  }
  return '?';
}

inline constexpr std::string_view type_name(LexicalType t) {
  switch (t) {
    case LexicalType::Noun: return "Noun";
    case LexicalType::Verb: return "Verb";
    case LexicalType::Adjective: return "Adjective";
    case LexicalType::Adverb: return "Adverb";
  }
  return "?";
}

// Accepts the four canonical tags plus 's' (adjective satellite).
inline constexpr std::optional<LexicalType> type_from_tag(char c) {
  switch (c) {
    case 'n': return LexicalType::Noun;
    case 'v': return LexicalType::Verb;
    case 'a':
    case 's': return LexicalType::Adjective;
    case 'r': return LexicalType::Adverb;
    default: return std::nullopt;
  }
}

inline constexpr std::string_view data_file_name(LexicalType t) {
  switch (t) {
    case LexicalType::Noun: return "data.noun";
    case LexicalType::Verb: return "data.verb";
    case LexicalType::Adjective: return "data.adj";
    case LexicalType::Adverb: return "data.adv";
  }
  return "";
}

inline constexpr std::string_view index_file_name(LexicalType t) {
  switch (t) {
    case LexicalType::Noun: return "index.noun";
    case LexicalType::Verb: return "index.verb";
    case LexicalType::Adjective: return "index.adj";
    case LexicalType::Adverb: return "index.adv";
  }
  return "";
}

namespace detail {

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

inline bool all_hex(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isxdigit(c) != 0;
  });
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Space-separated tokens with their byte positions in the source line.
class TokenCursor {
 public:
  explicit TokenCursor(std::string_view line) : line_(line) {}

  std::optional<std::pair<std::string_view, std::size_t>> next() {
    while (pos_ < line_.size() && line_[pos_] == ' ') ++pos_;
    if (pos_ >= line_.size()) return std::nullopt;
    const std::size_t start = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ') ++pos_;
    return std::make_pair(line_.substr(start, pos_ - start), start);
  }

 private:
  std::string_view line_;
  std::size_t pos_ = 0;
};

inline std::uint32_t parse_offset(std::string_view s) {
  std::uint32_t v = 0;
  for (char c : s) v = v * 10 + static_cast<std::uint32_t>(c - '0');
  return v;
}

}  // namespace detail

struct SynsetId {
  LexicalType type = LexicalType::Noun;
  std::uint32_t offset = 0;

  // "n02084071": type tag and exactly eight digits.
  static SynsetId parse(std::string_view text) {
    if (text.size() != 9 || !detail::all_digits(text.substr(1))) {
      throw Error(ErrorKind::InvalidIdFormat, std::string(text));
    }
    const char tag = text[0];
    if (tag != 'n' && tag != 'v' && tag != 'a' && tag != 'r') {
      throw Error(ErrorKind::InvalidIdFormat, std::string(text));
    }
    return SynsetId{*type_from_tag(tag), detail::parse_offset(text.substr(1))};
  }

  std::string str() const {
    std::string out(9, '0');
    out[0] = type_tag(type);
    std::uint32_t v = offset;
    for (int i = 8; i >= 1; --i) {
      out[static_cast<std::size_t>(i)] = static_cast<char>('0' + v % 10);
      v /= 10;
    }
    return out;
  }

  // Consistent with lexicographic order of str().
  friend constexpr std::strong_ordering operator<=>(const SynsetId& a,
                                                    const SynsetId& b) {
    if (auto c = type_tag(a.type) <=> type_tag(b.type); c != 0) return c;
    return a.offset <=> b.offset;
  }
  friend constexpr bool operator==(const SynsetId&, const SynsetId&) = default;
};

struct SynsetIdHash {
  std::size_t operator()(const SynsetId& id) const noexcept {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(id.type) << 32) | id.offset);
  }
};

// Multiword lemmas keep the WNDB underscore form; display() swaps in spaces.
inline std::string display_form(std::string_view lemma) {
  std::string out(lemma);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

struct Synset {
  SynsetId id;
  std::vector<std::string> lemmas;
  std::string gloss;
  LexicalType lexical_type = LexicalType::Noun;

  std::string name() const { return lemmas.empty() ? std::string{} : display_form(lemmas.front()); }

  std::vector<std::string> display_lemmas() const {
    std::vector<std::string> out;
    out.reserve(lemmas.size());
    for (const auto& l : lemmas) out.push_back(display_form(l));
    return out;
  }

  friend bool operator==(const Synset&, const Synset&) = default;
};

namespace detail {

// Adjective lemmas may carry a syntactic marker: "galore(ip)", "big(a)".
inline std::string_view strip_adjective_marker(std::string_view word) {
  for (std::string_view marker : {"(ip)", "(a)", "(p)"}) {
    if (word.size() > marker.size() && word.ends_with(marker)) {
      return word.substr(0, word.size() - marker.size());
    }
  }
  return word;
}

inline bool is_header_line(std::string_view line) { return line.starts_with("  "); }

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline Synset parse_data_line(std::string_view line, std::size_t line_number,
                              LexicalType expected) {
  TokenCursor cur(line);
  auto need = [&](const char* what) {
    auto tok = cur.next();
    if (!tok) throw MalformedLine(line_number, std::string("missing ") + what);
    return *tok;
  };

  const auto [offset_tok, offset_pos] = need("offset");
  if (offset_tok.size() != 8 || !all_digits(offset_tok)) {
    throw MalformedLine(line_number, "non-numeric offset '" + std::string(offset_tok) + "'");
  }
  const auto lex_filenum = need("lex_filenum").first;
  if (!all_digits(lex_filenum)) {
    throw MalformedLine(line_number, "non-numeric lex_filenum");
  }
  const auto ss_type = need("ss_type").first;
  const auto parsed_type = ss_type.size() == 1 ? type_from_tag(ss_type[0]) : std::nullopt;
  if (!parsed_type || *parsed_type != expected) {
    throw MalformedLine(line_number, "synset type '" + std::string(ss_type) +
                                         "' not valid in " +
                                         std::string(data_file_name(expected)));
  }
  const auto w_cnt_tok = need("w_cnt").first;
  if (!all_hex(w_cnt_tok)) throw MalformedLine(line_number, "non-hex w_cnt");
  const auto w_cnt = std::stoul(std::string(w_cnt_tok), nullptr, 16);
  if (w_cnt == 0) throw MalformedLine(line_number, "synset without words");

  Synset s;
  s.id = SynsetId{expected, parse_offset(offset_tok)};
  s.lexical_type = expected;
  s.lemmas.reserve(w_cnt);
  for (unsigned long i = 0; i < w_cnt; ++i) {
    auto word = need("word").first;
    if (!all_hex(need("lex_id").first)) throw MalformedLine(line_number, "non-hex lex_id");
    if (expected == LexicalType::Adjective) word = strip_adjective_marker(word);
    s.lemmas.emplace_back(word);
  }

  const auto p_cnt_tok = need("p_cnt").first;
  if (!all_digits(p_cnt_tok)) throw MalformedLine(line_number, "non-numeric p_cnt");
  const auto p_cnt = std::stoul(std::string(p_cnt_tok));
  for (unsigned long i = 0; i < p_cnt; ++i) {
    need("pointer symbol");
    if (!all_digits(need("pointer offset").first)) {
      throw MalformedLine(line_number, "non-numeric pointer offset");
    }
    need("pointer pos");
    if (!all_hex(need("pointer source/target").first)) {
      throw MalformedLine(line_number, "bad pointer source/target");
    }
  }

  auto tok = need("gloss separator");
  if (expected == LexicalType::Verb && tok.first != "|") {
    if (!all_digits(tok.first)) throw MalformedLine(line_number, "non-numeric f_cnt");
    const auto f_cnt = std::stoul(std::string(tok.first));
    for (unsigned long i = 0; i < f_cnt; ++i) {
      if (need("frame marker").first != "+") throw MalformedLine(line_number, "bad verb frame");
      need("f_num");
      need("w_num");
    }
    tok = need("gloss separator");
  }
  if (tok.first != "|") {
    throw MalformedLine(line_number, "field count mismatch, expected ' | ' before gloss");
  }
  const auto gloss = trim(line.substr(tok.second + 1));
  if (gloss.empty()) throw MalformedLine(line_number, "empty gloss");
  s.gloss = std::string(gloss);
  return s;
}

}  // namespace detail

// One Synset per non-header line of a data.{noun,verb,adj,adv} file.
inline std::vector<Synset> parse_data_file(std::istream& source, LexicalType type) {
  std::vector<Synset> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(source, line)) {
    ++line_number;
    detail::strip_cr(line);
    if (line.empty() || detail::is_header_line(line)) continue;
    out.push_back(detail::parse_data_line(line, line_number, type));
  }
  return out;
}

struct IndexEntry {
  std::string lemma;
  std::vector<std::uint32_t> offsets;
};

// index.* files: lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt
// tagsense_cnt synset_offset...
inline std::vector<IndexEntry> parse_index_file(std::istream& source, LexicalType type) {
  std::vector<IndexEntry> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(source, line)) {
    ++line_number;
    detail::strip_cr(line);
    if (line.empty() || detail::is_header_line(line)) continue;

    std::vector<std::string_view> toks;
    detail::TokenCursor cur(line);
    while (auto t = cur.next()) toks.push_back(t->first);
    if (toks.size() < 6) throw MalformedLine(line_number, "too few fields");

    const auto pos = toks[1].size() == 1 ? type_from_tag(toks[1][0]) : std::nullopt;
    if (!pos || *pos != type) throw MalformedLine(line_number, "pos does not match file");
    if (!detail::all_digits(toks[2]) || !detail::all_digits(toks[3])) {
      throw MalformedLine(line_number, "non-numeric synset_cnt or p_cnt");
    }
    const auto synset_cnt = std::stoul(std::string(toks[2]));
    const auto p_cnt = std::stoul(std::string(toks[3]));
    const std::size_t first_offset = 4 + p_cnt + 2;
    if (toks.size() < first_offset) throw MalformedLine(line_number, "pointer list truncated");
    if (toks.size() - first_offset != synset_cnt) {
      throw MalformedLine(line_number, "synset_cnt " + std::to_string(synset_cnt) +
                                           " but " + std::to_string(toks.size() - first_offset) +
                                           " offsets");
    }
    IndexEntry entry{std::string(toks[0]), {}};
    for (std::size_t i = first_offset; i < toks.size(); ++i) {
      if (toks[i].size() != 8 || !detail::all_digits(toks[i])) {
        throw MalformedLine(line_number, "non-numeric offset");
      }
      entry.offsets.push_back(detail::parse_offset(toks[i]));
    }
    out.push_back(std::move(entry));
  }
  return out;
}

// Trim, lowercase, and fold whitespace runs into single underscores.
inline std::string normalize_query(std::string_view query) {
  const auto t = detail::trim(query);
  if (t.empty()) throw Error(ErrorKind::EmptyQuery, "query is empty");
  std::string out;
  out.reserve(t.size());
  bool in_space = false;
  for (char c : t) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space) out.push_back('_');
    in_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

struct SearchGroup {
  LexicalType lexical_type;
  std::vector<Synset> synsets;
};

struct SearchResultPage {
  std::vector<SearchGroup> groups;
  bool truncated = false;
  std::size_t total_matches = 0;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.synsets.size();
    return n;
  }
};

inline constexpr std::size_t kDefaultSearchLimit = 500;
inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

// Search results list nouns, adjectives, verbs, adverbs in that order.
inline constexpr std::array kSearchGroupOrder{LexicalType::Noun, LexicalType::Adjective,
                                              LexicalType::Verb, LexicalType::Adverb};

class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon from_synsets(std::vector<Synset> synsets) {
    Lexicon lex;
    for (auto& s : synsets) lex.add(std::move(s));
    return lex;
  }

  // Reads data.{noun,verb,adj,adv}; index.* files, when present, are
  // cross-checked and any mismatch lands in warnings().
  static Lexicon load(const std::filesystem::path& dict_dir) {
    Lexicon lex;
    for (LexicalType t : kLexicalTypes) {
      const auto path = dict_dir / data_file_name(t);
      std::ifstream in(path);
      if (!in) throw Error(ErrorKind::MissingFile, path.string());
      try {
        for (auto& s : parse_data_file(in, t)) lex.add(std::move(s));
      } catch (const MalformedLine& e) {
        throw MalformedLine(e.line_number(), std::string(data_file_name(t)) + ": " + e.detail());
      }
    }
    for (LexicalType t : kLexicalTypes) {
      const auto path = dict_dir / index_file_name(t);
      std::ifstream in(path);
      if (!in) continue;
      try {
        std::size_t unresolved = 0;
        for (const auto& entry : parse_index_file(in, t)) {
          for (auto off : entry.offsets) {
            if (!lex.contains(SynsetId{t, off})) {
              if (++unresolved <= 10) {
                lex.warnings_.push_back(std::string(index_file_name(t)) + ": '" + entry.lemma +
                                        "' lists unknown offset " + SynsetId{t, off}.str());
              }
            }
          }
        }
        if (unresolved > 10) {
          lex.warnings_.push_back(std::string(index_file_name(t)) + ": " +
                                  std::to_string(unresolved) + " unresolved offsets in total");
        }
      } catch (const MalformedLine& e) {
        lex.warnings_.push_back(std::string(index_file_name(t)) + ": " + e.what());
      }
    }
    return lex;
  }

  std::size_t size() const { return synsets_.size(); }
  std::size_t count(LexicalType t) const { return counts_[static_cast<std::size_t>(t)]; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool contains(const SynsetId& id) const { return synsets_.count(id) != 0; }

  const Synset& get(const SynsetId& id) const {
    auto it = synsets_.find(id);
    if (it == synsets_.end()) throw Error(ErrorKind::SynsetNotFound, id.str());
    return it->second.synset;
  }

  const Synset& get(std::string_view id_text) const { return get(SynsetId::parse(id_text)); }

  const Synset* find(const SynsetId& id) const {
    auto it = synsets_.find(id);
    return it == synsets_.end() ? nullptr : &it->second.synset;
  }

  // Lowercased single lemma tokens -> synsets carrying that token.
  const std::map<std::string, std::vector<SynsetId>, std::less<>>& lemma_index() const {
    return index_;
  }

  std::vector<SynsetId> ids() const {
    std::vector<SynsetId> out;
    out.reserve(synsets_.size());
    for (const auto& [id, _] : synsets_) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
  }

  // A synset matches when one of its lemmas, read from the start of any
  // underscore-delimited token, begins with the normalized query. For a
  // single-word query that is plain token-prefix matching.
  SearchResultPage search(std::string_view query, std::size_t limit = kDefaultSearchLimit) const {
    const std::string q = normalize_query(query);
    if (limit == 0) throw Error(ErrorKind::InvalidLimit, "limit must be >= 1");

    const auto sep = q.find('_');
    const std::string_view head = std::string_view(q).substr(0, sep);

    std::vector<SynsetId> candidates;
    for (auto it = index_.lower_bound(head); it != index_.end() && it->first.starts_with(head);
         ++it) {
      if (sep != std::string::npos && it->first != head) continue;
      candidates.insert(candidates.end(), it->second.begin(), it->second.end());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::array<std::vector<const Entry*>, 4> buckets;
    std::size_t total = 0;
    for (const auto& id : candidates) {
      const Entry& e = synsets_.at(id);
      if (sep != std::string::npos && !matches(e, q)) continue;
      buckets[static_cast<std::size_t>(id.type)].push_back(&e);
      ++total;
    }

    SearchResultPage page;
    page.total_matches = total;
    std::size_t remaining = limit;
    for (LexicalType t : kSearchGroupOrder) {
      auto& bucket = buckets[static_cast<std::size_t>(t)];
      if (bucket.empty() || remaining == 0) continue;
      std::sort(bucket.begin(), bucket.end(), [](const Entry* a, const Entry* b) {
        if (a->sort_key != b->sort_key) return a->sort_key < b->sort_key;
        return a->synset.id < b->synset.id;
      });
      SearchGroup group{t, {}};
      const std::size_t take = std::min(remaining, bucket.size());
      group.synsets.reserve(take);
      for (std::size_t i = 0; i < take; ++i) group.synsets.push_back(bucket[i]->synset);
      remaining -= take;
      page.groups.push_back(std::move(group));
    }
    page.truncated = page.size() < total;
    return page;
  }

  // Case-insensitive display form of the first lemma; the sort key used by
  // search results and annotation listings.
  static std::string sort_key(const Synset& s) {
    return s.lemmas.empty() ? std::string{} : detail::ascii_lower(display_form(s.lemmas.front()));
  }

 private:
  struct Entry {
    Synset synset;
    std::string sort_key;
    std::vector<std::string> lowered;
  };

  static bool matches(const Entry& e, std::string_view q) {
    for (const auto& lemma : e.lowered) {
      for (std::size_t i = 0; i < lemma.size(); ++i) {
        if (i != 0 && lemma[i - 1] != '_') continue;
        if (std::string_view(lemma).substr(i).starts_with(q)) return true;
      }
    }
    return false;
  }

  void add(Synset s) {
    const SynsetId id = s.id;
    Entry e{std::move(s), {}, {}};
    e.sort_key = sort_key(e.synset);
    for (const auto& lemma : e.synset.lemmas) e.lowered.push_back(detail::ascii_lower(lemma));
    for (const auto& lowered : e.lowered) {
      std::size_t start = 0;
      while (start <= lowered.size()) {
        const auto end = std::min(lowered.find('_', start), lowered.size());
        if (end > start) {
          auto& ids = index_[lowered.substr(start, end - start)];
          if (ids.empty() || ids.back() != id) ids.push_back(id);
        }
        start = end + 1;
      }
    }
    auto [it, inserted] = synsets_.emplace(id, std::move(e));
    if (inserted) ++counts_[static_cast<std::size_t>(id.type)];
  }

  std::unordered_map<SynsetId, Entry, SynsetIdHash> synsets_;
  std::map<std::string, std::vector<SynsetId>, std::less<>> index_;
  std::array<std::size_t, 4> counts_{};
  std::vector<std::string> warnings_;
};

}  // namespace gwat
