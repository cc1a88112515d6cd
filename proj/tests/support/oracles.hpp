#pragma once

// Test-only reference implementations. Nothing here calls into the code it
// is used to check: line counting reads raw files, the search oracle scans
// every lemma with its own tokenizer, and the listing oracle sorts raw rows.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gwat/lexicon.hpp"
#include "gwat/timestamp.hpp"

namespace gwat::testing {

inline std::filesystem::path data_dir() { return GWAT_TEST_DATA_DIR; }
inline std::filesystem::path mini_dict() { return data_dir() / "mini_dict"; }
inline std::filesystem::path gaped_manifest() { return data_dir() / "gaped_manifest.txt"; }

// Full WordNet 3.0 dict directory, from the environment or the configure-time
// default. Empty when unavailable.
inline std::optional<std::filesystem::path> wordnet_dict() {
  std::string dir;
  if (const char* env = std::getenv("GWAT_WORDNET_DICT"); env && *env) {
    dir = env;
  } else {
    dir = GWAT_TEST_WORDNET_DICT;
  }
  if (dir.empty() || !std::filesystem::exists(std::filesystem::path(dir) / "data.noun")) {
    return std::nullopt;
  }
  return std::filesystem::path(dir);
}

// Count of lines that are neither blank nor license header ("  " prefix).
inline std::size_t count_data_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r" && line.rfind("  ", 0) != 0) ++n;
  }
  return n;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Query normalization re-derived from the contract: trim, lowercase,
// whitespace runs become one underscore.
inline std::string oracle_normalize(const std::string& q) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : q) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) words.push_back(cur);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) out += (i ? "_" : "") + words[i];
  return out;
}

// Brute force: split every lemma into underscore tokens and test each
// token-aligned tail of the lemma against the normalized query.
inline std::set<SynsetId> oracle_search(const std::vector<Synset>& synsets, const std::string& query) {
  const std::string q = oracle_normalize(query);
  std::set<SynsetId> out;
  for (const auto& s : synsets) {
    for (const auto& lemma : s.lemmas) {
      std::vector<std::string> toks;
      std::string cur;
      for (char c : lower(lemma)) {
        if (c == '_') {
          toks.push_back(cur);
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
      toks.push_back(cur);
      bool hit = false;
      for (std::size_t k = 0; k < toks.size() && !hit; ++k) {
        if (toks[k].empty()) continue;
        std::string tail = toks[k];
        for (std::size_t j = k + 1; j < toks.size(); ++j) tail += "_" + toks[j];
        hit = tail.compare(0, q.size(), q) == 0;
      }
      if (hit) {
        out.insert(s.id);
        break;
      }
    }
  }
  return out;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                               std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz") {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string w(len(rng), ' ');
  for (auto& c : w) c = alphabet[pick(rng)];
  return w;
}

// Gloss text exercising the escaping paths of every export format.
inline std::string nasty_gloss(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces{
      "plain",  "it's",   "\"quoted\"", "a,b",  "line\nbreak", "cr\r\nlf", "''", ";",
      "--",     "(paren", "back\\slash", "tab\there", "x'y'z", "\"", ",", "DROP TABLE x;"};
  std::uniform_int_distribution<std::size_t> n(1, 6);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::string g;
  for (std::size_t i = 0, k = n(rng); i < k; ++i) g += (i ? " " : "") + pieces[pick(rng)];
  return g;
}

// Synthetic synsets with random lemmas, one to three per synset, some multiword.
inline std::vector<Synset> random_synsets(std::mt19937_64& rng, std::size_t count,
                                          bool nasty_glosses = false) {
  std::vector<Synset> out;
  std::set<SynsetId> used;
  std::uniform_int_distribution<int> type(0, 3);
  std::uniform_int_distribution<std::uint32_t> off(0, 99'999'999);
  std::uniform_int_distribution<int> lemmas(1, 3);
  std::uniform_int_distribution<int> words(1, 3);
  while (out.size() < count) {
    Synset s;
    s.lexical_type = static_cast<LexicalType>(type(rng));
    s.id = SynsetId{s.lexical_type, off(rng)};
    if (!used.insert(s.id).second) continue;
    for (int i = 0, k = lemmas(rng); i < k; ++i) {
      std::string lemma;
      for (int j = 0, m = words(rng); j < m; ++j) {
        lemma += (j ? "_" : "") + random_word(rng, 1, 6, "abcdeflmnorstABCDE");
      }
      s.lemmas.push_back(lemma);
    }
    s.gloss = nasty_glosses ? nasty_gloss(rng) : "gloss " + random_word(rng, 3, 10);
    out.push_back(std::move(s));
  }
  return out;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path = std::filesystem::temp_directory_path() / ("gwat-test-" + random_word(rng, 12, 12));
    std::filesystem::create_directories(path);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

// Clock for deterministic timestamps: starts at a fixed instant and advances
// one millisecond per call.
struct StepClock {
  std::shared_ptr<std::int64_t> us = std::make_shared<std::int64_t>(1'700'000'000'000'000);
  Timestamp operator()() const {
    *us += 1000;
    return Timestamp{std::chrono::microseconds{*us}};
  }
};

}  // namespace gwat::testing
