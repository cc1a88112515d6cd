#pragma once

// Portable dumps of the annotation store: an SQL script (three CREATE TABLE
// statements followed by INSERTs, annotations foreign-keyed to pictures and
// synsets), CSV and JSON. Only pictures and synsets referenced by some
// annotation are emitted. Rows are always sorted, so the same store content
// gives the same bytes regardless of insertion order.
//
// import_sql() reads back exactly the subset render_sql() writes.

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "gwat/error.hpp"
#include "gwat/lexicon.hpp"
#include "gwat/store.hpp"
#include "gwat/timestamp.hpp"
#include "json.hpp"

namespace gwat {

struct SynsetRow {
  LexicalType lexical_type = LexicalType::Noun;
  std::string first_lemma;
  std::string gloss;

  friend bool operator==(const SynsetRow&, const SynsetRow&) = default;
};

struct AnnotationRow {
  std::string picture_name;
  SynsetId synset_id;
  std::string created_at;  // RFC 3339 UTC

  friend bool operator==(const AnnotationRow&, const AnnotationRow&) = default;
};

// Everything an export carries, independent of the output format.
struct ExportImage {
  std::set<std::string> pictures;
  std::map<SynsetId, SynsetRow> synsets;
  std::vector<AnnotationRow> annotations;  // sorted by (picture_name, synset_id)

  std::set<std::pair<std::string, SynsetId>> pairs() const {
    std::set<std::pair<std::string, SynsetId>> out;
    for (const auto& a : annotations) out.emplace(a.picture_name, a.synset_id);
    return out;
  }

  friend bool operator==(const ExportImage&, const ExportImage&) = default;
};

enum class ExportFormat { Sql, Csv, Json };

inline ExportFormat parse_export_format(std::string_view name) {
  if (name == "sql") return ExportFormat::Sql;
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw Error(ErrorKind::UnknownFormat, std::string(name));
}

inline std::string_view content_type(ExportFormat f) {
  switch (f) {
    case ExportFormat::Sql: return "application/sql";
    case ExportFormat::Csv: return "text/csv";
    case ExportFormat::Json: return "application/json";
  }
  return "application/octet-stream";
}

// Takes one consistent snapshot of the store; fails listing every stored id
// the lexicon cannot resolve.
inline ExportImage build_export_image(const Store& store, const Lexicon& lexicon) {
  ExportImage image;
  std::set<SynsetId> dangling;
  for (auto& a : store.annotations()) {
    const Synset* s = lexicon.find(a.synset_id);
    if (!s) {
      dangling.insert(a.synset_id);
      continue;
    }
    image.pictures.insert(a.picture_name);
    image.synsets.try_emplace(a.synset_id, SynsetRow{s->lexical_type, s->lemmas.front(), s->gloss});
    image.annotations.push_back({a.picture_name, a.synset_id, to_rfc3339(a.created_at)});
  }
  if (!dangling.empty()) {
    std::string ids;
    for (const auto& id : dangling) ids += (ids.empty() ? "" : ", ") + id.str();
    throw Error(ErrorKind::DanglingSynset, ids);
  }
  return image;
}

namespace detail {

inline std::string sql_quote(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('\'');
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

inline constexpr std::string_view kSqlSchema =
    "CREATE TABLE pictures (\n"
    "    name VARCHAR(255) NOT NULL,\n"
    "    PRIMARY KEY (name)\n"
    ");\n"
    "CREATE TABLE synsets (\n"
    "    id CHAR(9) NOT NULL,\n"
    "    lexical_type CHAR(1) NOT NULL,\n"
    "    first_lemma VARCHAR(255) NOT NULL,\n"
    "    gloss VARCHAR(4000) NOT NULL,\n"
    "    PRIMARY KEY (id)\n"
    ");\n"
    "CREATE TABLE annotations (\n"
    "    picture_name VARCHAR(255) NOT NULL,\n"
    "    synset_id CHAR(9) NOT NULL,\n"
    "    created_at VARCHAR(32) NOT NULL,\n"
    "    PRIMARY KEY (picture_name, synset_id),\n"
    "    FOREIGN KEY (picture_name) REFERENCES pictures (name),\n"
    "    FOREIGN KEY (synset_id) REFERENCES synsets (id)\n"
    ");\n";

inline std::string render_sql(const ExportImage& image) {
  std::string out = "-- GWAT annotation export\n";
  out += kSqlSchema;
  for (const auto& p : image.pictures) {
    out += "INSERT INTO pictures (name) VALUES (" + detail::sql_quote(p) + ");\n";
  }
  for (const auto& [id, row] : image.synsets) {
    out += "INSERT INTO synsets (id, lexical_type, first_lemma, gloss) VALUES (" +
           detail::sql_quote(id.str()) + ", '" + type_tag(row.lexical_type) + "', " +
           detail::sql_quote(row.first_lemma) + ", " + detail::sql_quote(row.gloss) + ");\n";
  }
  for (const auto& a : image.annotations) {
    out += "INSERT INTO annotations (picture_name, synset_id, created_at) VALUES (" +
           detail::sql_quote(a.picture_name) + ", " + detail::sql_quote(a.synset_id.str()) + ", " +
           detail::sql_quote(a.created_at) + ");\n";
  }
  return out;
}

// RFC 4180: CRLF record separators, fields quoted only when needed.
inline std::string render_csv(const ExportImage& image) {
  std::string out = "picture_name,synset_id,lexical_type,first_lemma,gloss,created_at\r\n";
  for (const auto& a : image.annotations) {
    const auto& s = image.synsets.at(a.synset_id);
    out += detail::csv_field(a.picture_name) + ',' + a.synset_id.str() + ',' +
           std::string(type_name(s.lexical_type)) + ',' + detail::csv_field(s.first_lemma) + ',' +
           detail::csv_field(s.gloss) + ',' + a.created_at + "\r\n";
  }
  return out;
}

inline std::string render_json(const ExportImage& image) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& a : image.annotations) {
    const auto& s = image.synsets.at(a.synset_id);
    doc[a.picture_name].push_back({{"synset_id", a.synset_id.str()},
                                   {"lexical_type", type_name(s.lexical_type)},
                                   {"first_lemma", s.first_lemma},
                                   {"gloss", s.gloss},
                                   {"created_at", a.created_at}});
  }
  return doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

inline std::string render(const ExportImage& image, ExportFormat f) {
  switch (f) {
    case ExportFormat::Sql: return render_sql(image);
    case ExportFormat::Csv: return render_csv(image);
    case ExportFormat::Json: return render_json(image);
  }
  return {};
}

inline std::string export_sql(const Store& store, const Lexicon& lexicon) {
  return render_sql(build_export_image(store, lexicon));
}
inline std::string export_csv(const Store& store, const Lexicon& lexicon) {
  return render_csv(build_export_image(store, lexicon));
}
inline std::string export_json(const Store& store, const Lexicon& lexicon) {
  return render_json(build_export_image(store, lexicon));
}

namespace detail {

struct SqlToken {
  enum Kind { Word, String, Punct } kind;
  std::string text;
  std::size_t line;
};

inline std::vector<SqlToken> tokenize_sql(std::string_view script) {
  std::vector<SqlToken> out;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < script.size()) {
    const char c = script[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '-' && i + 1 < script.size() && script[i + 1] == '-') {
      while (i < script.size() && script[i] != '\n') ++i;
    } else if (c == '\'') {
      const std::size_t start_line = line;
      std::string value;
      ++i;
      for (;;) {
        if (i >= script.size()) {
          throw Error(ErrorKind::UnterminatedString, "line " + std::to_string(start_line));
        }
        if (script[i] == '\'') {
          if (i + 1 < script.size() && script[i + 1] == '\'') {
            value.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (script[i] == '\n') ++line;
        value.push_back(script[i++]);
      }
      out.push_back({SqlToken::String, std::move(value), start_line});
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < script.size() &&
             (std::isalnum(static_cast<unsigned char>(script[i])) || script[i] == '_')) {
        ++i;
      }
      out.push_back({SqlToken::Word, std::string(script.substr(start, i - start)), line});
    } else if (c == '(' || c == ')' || c == ',' || c == ';') {
      out.push_back({SqlToken::Punct, std::string(1, c), line});
      ++i;
    } else {
      throw Error(ErrorKind::UnsupportedStatement,
                  "line " + std::to_string(line) + ": unexpected character '" + c + "'");
    }
  }
  return out;
}

inline bool keyword_is(const SqlToken& t, std::string_view kw) {
  if (t.kind != SqlToken::Word || t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
  }
  return true;
}

class SqlImporter {
 public:
  ExportImage run(std::string_view script) {
    const auto tokens = tokenize_sql(script);
    std::size_t i = 0;
    while (i < tokens.size()) {
      std::size_t end = i;
      while (end < tokens.size() && !(tokens[end].kind == SqlToken::Punct && tokens[end].text == ";")) {
        ++end;
      }
      if (end == tokens.size()) unsupported(tokens[i].line, "statement not terminated by ';'");
      statement(std::vector<SqlToken>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(end)),
                tokens[i].line);
      i = end + 1;
    }
    std::sort(image_.annotations.begin(), image_.annotations.end(),
              [](const AnnotationRow& a, const AnnotationRow& b) {
                return std::tie(a.picture_name, a.synset_id) < std::tie(b.picture_name, b.synset_id);
              });
    return std::move(image_);
  }

 private:
  [[noreturn]] static void unsupported(std::size_t line, const std::string& why) {
    throw Error(ErrorKind::UnsupportedStatement, "line " + std::to_string(line) + ": " + why);
  }

  // Reads "( a , b , c )" starting at toks[i]; returns the items, one token
  // each, and advances i past the closing parenthesis.
  static std::vector<const SqlToken*> simple_list(const std::vector<SqlToken>& toks, std::size_t& i,
                                                  std::size_t line) {
    std::vector<const SqlToken*> items;
    if (i >= toks.size() || toks[i].text != "(" || toks[i].kind != SqlToken::Punct) {
      unsupported(line, "expected '('");
    }
    ++i;
    for (;;) {
      if (i >= toks.size() || toks[i].kind == SqlToken::Punct) unsupported(line, "expected value");
      items.push_back(&toks[i++]);
      if (i >= toks.size() || toks[i].kind != SqlToken::Punct) unsupported(line, "expected ',' or ')'");
      if (toks[i].text == ")") {
        ++i;
        return items;
      }
      if (toks[i].text != ",") unsupported(line, "expected ',' or ')'");
      ++i;
    }
  }

  void statement(const std::vector<SqlToken>& toks, std::size_t line) {
    if (toks.size() >= 2 && keyword_is(toks[0], "CREATE") && keyword_is(toks[1], "TABLE")) {
      create_table(toks, line);
    } else if (toks.size() >= 2 && keyword_is(toks[0], "INSERT") && keyword_is(toks[1], "INTO")) {
      insert(toks, line);
    } else {
      unsupported(line, "only CREATE TABLE and INSERT INTO are supported");
    }
  }

  static const std::vector<std::string>& expected_columns(const std::string& table) {
    static const std::map<std::string, std::vector<std::string>> kColumns{
        {"pictures", {"name"}},
        {"synsets", {"id", "lexical_type", "first_lemma", "gloss"}},
        {"annotations", {"picture_name", "synset_id", "created_at"}},
    };
    static const std::vector<std::string> none;
    auto it = kColumns.find(table);
    return it == kColumns.end() ? none : it->second;
  }

  void create_table(const std::vector<SqlToken>& toks, std::size_t line) {
    if (toks.size() < 4 || toks[2].kind != SqlToken::Word) unsupported(line, "malformed CREATE TABLE");
    const std::string& table = toks[2].text;
    const auto& expected = expected_columns(table);
    if (expected.empty()) unsupported(line, "unknown table '" + table + "'");
    if (columns_.count(table)) unsupported(line, "table '" + table + "' created twice");
    if (toks[3].text != "(" || toks.back().text != ")") unsupported(line, "malformed CREATE TABLE");

    // Split the body on top-level commas; each item is a column definition
    // or a table constraint.
    std::vector<std::string> cols;
    std::size_t depth = 0;
    bool item_start = true;
    for (std::size_t i = 4; i + 1 < toks.size(); ++i) {
      const auto& t = toks[i];
      if (t.kind == SqlToken::Punct && t.text == "(") ++depth;
      if (t.kind == SqlToken::Punct && t.text == ")") {
        if (depth == 0) unsupported(line, "unbalanced parentheses");
        --depth;
      }
      if (depth == 0 && t.kind == SqlToken::Punct && t.text == ",") {
        item_start = true;
        continue;
      }
      if (item_start) {
        item_start = false;
        if (t.kind != SqlToken::Word) unsupported(line, "malformed column definition");
        if (keyword_is(t, "PRIMARY") || keyword_is(t, "FOREIGN") || keyword_is(t, "UNIQUE") ||
            keyword_is(t, "CONSTRAINT")) {
          continue;
        }
        cols.push_back(t.text);
      }
    }
    if (depth != 0) unsupported(line, "unbalanced parentheses");
    if (cols != expected) unsupported(line, "unexpected columns for table '" + table + "'");
    columns_[table] = cols;
  }

  void insert(const std::vector<SqlToken>& toks, std::size_t line) {
    if (toks.size() < 3 || toks[2].kind != SqlToken::Word) unsupported(line, "malformed INSERT");
    const std::string& table = toks[2].text;
    auto cit = columns_.find(table);
    if (cit == columns_.end()) unsupported(line, "INSERT into undeclared table '" + table + "'");
    std::size_t i = 3;
    const auto names = simple_list(toks, i, line);
    if (i >= toks.size() || !keyword_is(toks[i], "VALUES")) unsupported(line, "expected VALUES");
    ++i;
    const auto values = simple_list(toks, i, line);
    if (i != toks.size()) unsupported(line, "trailing tokens after VALUES list");
    if (names.size() != values.size()) unsupported(line, "column/value count mismatch");

    std::map<std::string, std::string> row;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k]->kind != SqlToken::Word) unsupported(line, "bad column name");
      if (values[k]->kind != SqlToken::String) unsupported(line, "only string literals are supported");
      row[names[k]->text] = values[k]->text;
    }
    std::vector<std::string> sorted_cols = cit->second;
    std::sort(sorted_cols.begin(), sorted_cols.end());
    std::vector<std::string> given;
    for (const auto& [k, _] : row) given.push_back(k);
    if (given != sorted_cols || row.size() != names.size()) {
      unsupported(line, "INSERT must name every column of '" + table + "' once");
    }

    const std::string where = "line " + std::to_string(line) + ": ";
    if (table == "pictures") {
      if (!image_.pictures.insert(row["name"]).second) {
        throw Error(ErrorKind::DuplicateRow, where + "picture " + row["name"]);
      }
    } else if (table == "synsets") {
      const auto id = SynsetId::parse(row["id"]);
      const auto& tag = row["lexical_type"];
      if (tag.size() != 1 || tag[0] != type_tag(id.type)) {
        throw Error(ErrorKind::InvalidIdFormat, where + "lexical_type '" + tag + "' for " + id.str());
      }
      if (!image_.synsets.try_emplace(id, SynsetRow{id.type, row["first_lemma"], row["gloss"]}).second) {
        throw Error(ErrorKind::DuplicateRow, where + "synset " + id.str());
      }
    } else {
      const auto id = SynsetId::parse(row["synset_id"]);
      const auto& pic = row["picture_name"];
      if (!image_.pictures.count(pic)) {
        throw Error(ErrorKind::ForeignKeyViolation, where + "picture '" + pic + "' not declared");
      }
      if (!image_.synsets.count(id)) {
        throw Error(ErrorKind::ForeignKeyViolation, where + "synset " + id.str() + " not declared");
      }
      if (!seen_.emplace(pic, id).second) {
        throw Error(ErrorKind::DuplicateRow, where + "annotation " + pic + " " + id.str());
      }
      image_.annotations.push_back({pic, id, row["created_at"]});
    }
  }

  ExportImage image_;
  std::map<std::string, std::vector<std::string>> columns_;
  std::set<std::pair<std::string, SynsetId>> seen_;
};

}  // namespace detail

// Rebuilds an export image from a script produced by render_sql().
inline ExportImage import_sql(std::string_view script) {
  return detail::SqlImporter{}.run(script);
}

}  // namespace gwat
