#pragma once

// Annotation store: a single SQLite file holding
//   pictures(name PK)
//   synsets(id PK, lexical_type, first_lemma, gloss)
//   annotations(picture_name FK, synset_id FK, created_at, PK(picture, synset))
// All access goes through one connection guarded by a mutex, so writes are
// serialized and every read sees a committed state.

#include <sqlite3.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwat/catalog.hpp"
#include "gwat/error.hpp"
#include "gwat/lexicon.hpp"
#include "gwat/timestamp.hpp"

namespace gwat {

struct Annotation {
  std::string picture_name;
  SynsetId synset_id;
  Timestamp created_at;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct ListedAnnotation {
  Synset synset;
  Timestamp created_at;
};

struct AnnotationGroup {
  LexicalType lexical_type;
  std::vector<ListedAnnotation> entries;
};

struct AnnotationListing {
  std::string picture;
  std::vector<AnnotationGroup> groups;
  // Stored ids that no longer resolve in the lexicon.
  std::vector<SynsetId> dangling;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.entries.size();
    return n;
  }
};

// Annotation panels list noun, verb, adjective, adverb.
inline constexpr std::array kListingGroupOrder{LexicalType::Noun, LexicalType::Verb,
                                               LexicalType::Adjective, LexicalType::Adverb};

struct StoreStats {
  std::size_t annotations = 0;
  std::size_t pictures = 0;
  std::size_t synsets = 0;

  friend bool operator==(const StoreStats&, const StoreStats&) = default;
};

namespace detail {

class Statement {
 public:
  Statement(sqlite3* db, std::string_view sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) !=
        SQLITE_OK) {
      throw Error(ErrorKind::IoFailure, sqlite3_errmsg(db));
    }
  }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  ~Statement() { sqlite3_finalize(stmt_); }

  Statement& bind(int i, std::string_view v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }

  // True while rows remain; returns the raw result code via rc().
  bool step() {
    rc_ = sqlite3_step(stmt_);
    if (rc_ == SQLITE_ROW) return true;
    if (rc_ == SQLITE_DONE) return false;
    if ((rc_ & 0xff) == SQLITE_CONSTRAINT) return false;
    if (rc_ == SQLITE_CORRUPT || rc_ == SQLITE_NOTADB) {
      throw Error(ErrorKind::CorruptStore, sqlite3_errmsg(db_));
    }
    throw Error(ErrorKind::IoFailure, sqlite3_errmsg(db_));
  }
  int rc() const { return rc_; }

  std::string text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string{};
  }
  std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
  int rc_ = SQLITE_OK;
};

// SQLite tolerates a file cut short of its last page, so check the header's
// page size and page count against the real file length ourselves.
inline void check_file_header(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec || size == 0) return;
  std::ifstream in(path, std::ios::binary);
  std::array<unsigned char, 100> h{};
  if (size < h.size() || !in.read(reinterpret_cast<char*>(h.data()), h.size())) {
    throw Error(ErrorKind::CorruptStore, path.string() + ": file shorter than header");
  }
  static constexpr std::string_view magic{"SQLite format 3\0", 16};
  if (std::string_view(reinterpret_cast<const char*>(h.data()), 16) != magic) {
    throw Error(ErrorKind::CorruptStore, path.string() + ": not a store file");
  }
  std::uint64_t page_size = (std::uint64_t{h[16]} << 8) | h[17];
  if (page_size == 1) page_size = 65536;
  const std::uint64_t page_count = (std::uint64_t{h[28]} << 24) | (std::uint64_t{h[29]} << 16) |
                                   (std::uint64_t{h[30]} << 8) | h[31];
  if (page_size < 512 || size % page_size != 0 || page_count * page_size > size) {
    throw Error(ErrorKind::CorruptStore, path.string() + ": truncated");
  }
}

}  // namespace detail

class Store {
 public:
  using Clock = std::function<Timestamp()>;

  explicit Store(const std::filesystem::path& path, Clock clock = now_utc)
      : path_(path), clock_(std::move(clock)) {
    detail::check_file_header(path);
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE,
                        nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "cannot open";
      sqlite3_close(db_);
      throw Error(ErrorKind::IoFailure, path.string() + ": " + msg);
    }
    try {
      init();
    } catch (...) {
      sqlite3_close(db_);
      throw;
    }
  }

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
  ~Store() { sqlite3_close(db_); }

  const std::filesystem::path& path() const { return path_; }

  // Inserts the single link row. Both ends must resolve right now.
  Annotation attach(const Catalog& catalog, const Lexicon& lexicon, std::string_view picture,
                    const SynsetId& id) {
    if (!catalog.contains(picture)) throw Error(ErrorKind::UnknownPicture, std::string(picture));
    const Synset* synset = lexicon.find(id);
    if (!synset) throw Error(ErrorKind::UnknownSynset, id.str());

    std::lock_guard lock(mu_);
    Transaction tx(*this);
    const std::string id_text = id.str();
    detail::Statement(db_, "INSERT OR IGNORE INTO pictures(name) VALUES (?1)")
        .bind(1, picture)
        .step();
    detail::Statement(db_,
                      "INSERT OR IGNORE INTO synsets(id, lexical_type, first_lemma, gloss) "
                      "VALUES (?1, ?2, ?3, ?4)")
        .bind(1, id_text)
        .bind(2, std::string_view(&id_text[0], 1))
        .bind(3, synset->lemmas.front())
        .bind(4, synset->gloss)
        .step();
    const Timestamp ts = clock_();
    detail::Statement insert(
        db_, "INSERT INTO annotations(picture_name, synset_id, created_at) VALUES (?1, ?2, ?3)");
    insert.bind(1, picture).bind(2, id_text).bind(3, ts.time_since_epoch().count());
    insert.step();
    if ((insert.rc() & 0xff) == SQLITE_CONSTRAINT) {
      throw Error(ErrorKind::AlreadyAttached, std::string(picture) + " " + id_text);
    }
    tx.commit();
    return Annotation{std::string(picture), id, ts};
  }

  // Permanent removal. Picture and synset rows left unreferenced go too, so
  // attach followed by detach leaves the file contents as they were.
  void detach(std::string_view picture, const SynsetId& id) {
    std::lock_guard lock(mu_);
    Transaction tx(*this);
    const std::string id_text = id.str();
    detail::Statement(db_, "DELETE FROM annotations WHERE picture_name = ?1 AND synset_id = ?2")
        .bind(1, picture)
        .bind(2, id_text)
        .step();
    if (sqlite3_changes(db_) == 0) {
      throw Error(ErrorKind::NotAttached, std::string(picture) + " " + id_text);
    }
    detail::Statement(db_,
                      "DELETE FROM pictures WHERE name = ?1 AND NOT EXISTS "
                      "(SELECT 1 FROM annotations WHERE picture_name = ?1)")
        .bind(1, picture)
        .step();
    detail::Statement(db_,
                      "DELETE FROM synsets WHERE id = ?1 AND NOT EXISTS "
                      "(SELECT 1 FROM annotations WHERE synset_id = ?1)")
        .bind(1, id_text)
        .step();
    tx.commit();
  }

  // All rows, ordered by (picture_name, synset_id).
  std::vector<Annotation> annotations() const {
    std::lock_guard lock(mu_);
    return select_annotations(
        "SELECT picture_name, synset_id, created_at FROM annotations "
        "ORDER BY picture_name, synset_id",
        {});
  }

  std::vector<Annotation> annotations_for(std::string_view picture) const {
    std::lock_guard lock(mu_);
    return select_annotations(
        "SELECT picture_name, synset_id, created_at FROM annotations "
        "WHERE picture_name = ?1 ORDER BY synset_id",
        picture);
  }

  // Unknown or unannotated pictures give an empty listing. Ids that the
  // lexicon cannot resolve are reported in `dangling` rather than failing.
  AnnotationListing list_for_picture(const Lexicon& lexicon, std::string_view picture) const {
    AnnotationListing listing;
    listing.picture = std::string(picture);
    std::array<std::vector<ListedAnnotation>, 4> buckets;
    for (auto& a : annotations_for(picture)) {
      const Synset* s = lexicon.find(a.synset_id);
      if (!s) {
        listing.dangling.push_back(a.synset_id);
        continue;
      }
      buckets[static_cast<std::size_t>(s->lexical_type)].push_back({*s, a.created_at});
    }
    for (LexicalType t : kListingGroupOrder) {
      auto& b = buckets[static_cast<std::size_t>(t)];
      if (b.empty()) continue;
      std::vector<std::pair<std::string, ListedAnnotation>> keyed;
      keyed.reserve(b.size());
      for (auto& e : b) keyed.emplace_back(Lexicon::sort_key(e.synset), std::move(e));
      std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        return x.second.synset.id < y.second.synset.id;
      });
      AnnotationGroup group{t, {}};
      for (auto& [_, e] : keyed) group.entries.push_back(std::move(e));
      listing.groups.push_back(std::move(group));
    }
    return listing;
  }

  StoreStats stats() const {
    std::lock_guard lock(mu_);
    detail::Statement q(db_,
                        "SELECT COUNT(*), COUNT(DISTINCT picture_name), COUNT(DISTINCT synset_id) "
                        "FROM annotations");
    q.step();
    return StoreStats{static_cast<std::size_t>(q.int64(0)), static_cast<std::size_t>(q.int64(1)),
                      static_cast<std::size_t>(q.int64(2))};
  }

 private:
  static constexpr int kSchemaVersion = 1;

  class Transaction {
   public:
    explicit Transaction(Store& s) : s_(s) { s_.exec("BEGIN IMMEDIATE"); }
    Transaction(const Transaction&) = delete;
    Transaction& operator=(const Transaction&) = delete;
    ~Transaction() {
      if (!done_) sqlite3_exec(s_.db_, "ROLLBACK", nullptr, nullptr, nullptr);
    }
    void commit() {
      s_.exec("COMMIT");
      done_ = true;
    }

   private:
    Store& s_;
    bool done_ = false;
  };

  void exec(const char* sql) {
    char* err = nullptr;
    const int rc = sqlite3_exec(db_, sql, nullptr, nullptr, &err);
    if (rc != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      if (rc == SQLITE_CORRUPT || rc == SQLITE_NOTADB) {
        throw Error(ErrorKind::CorruptStore, path_.string() + ": " + msg);
      }
      throw Error(ErrorKind::IoFailure, path_.string() + ": " + msg);
    }
  }

  void init() {
    exec("PRAGMA foreign_keys = ON");
    exec("PRAGMA journal_mode = WAL");
    exec("PRAGMA synchronous = NORMAL");
    {
      detail::Statement check(db_, "PRAGMA quick_check");
      if (!check.step() || check.text(0) != "ok") {
        throw Error(ErrorKind::CorruptStore, path_.string() + ": integrity check failed");
      }
    }
    detail::Statement v(db_, "PRAGMA user_version");
    v.step();
    const auto version = v.int64(0);
    if (version == kSchemaVersion) return;
    if (version != 0) {
      throw Error(ErrorKind::CorruptStore,
                  path_.string() + ": unknown schema version " + std::to_string(version));
    }
    exec(
        "BEGIN;"
        "CREATE TABLE pictures (name TEXT NOT NULL PRIMARY KEY);"
        "CREATE TABLE synsets (id TEXT NOT NULL PRIMARY KEY, lexical_type TEXT NOT NULL,"
        " first_lemma TEXT NOT NULL, gloss TEXT NOT NULL);"
        "CREATE TABLE annotations ("
        " picture_name TEXT NOT NULL REFERENCES pictures(name),"
        " synset_id TEXT NOT NULL REFERENCES synsets(id),"
        " created_at INTEGER NOT NULL,"
        " PRIMARY KEY (picture_name, synset_id));"
        "CREATE INDEX annotations_by_synset ON annotations(synset_id);"
        "PRAGMA user_version = 1;"
        "COMMIT;");
  }

  std::vector<Annotation> select_annotations(const char* sql, std::string_view picture) const {
    detail::Statement q(db_, sql);
    if (!picture.empty()) q.bind(1, picture);
    std::vector<Annotation> out;
    while (q.step()) {
      out.push_back(Annotation{q.text(0), SynsetId::parse(q.text(1)),
                               Timestamp{std::chrono::microseconds{q.int64(2)}}});
    }
    return out;
  }

  std::filesystem::path path_;
  Clock clock_;
  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace gwat
