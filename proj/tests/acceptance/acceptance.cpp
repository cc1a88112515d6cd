// Acceptance gate. Each check prints one line, PASS or FAIL, followed by a
// short measurement. Exit status is non-zero when any check fails.

#include <atomic>
#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "gwat/gwat.hpp"
#include "support/oracles.hpp"

using namespace gwat;
namespace gt = gwat::testing;
using nlohmann::json;

namespace {

// Pinned thresholds.
constexpr double kMaxLoadSeconds = 10.0;
constexpr std::size_t kMinSynsets = 100'000;
constexpr std::size_t kSearchSubLexicon = 500;
constexpr int kSearchQueries = 1000;
constexpr std::size_t kManifestSize = 730;
constexpr int kStoreSequences = 10'000;
constexpr int kExportStores = 200;
constexpr int kApiScenarios = 100;

struct Check {
  std::string name;
  std::function<std::string()> run;  // returns a detail line; throws Failure on miss
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  throw Failure("expected an error");
}

std::shared_ptr<const Lexicon> g_full;

const Lexicon& full_lexicon() {
  if (!g_full) throw Failure("WordNet dict not loaded");
  return *g_full;
}

Catalog gaped_catalog() {
  std::ifstream in(gt::gaped_manifest());
  return Catalog::from_manifest(in);
}

// ---- checks -----------------------------------------------------------------

std::string wordnet_load() {
  const auto dict = gt::wordnet_dict();
  require(dict.has_value(), "set GWAT_WORDNET_DICT to a WordNet 3.0 dict directory");
  const auto t0 = std::chrono::steady_clock::now();
  std::shared_ptr<const Lexicon> lex;
  try {
    lex = std::make_shared<const Lexicon>(Lexicon::load(*dict));
  } catch (const MalformedLine& e) {
    throw Failure(std::string("malformed line: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream out;
  std::size_t total = 0;
  for (auto t : kLexicalTypes) {
    const auto expected = gt::count_data_lines(*dict / std::string(data_file_name(t)));
    require(lex->count(t) == expected, std::string(type_name(t)) + " count " +
                                           std::to_string(lex->count(t)) + " != " +
                                           std::to_string(expected));
    total += expected;
    out << type_name(t) << "=" << lex->count(t) << " ";
  }
  require(lex->size() == total, "total mismatch");
  require(total > kMinSynsets, "fewer than " + std::to_string(kMinSynsets) + " synsets");
  require(secs < kMaxLoadSeconds, "load took " + std::to_string(secs) + " s");
  g_full = lex;
  out << "total=" << total << " load=" << secs << "s";
  return out.str();
}

std::string search_oracle() {
  const auto& full = full_lexicon();
  std::mt19937_64 rng(20240301);
  auto ids = full.ids();
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<Synset> sample;
  for (std::size_t i = 0; i < kSearchSubLexicon; ++i) sample.push_back(full.get(ids[i]));
  const auto lex = Lexicon::from_synsets(sample);

  const std::map<LexicalType, int> rank{{LexicalType::Noun, 0},
                                        {LexicalType::Adjective, 1},
                                        {LexicalType::Verb, 2},
                                        {LexicalType::Adverb, 3}};
  std::size_t nonempty = 0;
  for (int i = 0; i < kSearchQueries; ++i) {
    std::string query;
    if (i % 2 == 0) {
      // A prefix of a random word from a sampled lemma, sometimes upper-cased
      // or padded, so most queries have hits.
      const auto& s = sample[rng() % sample.size()];
      std::string lemma = s.lemmas[rng() % s.lemmas.size()];
      const auto cut = std::max<std::size_t>(1, rng() % (lemma.size() + 1));
      query = lemma.substr(0, cut);
      std::replace(query.begin(), query.end(), '_', ' ');
      if (rng() % 3 == 0) query = "  " + gt::lower(query) + " ";
      if (rng() % 4 == 0) {
        for (auto& c : query) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
    } else {
      query = gt::random_word(rng, 1, 3);
    }
    if (gt::oracle_normalize(query).empty()) continue;
    const auto page = lex.search(query, kUnlimited);
    std::set<SynsetId> got;
    int last_rank = -1;
    for (const auto& g : page.groups) {
      require(rank.at(g.lexical_type) > last_rank, "group order wrong for '" + query + "'");
      last_rank = rank.at(g.lexical_type);
      for (const auto& s : g.synsets) {
        require(s.lexical_type == g.lexical_type, "synset in wrong group");
        got.insert(s.id);
      }
    }
    const auto expected = gt::oracle_search(sample, query);
    require(got == expected, "result set differs from brute force for '" + query + "'");
    require(page.total_matches == expected.size() && !page.truncated, "counts wrong");
    if (!got.empty()) ++nonempty;
  }
  return std::to_string(kSearchQueries) + " queries over " + std::to_string(kSearchSubLexicon) +
         " synsets, " + std::to_string(nonempty) + " with hits";
}

std::string navigation() {
  const auto cat = gaped_catalog();
  require(cat.size() == kManifestSize, "catalog size " + std::to_string(cat.size()));
  require(cat.first().filename == "A001.bmp", "first");
  require(cat.last().filename == "Sp160.bmp", "last");
  require(cat.prev(cat.prev(cat.find("P033.bmp"))).filename == "P031.bmp", "prev(prev(P033))");
  require(cat.next(cat.find("Sp160.bmp")).filename == "A001.bmp", "next(Sp160) wrap");
  for (const auto& start : cat.entries()) {
    PictureRef cur = start;
    for (std::size_t i = 0; i < cat.size(); ++i) cur = cat.next(cur);
    require(cur == start, "cycle from " + start.filename);
  }
  return "730 pictures, every " + std::to_string(kManifestSize) + "-step cycle returns home";
}

std::string store_model() {
  const auto& full = full_lexicon();
  const auto cat = gaped_catalog();
  gt::TempDir dir;
  const auto path = dir / "store.db";
  std::mt19937_64 rng(77);
  auto ids = full.ids();
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(40);  // small pools so duplicates and detaches of live rows are common
  std::vector<std::string> pics;
  for (std::size_t i = 0; i < 12; ++i) pics.push_back(cat.entries()[rng() % cat.size()].filename);

  std::map<std::pair<std::string, SynsetId>, Timestamp> model;
  auto store = std::make_unique<Store>(path);
  std::size_t dups = 0, misses = 0, reopens = 0;
  for (int step = 0; step < kStoreSequences; ++step) {
    const auto& p = pics[rng() % pics.size()];
    const auto& id = ids[rng() % ids.size()];
    const auto key = std::make_pair(p, id);
    switch (rng() % 5) {
      case 0:
      case 1:
        if (model.count(key)) {
          require(kind_of([&] { store->attach(cat, full, p, id); }) == ErrorKind::AlreadyAttached,
                  "duplicate attach");
          ++dups;
        } else {
          model[key] = store->attach(cat, full, p, id).created_at;
        }
        break;
      case 2:
      case 3:
        if (model.erase(key)) {
          store->detach(p, id);
        } else {
          require(kind_of([&] { store->detach(p, id); }) == ErrorKind::NotAttached, "detach miss");
          ++misses;
        }
        break;
      default:
        if (rng() % 20 == 0) {
          store.reset();
          store = std::make_unique<Store>(path);
          ++reopens;
        }
    }
    if (step % 500 == 0 || step + 1 == kStoreSequences) {
      const auto rows = store->annotations();
      require(rows.size() == model.size(), "row count differs at step " + std::to_string(step));
      for (const auto& a : rows) {
        auto it = model.find({a.picture_name, a.synset_id});
        require(it != model.end() && it->second == a.created_at,
                "row mismatch at step " + std::to_string(step));
      }
      std::set<std::string> mp;
      std::set<SynsetId> ms;
      for (const auto& [k, _] : model) {
        mp.insert(k.first);
        ms.insert(k.second);
      }
      require(store->stats() == StoreStats{model.size(), mp.size(), ms.size()}, "stats");
    }
  }

  // Referential integrity, checked from a second connection.
  {
    sqlite3* raw = nullptr;
    require(sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READONLY, nullptr) == SQLITE_OK, "open");
    sqlite3_stmt* st = nullptr;
    sqlite3_prepare_v2(raw, "PRAGMA foreign_key_check", -1, &st, nullptr);
    const bool clean = sqlite3_step(st) == SQLITE_DONE;
    sqlite3_finalize(st);
    sqlite3_close(raw);
    require(clean, "foreign_key_check reported rows");
  }

  // Concurrent duplicate attach: exactly one winner.
  const auto& p = cat.first().filename;
  const auto id = ids[0];
  if (model.count({p, id})) store->detach(p, id);
  std::atomic<int> ok{0}, dup{0}, other{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 16; ++i) {
    threads.emplace_back([&] {
      try {
        store->attach(cat, full, p, id);
        ++ok;
      } catch (const Error& e) {
        (e.kind() == ErrorKind::AlreadyAttached ? dup : other)++;
      }
    });
  }
  for (auto& t : threads) t.join();
  require(ok == 1 && dup == 15 && other == 0, "concurrent attach: " + std::to_string(ok.load()) +
                                                  " winners");
  return std::to_string(kStoreSequences) + " ops, " + std::to_string(reopens) + " reopens, " +
         std::to_string(dups) + " duplicates, " + std::to_string(misses) +
         " missing detaches, 1/16 concurrent winner";
}

std::string export_round_trip() {
  const auto cat = gaped_catalog();
  std::mt19937_64 rng(4242);
  std::size_t total_rows = 0;
  for (int round = 0; round < kExportStores; ++round) {
    gt::TempDir dir;
    const auto synsets = gt::random_synsets(rng, 20 + rng() % 40, true);
    const auto lex = Lexicon::from_synsets(synsets);
    Store store(dir / "s.db");
    std::set<std::pair<std::string, SynsetId>> expected;
    const int n = static_cast<int>(rng() % 60);
    for (int k = 0; k < n; ++k) {
      const auto& p = cat.entries()[rng() % cat.size()].filename;
      const auto& id = synsets[rng() % synsets.size()].id;
      if (expected.emplace(p, id).second) store.attach(cat, lex, p, id);
    }
    const auto sql = export_sql(store, lex);
    require(sql.find("CREATE TABLE") != std::string::npos, "no CREATE TABLE");
    require(sql.find("FOREIGN KEY") != std::string::npos, "no FOREIGN KEY");
    require(expected.empty() || sql.find("INSERT INTO") != std::string::npos, "no INSERT");
    const auto back = import_sql(sql);
    require(back.pairs() == expected, "imported pairs differ in round " + std::to_string(round));
    require(render_sql(back) == sql, "re-export not byte-identical in round " + std::to_string(round));
    total_rows += expected.size();
  }
  return std::to_string(kExportStores) + " stores, " + std::to_string(total_rows) + " annotations";
}

std::string api_contract() {
  auto lex = g_full;
  require(lex != nullptr, "WordNet dict not loaded");
  auto cat = std::make_shared<const Catalog>(gaped_catalog());
  gt::TempDir dir;
  Store store(dir / "s.db");
  Api api(lex, cat, store);

  for (auto kind : kAllErrorKinds) {
    const auto e = api_error_for(kind);
    require(!e.error_code.empty() && e.error_code != "internal", "unmapped " + std::string(to_string(kind)));
  }

  std::set<std::string> seen;
  auto expect = [&](const ApiResponse& r, int status, const std::string& code) {
    require(r.status == status, code + ": status " + std::to_string(r.status) + " " + r.body);
    if (!code.empty()) {
      require(json::parse(r.body)["error"] == code, "error code " + r.body);
      seen.insert(code);
    }
  };
  const auto dog = lex->search("dog", 1).groups.at(0).synsets.at(0).id.str();
  const auto attach = [](const std::string& p, const std::string& s) {
    return json{{"picture", p}, {"synset", s}}.dump();
  };

  expect(api.first(), 200, "");
  expect(api.picture("nope.bmp"), 404, "not_found");
  expect(api.image("A001.bmp"), 404, "image_unavailable");
  expect(api.search(" "), 400, "empty_query");
  expect(api.attach(attach("A001.bmp", dog)), 201, "");
  expect(api.attach(attach("A001.bmp", dog)), 409, "already_attached");
  expect(api.attach(attach("nope.bmp", dog)), 404, "unknown_picture");
  expect(api.attach(attach("A001.bmp", "n99999999")), 404, "unknown_synset");
  expect(api.attach(attach("A001.bmp", "dog")), 400, "invalid_id_format");
  expect(api.attach("{"), 400, "bad_request");
  expect(api.detach("A001.bmp", dog), 200, "");
  expect(api.detach("A001.bmp", dog), 404, "not_attached");
  expect(api.export_document("xml"), 400, "unknown_format");
  {
    std::istringstream none("");
    Api empty(lex, std::make_shared<const Catalog>(Catalog::from_manifest(none)), store);
    expect(empty.first(), 404, "empty_catalog");
  }
  {
    store.attach(*cat, *lex, "A001.bmp", SynsetId::parse(dog));
    Api stale(std::make_shared<const Lexicon>(Lexicon::from_synsets({})), cat, store);
    expect(stale.export_document("sql"), 500, "dangling_synset");
    store.detach("A001.bmp", SynsetId::parse(dog));
  }

  {
    gt::TempDir root;
    for (auto c : kCategories) std::filesystem::create_directories(root / std::string(category_code(c)));
    std::ofstream(root / "A" / "A001.bmp", std::ios::binary) << "BMdata";
    Api dir_api(lex, std::make_shared<const Catalog>(Catalog::from_directory(root.path)), store);
    const auto img = dir_api.image("A001.bmp");
    require(img.status == 200 && img.body == "BMdata", "directory-mode image");
    std::filesystem::remove(root / "A" / "A001.bmp");
    expect(dir_api.image("A001.bmp"), 404, "image_unavailable");
  }

  // Randomized scenarios: endpoint body equals the direct module call.
  std::mt19937_64 rng(99);
  const auto ids = lex->ids();
  for (int i = 0; i < kApiScenarios; ++i) {
    const auto& p = cat->entries()[rng() % cat->size()];
    const auto& id = ids[rng() % ids.size()];
    switch (i % 5) {
      case 0:
        require(json::parse(api.next(p.filename).body) == to_json(cat->next(p), cat->size()), "next");
        require(json::parse(api.prev(p.filename).body) == to_json(cat->prev(p), cat->size()), "prev");
        break;
      case 1: {
        const auto q = gt::random_word(rng, 1, 4);
        require(json::parse(api.search(q).body) == to_json(lex->search(q, kDefaultSearchLimit), q),
                "search '" + q + "'");
        break;
      }
      case 2: {
        const auto r = api.attach(attach(p.filename, id.str()));
        require(r.status == 201, "attach " + r.body);
        bool listed = false;
        for (const auto& a : store.annotations_for(p.filename)) {
          listed = listed || (a.synset_id == id && json::parse(r.body) == to_json(a));
        }
        require(listed, "attach body");
        require(json::parse(api.annotations(p.filename).body) ==
                    to_json(store.list_for_picture(*lex, p.filename)),
                "annotations");
        break;
      }
      case 3:
        require(api.export_document("json").body == export_json(store, *lex), "export json");
        require(api.export_document("csv").body == export_csv(store, *lex), "export csv");
        break;
      default: {
        const auto before = store.annotations();
        api.first();
        api.last();
        api.search(id.str().substr(1, 2));
        api.annotations(p.filename);
        require(store.annotations() == before, "read changed state");
      }
    }
  }

  // Same routes over a real socket, bound on an ephemeral loopback port.
  httplib::Server server;
  mount(server, api);
  const int port = server.bind_to_any_port("127.0.0.1");
  require(port > 0, "bind");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto r = client.Get("/api/search?q=dog");
  const bool http_ok = r && r->status == 200 && r->body == api.search("dog").body;
  auto r2 = client.Get("/api/pictures/nope.bmp");
  auto r3 = client.Get("/api/search?q=");
  auto r4 = client.Get("/api/pictures/P033.bmp/prev");
  auto r5 = client.Get("/api/pictures/Sp160.bmp/next");
  const bool http_err = r2 && r2->status == 404 && r3 && r3->status == 400 && r4 &&
                        json::parse(r4->body)["name"] == "P032.bmp" && r5 &&
                        json::parse(r5->body)["name"] == "A001.bmp";
  server.stop();
  t.join();
  require(http_ok && http_err, "http routes");

  return std::to_string(seen.size()) + " error codes exercised, " + std::to_string(kApiScenarios) +
         " randomized scenarios, http ok";
}

}  // namespace

int main() {
  const std::vector<Check> checks{
      {"wordnet-load", wordnet_load},       {"search-matches-brute-force", search_oracle},
      {"picture-navigation", navigation},   {"store-matches-model", store_model},
      {"export-round-trip", export_round_trip}, {"api-contract", api_contract},
  };
  int failed = 0;
  for (const auto& c : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string line;
    bool ok = false;
    try {
      line = c.run();
      ok = true;
    } catch (const std::exception& e) {
      line = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name << ": " << line << " (" << secs << " s)"
              << std::endl;
    if (!ok) ++failed;
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " acceptance checks passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
