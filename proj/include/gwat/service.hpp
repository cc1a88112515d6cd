#pragma once

// JSON/HTTP front end. Api turns each endpoint into a plain function
// returning status + body so it can be exercised without sockets; mount()
// wires those functions onto cpp-httplib routes.

#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "gwat/catalog.hpp"
#include "gwat/error.hpp"
#include "gwat/exporter.hpp"
#include "gwat/lexicon.hpp"
#include "gwat/store.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gwat {

struct ApiError {
  int http_status;
  std::string_view error_code;
};

inline constexpr ApiError api_error_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return {500, "malformed_line"};
    case ErrorKind::MissingFile: return {500, "missing_file"};
    case ErrorKind::SynsetNotFound: return {404, "synset_not_found"};
    case ErrorKind::InvalidIdFormat: return {400, "invalid_id_format"};
    case ErrorKind::EmptyQuery: return {400, "empty_query"};
    case ErrorKind::InvalidLimit: return {400, "invalid_limit"};
    case ErrorKind::MissingRoot: return {500, "missing_root"};
    case ErrorKind::DuplicateFilename: return {500, "duplicate_filename"};
    case ErrorKind::UnknownCategoryPrefix: return {500, "unknown_category_prefix"};
    case ErrorKind::PictureNotFound: return {404, "not_found"};
    case ErrorKind::EmptyCatalog: return {404, "empty_catalog"};
    case ErrorKind::StaleRef: return {404, "stale_ref"};
    case ErrorKind::ImageUnavailable: return {404, "image_unavailable"};
    case ErrorKind::CorruptStore: return {500, "corrupt_store"};
    case ErrorKind::IoFailure: return {500, "io_failure"};
    case ErrorKind::UnknownPicture: return {404, "unknown_picture"};
    case ErrorKind::UnknownSynset: return {404, "unknown_synset"};
    case ErrorKind::AlreadyAttached: return {409, "already_attached"};
    case ErrorKind::NotAttached: return {404, "not_attached"};
    case ErrorKind::DanglingSynset: return {500, "dangling_synset"};
    case ErrorKind::UnsupportedStatement: return {400, "unsupported_statement"};
    case ErrorKind::ForeignKeyViolation: return {400, "foreign_key_violation"};
    case ErrorKind::DuplicateRow: return {400, "duplicate_row"};
    case ErrorKind::UnterminatedString: return {400, "unterminated_string"};
    case ErrorKind::UnknownFormat: return {400, "unknown_format"};
    case ErrorKind::BadRequest: return {400, "bad_request"};
    case ErrorKind::ConfigError: return {500, "config_error"};
  }
  return {500, "internal"};
}

// ---- wire format ----------------------------------------------------------

using nlohmann::json;

inline json to_json(const PictureRef& p, std::size_t total) {
  return {{"name", p.filename},
          {"category", category_code(p.category)},
          {"ordinal", p.ordinal},
          {"total", total}};
}

inline json synset_json(const Synset& s) {
  return {{"id", s.id.str()},
          {"name", s.name()},
          {"lemmas", s.display_lemmas()},
          {"gloss", s.gloss},
          {"lexical_type", type_name(s.lexical_type)}};
}

inline json to_json(const SearchResultPage& page, std::string_view query) {
  json groups = json::array();
  for (const auto& g : page.groups) {
    json items = json::array();
    for (const auto& s : g.synsets) items.push_back(synset_json(s));
    groups.push_back({{"lexical_type", type_name(g.lexical_type)}, {"synsets", std::move(items)}});
  }
  return {{"query", query},
          {"groups", std::move(groups)},
          {"truncated", page.truncated},
          {"total_matches", page.total_matches}};
}

inline json to_json(const AnnotationListing& listing) {
  json groups = json::array();
  for (const auto& g : listing.groups) {
    json items = json::array();
    for (const auto& e : g.entries) {
      json item = synset_json(e.synset);
      item["created_at"] = to_rfc3339(e.created_at);
      items.push_back(std::move(item));
    }
    groups.push_back(
        {{"lexical_type", type_name(g.lexical_type)}, {"annotations", std::move(items)}});
  }
  json dangling = json::array();
  for (const auto& id : listing.dangling) dangling.push_back(id.str());
  return {{"picture", listing.picture}, {"groups", std::move(groups)}, {"dangling", std::move(dangling)}};
}

inline json to_json(const Annotation& a) {
  return {{"picture", a.picture_name},
          {"synset", a.synset_id.str()},
          {"created_at", to_rfc3339(a.created_at)}};
}

inline std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

// ---- endpoints ------------------------------------------------------------

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline ApiResponse error_response(ErrorKind kind, const std::string& message) {
  const auto e = api_error_for(kind);
  return {e.http_status, dump({{"error", e.error_code}, {"message", message}}), "application/json"};
}

inline std::string_view image_content_type(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  return "application/octet-stream";
}

class Api {
 public:
  Api(std::shared_ptr<const Lexicon> lexicon, std::shared_ptr<const Catalog> catalog, Store& store,
      std::size_t search_limit = kDefaultSearchLimit)
      : lexicon_(std::move(lexicon)),
        catalog_(std::move(catalog)),
        store_(store),
        search_limit_(search_limit) {
    if (search_limit_ == 0) throw Error(ErrorKind::InvalidLimit, "search limit must be >= 1");
  }

  ApiResponse first() const {
    return guard([&] { return ok(to_json(catalog_->first(), catalog_->size())); });
  }
  ApiResponse last() const {
    return guard([&] { return ok(to_json(catalog_->last(), catalog_->size())); });
  }
  ApiResponse picture(std::string_view name) const {
    return guard([&] { return ok(to_json(catalog_->find(name), catalog_->size())); });
  }
  ApiResponse next(std::string_view name) const {
    return guard([&] { return ok(to_json(catalog_->next(catalog_->find(name)), catalog_->size())); });
  }
  ApiResponse prev(std::string_view name) const {
    return guard([&] { return ok(to_json(catalog_->prev(catalog_->find(name)), catalog_->size())); });
  }

  // Manifest-mode catalogs have no image files behind them.
  ApiResponse image(std::string_view name) const {
    return guard([&] {
      const auto& ref = catalog_->find(name);
      const auto path = catalog_->image_path(ref);
      if (!path) throw Error(ErrorKind::ImageUnavailable, "running without picture files");
      std::ifstream in(*path, std::ios::binary);
      if (!in) throw Error(ErrorKind::ImageUnavailable, ref.filename);
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return ApiResponse{200, std::move(bytes), std::string(image_content_type(*path))};
    });
  }

  ApiResponse search(std::string_view query) const {
    return guard([&] { return ok(to_json(lexicon_->search(query, search_limit_), query)); });
  }

  // Body: {"picture": "...", "synset": "n00001740"}
  ApiResponse attach(std::string_view body) {
    return guard([&] {
      const json req = json::parse(body, nullptr, false);
      if (req.is_discarded() || !req.is_object() || !req.contains("picture") ||
          !req.contains("synset") || !req["picture"].is_string() || !req["synset"].is_string()) {
        throw Error(ErrorKind::BadRequest, "expected {\"picture\": string, \"synset\": string}");
      }
      const auto id = SynsetId::parse(req["synset"].get<std::string>());
      auto a = store_.attach(*catalog_, *lexicon_, req["picture"].get<std::string>(), id);
      return ApiResponse{201, dump(to_json(a))};
    });
  }

  ApiResponse detach(std::string_view picture, std::string_view synset) {
    return guard([&] {
      store_.detach(picture, SynsetId::parse(synset));
      return ok({{"deleted", true}, {"picture", picture}, {"synset", synset}});
    });
  }

  ApiResponse annotations(std::string_view picture) const {
    return guard([&] { return ok(to_json(store_.list_for_picture(*lexicon_, picture))); });
  }

  ApiResponse export_document(std::string_view format) const {
    return guard([&] {
      const auto f = parse_export_format(format.empty() ? "sql" : format);
      return ApiResponse{200, render(build_export_image(store_, *lexicon_), f),
                         std::string(content_type(f))};
    });
  }

  const Lexicon& lexicon() const { return *lexicon_; }
  const Catalog& catalog() const { return *catalog_; }
  Store& store() { return store_; }

 private:
  static ApiResponse ok(const json& j) { return ApiResponse{200, dump(j)}; }

  template <typename F>
  static ApiResponse guard(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      return error_response(e.kind(), e.detail());
    } catch (const std::exception& e) {
      return ApiResponse{500, dump({{"error", "internal"}, {"message", e.what()}})};
    }
  }

  std::shared_ptr<const Lexicon> lexicon_;
  std::shared_ptr<const Catalog> catalog_;
  Store& store_;
  std::size_t search_limit_;
};

// Registers every /api route on `server`; when `web_root` is given the
// directory is also served under "/".
inline void mount(httplib::Server& server, Api& api,
                  const std::optional<std::filesystem::path>& web_root = std::nullopt) {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/api/pictures/first",
             [&api, reply](const httplib::Request&, httplib::Response& res) { reply(res, api.first()); });
  server.Get("/api/pictures/last",
             [&api, reply](const httplib::Request&, httplib::Response& res) { reply(res, api.last()); });
  server.Get(R"(/api/pictures/([^/]+)/next)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.next(req.matches[1].str()));
  });
  server.Get(R"(/api/pictures/([^/]+)/prev)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.prev(req.matches[1].str()));
  });
  server.Get(R"(/api/pictures/([^/]+)/image)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.image(req.matches[1].str()));
  });
  server.Get(R"(/api/pictures/([^/]+)/annotations)",
             [&api, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, api.annotations(req.matches[1].str()));
             });
  server.Get(R"(/api/pictures/([^/]+))", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.picture(req.matches[1].str()));
  });
  server.Get("/api/search", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.search(req.get_param_value("q")));
  });
  server.Post("/api/annotations", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.attach(req.body));
  });
  server.Delete(R"(/api/annotations/([^/]+)/([^/]+))",
                [&api, reply](const httplib::Request& req, httplib::Response& res) {
                  reply(res, api.detach(req.matches[1].str(), req.matches[2].str()));
                });
  server.Get("/api/export", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.export_document(req.get_param_value("format")));
  });
  if (web_root) server.set_mount_point("/", web_root->string());
}

}  // namespace gwat
