#pragma once

// Service configuration. Each setting may come from a command-line flag, a
// GWAT_* environment variable, or a key in an INI/TOML-style file; flags win
// over the environment, which wins over the file.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "gwat/error.hpp"
#include "gwat/lexicon.hpp"

namespace gwat {

struct ServiceConfig {
  std::filesystem::path dict_dir;
  std::optional<std::filesystem::path> gaped_root;
  std::optional<std::filesystem::path> manifest;
  std::filesystem::path store_path;
  std::string listen_address = "127.0.0.1:8080";
  std::size_t search_limit = kDefaultSearchLimit;
  std::optional<std::filesystem::path> web_root;
};

// Raw values as supplied by one source; unset fields defer to the next.
struct ConfigLayer {
  std::optional<std::string> dict;
  std::optional<std::string> gaped;
  std::optional<std::string> manifest;
  std::optional<std::string> db;
  std::optional<std::string> listen;
  std::optional<std::string> search_limit;
  std::optional<std::string> web_root;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

inline ConfigLayer layer_from_env(const EnvLookup& env) {
  ConfigLayer l;
  l.dict = env("GWAT_DICT");
  l.gaped = env("GWAT_GAPED");
  l.manifest = env("GWAT_MANIFEST");
  l.db = env("GWAT_DB");
  l.listen = env("GWAT_LISTEN");
  l.search_limit = env("GWAT_SEARCH_LIMIT");
  l.web_root = env("GWAT_WEB_ROOT");
  return l;
}

// Accepts `key = value` lines at top level or under a [gwat] section.
// Surrounding double quotes on values are dropped, so simple TOML works too.
inline ConfigLayer layer_from_file(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  auto get = [&](const char* key) -> std::optional<std::string> {
    for (const std::string prefix : {"", "gwat."}) {
      if (auto v = tree.get_optional<std::string>(prefix + key)) {
        std::string s = *v;
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
        return s;
      }
    }
    return std::nullopt;
  };
  ConfigLayer l;
  l.dict = get("dict");
  l.gaped = get("gaped");
  l.manifest = get("manifest");
  l.db = get("db");
  l.listen = get("listen");
  l.search_limit = get("search_limit");
  l.web_root = get("web_root");
  return l;
}

inline ConfigLayer merge(const ConfigLayer& high, const ConfigLayer& low) {
  auto pick = [](const auto& a, const auto& b) { return a ? a : b; };
  return ConfigLayer{pick(high.dict, low.dict),       pick(high.gaped, low.gaped),
                     pick(high.manifest, low.manifest), pick(high.db, low.db),
                     pick(high.listen, low.listen),   pick(high.search_limit, low.search_limit),
                     pick(high.web_root, low.web_root)};
}

// What a subcommand needs from the merged configuration.
struct ConfigNeeds {
  bool dict = false;
  bool pictures = false;  // exactly one of gaped / manifest
  bool db = false;
};

inline ServiceConfig resolve_config(const ConfigLayer& flags, const EnvLookup& env,
                                    const std::optional<std::filesystem::path>& config_file,
                                    ConfigNeeds needs) {
  ConfigLayer merged = merge(flags, layer_from_env(env));
  if (config_file) {
    if (!std::filesystem::exists(*config_file)) {
      throw Error(ErrorKind::ConfigError, "config file not found: " + config_file->string());
    }
    merged = merge(merged, layer_from_file(*config_file));
  }

  // A picture source set by a higher layer hides the other kind from lower
  // layers, so `--manifest` overrides a file-level `gaped` without clashing.
  if (flags.gaped || flags.manifest) {
    merged.gaped = flags.gaped;
    merged.manifest = flags.manifest;
  } else {
    const auto env_layer = layer_from_env(env);
    if (env_layer.gaped || env_layer.manifest) {
      merged.gaped = env_layer.gaped;
      merged.manifest = env_layer.manifest;
    }
  }

  ServiceConfig cfg;
  if (merged.dict) cfg.dict_dir = *merged.dict;
  if (merged.gaped) cfg.gaped_root = std::filesystem::path(*merged.gaped);
  if (merged.manifest) cfg.manifest = std::filesystem::path(*merged.manifest);
  if (merged.db) cfg.store_path = *merged.db;
  if (merged.listen) cfg.listen_address = *merged.listen;
  if (merged.web_root) cfg.web_root = std::filesystem::path(*merged.web_root);
  if (merged.search_limit) {
    std::size_t n = 0;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(*merged.search_limit, &used);
      if (used != merged.search_limit->size() || v < 1) throw std::invalid_argument("range");
      n = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, "search_limit must be an integer >= 1, got '" +
                                              *merged.search_limit + "'");
    }
    cfg.search_limit = n;
  }

  if (needs.dict && cfg.dict_dir.empty()) {
    throw Error(ErrorKind::ConfigError, "no WordNet dict directory (--dict / GWAT_DICT)");
  }
  if (needs.db && cfg.store_path.empty()) {
    throw Error(ErrorKind::ConfigError, "no store path (--db / GWAT_DB)");
  }
  if (needs.pictures && cfg.gaped_root.has_value() == cfg.manifest.has_value()) {
    throw Error(ErrorKind::ConfigError,
                "exactly one of --gaped / --manifest (GWAT_GAPED / GWAT_MANIFEST) is required");
  }
  return cfg;
}

// "host:port" -> (host, port)
inline std::pair<std::string, int> split_listen_address(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == address.size()) {
    throw Error(ErrorKind::ConfigError, "listen address must be host:port");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    const std::string p(address.substr(colon + 1));
    port = std::stoi(p, &used);
    if (used != p.size() || port < 0 || port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, "bad port in listen address '" + std::string(address) + "'");
  }
  return {std::string(address.substr(0, colon)), port};
}

}  // namespace gwat
