// gwat: command-line entry point.
//
//   gwat serve  --dict DIR (--manifest FILE | --gaped DIR) --db FILE [--listen HOST:PORT]
//   gwat ingest --dict DIR (--manifest FILE | --gaped DIR)
//   gwat export --dict DIR --db FILE [--format sql|csv|json] [--output FILE]
//   gwat stats  --db FILE

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "gwat/gwat.hpp"

namespace {

std::shared_ptr<const gwat::Lexicon> load_lexicon(const gwat::ServiceConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto lex = std::make_shared<const gwat::Lexicon>(gwat::Lexicon::load(cfg.dict_dir));
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  for (const auto& w : lex->warnings()) std::cerr << "warning: " << w << "\n";
  std::cerr << "loaded " << lex->size() << " synsets from " << cfg.dict_dir.string() << " in "
            << ms << " ms\n";
  return lex;
}

std::shared_ptr<const gwat::Catalog> load_catalog(const gwat::ServiceConfig& cfg) {
  gwat::Catalog cat;
  if (cfg.manifest) {
    std::ifstream in(*cfg.manifest);
    if (!in) throw gwat::Error(gwat::ErrorKind::MissingFile, cfg.manifest->string());
    cat = gwat::Catalog::from_manifest(in);
  } else {
    cat = gwat::Catalog::from_directory(*cfg.gaped_root);
  }
  for (const auto& w : cat.warnings()) std::cerr << "warning: " << w << "\n";
  std::cerr << "loaded " << cat.size() << " pictures"
            << (cfg.manifest ? " (manifest mode, no image files)" : "") << "\n";
  return std::make_shared<const gwat::Catalog>(std::move(cat));
}

void print_counts(const gwat::Lexicon& lex, const gwat::Catalog& cat) {
  std::cout << "synsets: " << lex.size() << "\n";
  for (auto t : gwat::kLexicalTypes) {
    std::cout << "  " << gwat::type_name(t) << ": " << lex.count(t) << "\n";
  }
  std::cout << "pictures: " << cat.size() << "\n";
  if (!cat.empty()) {
    std::cout << "  first: " << cat.first().filename << "\n"
              << "  last: " << cat.last().filename << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAPED WordNet annotation service"};
  app.require_subcommand(1);
  app.fallthrough();

  gwat::ConfigLayer flags;
  std::string config_file;
  auto opt = [&](const char* name, std::optional<std::string>& slot, const char* help) {
    app.add_option_function<std::string>(
        name, [&slot](const std::string& v) { slot = v; }, help);
  };
  opt("--dict", flags.dict, "WordNet dict directory (data.noun, data.verb, ...)");
  opt("--gaped", flags.gaped, "picture root with A, H, N, P, Sn, Sp folders");
  opt("--manifest", flags.manifest, "text file listing picture names, one per line");
  opt("--db", flags.db, "annotation store file");
  opt("--listen", flags.listen, "host:port to serve on (default 127.0.0.1:8080)");
  opt("--search-limit", flags.search_limit, "max synsets per search response (default 500)");
  opt("--web-root", flags.web_root, "directory of built web UI assets served under /");
  app.add_option("--config", config_file, "INI/TOML-style config file");

  auto* serve = app.add_subcommand("serve", "load dictionary and pictures, then serve the HTTP API");
  auto* ingest = app.add_subcommand("ingest", "validate dictionary and pictures and print counts");
  auto* exp = app.add_subcommand("export", "write annotations as sql, csv or json");
  std::string format = "sql";
  std::string output;
  exp->add_option("--format", format, "sql, csv or json")->capture_default_str();
  exp->add_option("--output,-o", output, "output file (default: standard output)");
  auto* stats = app.add_subcommand("stats", "print store aggregates");

  CLI11_PARSE(app, argc, argv);

  const std::optional<std::filesystem::path> cfg_path =
      config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file);

  try {
    if (serve->parsed()) {
      const auto cfg = gwat::resolve_config(flags, gwat::process_env, cfg_path, {true, true, true});
      auto lex = load_lexicon(cfg);
      auto cat = load_catalog(cfg);
      gwat::Store store(cfg.store_path);
      gwat::Api api(lex, cat, store, cfg.search_limit);
      httplib::Server server;
      gwat::mount(server, api, cfg.web_root);
      const auto [host, port] = gwat::split_listen_address(cfg.listen_address);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        throw gwat::Error(gwat::ErrorKind::IoFailure, "cannot listen on " + cfg.listen_address);
      }
    } else if (ingest->parsed()) {
      const auto cfg = gwat::resolve_config(flags, gwat::process_env, cfg_path, {true, true, false});
      auto lex = load_lexicon(cfg);
      auto cat = load_catalog(cfg);
      print_counts(*lex, *cat);
    } else if (exp->parsed()) {
      const auto cfg = gwat::resolve_config(flags, gwat::process_env, cfg_path, {true, false, true});
      const auto f = gwat::parse_export_format(format);
      auto lex = load_lexicon(cfg);
      gwat::Store store(cfg.store_path);
      const auto doc = gwat::render(gwat::build_export_image(store, *lex), f);
      if (output.empty()) {
        std::cout << doc;
      } else {
        std::ofstream out(output, std::ios::binary);
        if (!(out << doc)) throw gwat::Error(gwat::ErrorKind::IoFailure, output);
      }
    } else if (stats->parsed()) {
      const auto cfg = gwat::resolve_config(flags, gwat::process_env, cfg_path, {false, false, true});
      gwat::Store store(cfg.store_path);
      const auto s = store.stats();
      std::cout << "annotations: " << s.annotations << "\n"
                << "pictures: " << s.pictures << "\n"
                << "synsets: " << s.synsets << "\n";
    }
  } catch (const gwat::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
