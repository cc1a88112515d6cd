#pragma once

// Registry of picture filenames in byte-wise lexicographic order. Pictures
// live in six category folders but names are unique across all of them, so
// lookup never needs the folder.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gwat/error.hpp"

namespace gwat {

enum class Category : std::uint8_t { A, H, N, P, Sn, Sp };

inline constexpr std::array kCategories{Category::A, Category::H,  Category::N,
                                        Category::P, Category::Sn, Category::Sp};

inline constexpr std::string_view category_code(Category c) {
  switch (c) {
    case Category::A: return "A";
    case Category::H: return "H";
    case Category::N: return "N";
    case Category::P: return "P";
    case Category::Sn: return "Sn";
    case Category::Sp: return "Sp";
  }
  return "";
}

inline constexpr std::string_view category_label(Category c) {
  switch (c) {
    case Category::A: return "animal mistreatment";
    case Category::H: return "human concerns";
    case Category::N: return "neutral";
    case Category::P: return "positive";
    case Category::Sn: return "snakes";
    case Category::Sp: return "spiders";
  }
  return "";
}

// Two-letter codes are tried first so "Sn001.bmp" never falls through to a
// single-letter code.
inline std::optional<Category> category_of(std::string_view filename) {
  if (filename.starts_with("Sn")) return Category::Sn;
  if (filename.starts_with("Sp")) return Category::Sp;
  if (filename.starts_with("A")) return Category::A;
  if (filename.starts_with("H")) return Category::H;
  if (filename.starts_with("N")) return Category::N;
  if (filename.starts_with("P")) return Category::P;
  return std::nullopt;
}

struct PictureRef {
  std::string filename;
  Category category = Category::A;
  std::size_t ordinal = 0;

  friend bool operator==(const PictureRef&, const PictureRef&) = default;
};

class Catalog {
 public:
  Catalog() = default;

  // Newline-separated filenames; blank lines and '#' comments are skipped.
  static Catalog from_manifest(std::istream& source) {
    std::vector<std::string> names;
    std::string line;
    while (std::getline(source, line)) {
      std::string_view v = line;
      while (!v.empty() && (v.back() == '\r' || v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
      while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
      if (v.empty() || v.front() == '#') continue;
      if (!category_of(v)) throw Error(ErrorKind::UnknownCategoryPrefix, std::string(v));
      names.emplace_back(v);
    }
    return from_names(std::move(names));
  }

  // Scans <root>/{A,H,N,P,Sn,Sp}/ for regular files. Names with no category
  // prefix are skipped; a prefix that disagrees with its folder is kept. Both
  // are reported through warnings().
  static Catalog from_directory(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(ErrorKind::MissingRoot, root.string());

    std::vector<std::string> names;
    std::unordered_map<std::string, Category> folders;
    std::vector<std::string> warnings;
    for (Category c : kCategories) {
      const auto dir = root / category_code(c);
      if (!fs::is_directory(dir, ec)) {
        warnings.push_back("missing category folder " + dir.string());
        continue;
      }
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        const auto cat = category_of(name);
        if (!cat) {
          warnings.push_back("skipping " + entry.path().string() + ": no category prefix");
          continue;
        }
        if (*cat != c) {
          warnings.push_back(entry.path().string() + ": prefix does not match folder");
        }
        if (!folders.emplace(name, c).second) throw Error(ErrorKind::DuplicateFilename, name);
        names.push_back(std::move(name));
      }
    }
    Catalog cat = from_names(std::move(names));
    cat.warnings_ = std::move(warnings);
    cat.root_ = root;
    cat.folders_ = std::move(folders);
    return cat;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<PictureRef>& entries() const { return entries_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Set only for catalogs scanned from disk.
  const std::optional<std::filesystem::path>& root() const { return root_; }

  bool contains(std::string_view name) const { return by_name_.count(std::string(name)) != 0; }

  // Exact, case-sensitive, extension included. '*' and '?' are ordinary
  // characters here.
  const PictureRef& find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) throw Error(ErrorKind::PictureNotFound, std::string(name));
    return entries_[it->second];
  }

  const PictureRef& first() const {
    if (entries_.empty()) throw Error(ErrorKind::EmptyCatalog, "catalog is empty");
    return entries_.front();
  }

  const PictureRef& last() const {
    if (entries_.empty()) throw Error(ErrorKind::EmptyCatalog, "catalog is empty");
    return entries_.back();
  }

  const PictureRef& next(const PictureRef& ref) const {
    const std::size_t i = resolve(ref);
    return entries_[(i + 1) % entries_.size()];
  }

  const PictureRef& prev(const PictureRef& ref) const {
    const std::size_t i = resolve(ref);
    return entries_[(i + entries_.size() - 1) % entries_.size()];
  }

  std::optional<std::filesystem::path> image_path(const PictureRef& ref) const {
    if (!root_) return std::nullopt;
    auto it = folders_.find(ref.filename);
    const Category folder = it == folders_.end() ? ref.category : it->second;
    return *root_ / category_code(folder) / ref.filename;
  }

 private:
  static Catalog from_names(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    if (auto dup = std::adjacent_find(names.begin(), names.end()); dup != names.end()) {
      throw Error(ErrorKind::DuplicateFilename, *dup);
    }
    Catalog cat;
    cat.entries_.reserve(names.size());
    for (auto& n : names) {
      const auto c = category_of(n);
      if (!c) throw Error(ErrorKind::UnknownCategoryPrefix, n);
      const std::size_t ordinal = cat.entries_.size();
      cat.by_name_.emplace(n, ordinal);
      cat.entries_.push_back(PictureRef{std::move(n), *c, ordinal});
    }
    return cat;
  }

  std::size_t resolve(const PictureRef& ref) const {
    auto it = by_name_.find(ref.filename);
    if (it == by_name_.end()) throw Error(ErrorKind::StaleRef, ref.filename);
    return it->second;
  }

  std::vector<PictureRef> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<std::string> warnings_;
  std::optional<std::filesystem::path> root_;
  std::unordered_map<std::string, Category> folders_;
};

}  // namespace gwat
