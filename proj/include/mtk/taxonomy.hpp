#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtk/errors.hpp"

namespace mtk {

// Case-folded, trimmed, internal whitespace collapsed to single spaces.
inline std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

enum class TaxonomyLevel { Category, Subcategory, Atomic };

inline std::string_view level_name(TaxonomyLevel level) {
  switch (level) {
    case TaxonomyLevel::Category: return "category";
    case TaxonomyLevel::Subcategory: return "subcategory";
    case TaxonomyLevel::Atomic: return "atomic";
  }
  return "?";
}

// Resolved position in the taxonomy tree. Deeper indices are empty when the
// reference stops at a coarser level.
struct TaxonomyNodeRef {
  std::size_t category = 0;
  std::optional<std::size_t> subcategory;
  std::optional<std::size_t> atomic;

  friend bool operator==(const TaxonomyNodeRef&, const TaxonomyNodeRef&) = default;
};

class Taxonomy {
 public:
  struct Subcategory {
    std::string name;
    std::vector<std::string> atomics;
  };
  struct Category {
    std::string name;
    std::vector<Subcategory> subcategories;
  };

  Taxonomy() = default;

  explicit Taxonomy(std::vector<Category> categories) : categories_(std::move(categories)) {
    std::map<std::string, std::size_t> seen_cat;
    for (std::size_t c = 0; c < categories_.size(); ++c) {
      const auto& cat = categories_[c];
      if (!seen_cat.emplace(cat.name, c).second) {
        throw Error(Errc::InvalidArgument, "duplicate category '" + cat.name + "'");
      }
      std::map<std::string, std::size_t> seen_sub;
      for (const auto& sub : cat.subcategories) {
        if (!seen_sub.emplace(sub.name, 0).second) {
          throw Error(Errc::InvalidArgument,
                      "duplicate subcategory '" + sub.name + "' under '" + cat.name + "'");
        }
        std::map<std::string, std::size_t> seen_atomic;
        for (const auto& a : sub.atomics) {
          if (!seen_atomic.emplace(a, 0).second) {
            throw Error(Errc::InvalidArgument,
                        "duplicate atomic action '" + a + "' under '" + sub.name + "'");
          }
        }
      }
    }
  }

  // { "<category>": { "<subcategory>": ["<atomic action>", ...], ... }, ... }
  static Taxonomy from_json(const nlohmann::ordered_json& doc) {
    if (!doc.is_object()) throw Error(Errc::Parse, "taxonomy root must be an object");
    std::vector<Category> cats;
    for (const auto& [cat_name, subs] : doc.items()) {
      if (!subs.is_object()) {
        throw Error(Errc::Parse, "category '" + cat_name + "' must map to an object");
      }
      Category cat{cat_name, {}};
      for (const auto& [sub_name, atomics] : subs.items()) {
        if (!atomics.is_array()) {
          throw Error(Errc::Parse, "subcategory '" + sub_name + "' must map to an array");
        }
        Subcategory sub{sub_name, {}};
        for (const auto& a : atomics) {
          if (!a.is_string()) throw Error(Errc::Parse, "atomic actions must be strings");
          sub.atomics.push_back(a.get<std::string>());
        }
        cat.subcategories.push_back(std::move(sub));
      }
      cats.push_back(std::move(cat));
    }
    return Taxonomy(std::move(cats));
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& cat : categories_) {
      nlohmann::ordered_json subs = nlohmann::ordered_json::object();
      for (const auto& sub : cat.subcategories) subs[sub.name] = sub.atomics;
      doc[cat.name] = std::move(subs);
    }
    return doc;
  }

  const std::vector<Category>& categories() const noexcept { return categories_; }

  std::size_t num_categories() const noexcept { return categories_.size(); }
  std::size_t num_subcategories() const noexcept {
    std::size_t n = 0;
    for (const auto& c : categories_) n += c.subcategories.size();
    return n;
  }
  std::size_t num_atomics() const noexcept {
    std::size_t n = 0;
    for (const auto& c : categories_)
      for (const auto& s : c.subcategories) n += s.atomics.size();
    return n;
  }

  // Resolves labels after normalization. Empty subcategory / atomic strings
  // stop resolution at the coarser level.
  TaxonomyNodeRef resolve(std::string_view category, std::string_view subcategory = {},
                          std::string_view atomic = {}) const {
    TaxonomyNodeRef ref;
    ref.category = match(categories_, category, "category",
                         [](const Category& c) -> const std::string& { return c.name; });
    if (normalize_label(subcategory).empty()) return ref;
    const auto& cat = categories_[ref.category];
    ref.subcategory = match(cat.subcategories, subcategory, "subcategory",
                            [](const Subcategory& s) -> const std::string& { return s.name; });
    if (normalize_label(atomic).empty()) return ref;
    const auto& sub = cat.subcategories[*ref.subcategory];
    ref.atomic = match(sub.atomics, atomic, "atomic",
                       [](const std::string& s) -> const std::string& { return s; });
    return ref;
  }

  // Canonical path of a node, e.g. "Sports/Table Tennis/Swing racket".
  std::string path(const TaxonomyNodeRef& ref) const {
    const auto& cat = categories_.at(ref.category);
    std::string out = cat.name;
    if (ref.subcategory) {
      const auto& sub = cat.subcategories.at(*ref.subcategory);
      out += "/" + sub.name;
      if (ref.atomic) out += "/" + sub.atomics.at(*ref.atomic);
    }
    return out;
  }

  // True when a category or subcategory carries this name (normalized).
  bool has_group_name(std::string_view name) const {
    const std::string key = normalize_label(name);
    for (const auto& c : categories_) {
      if (normalize_label(c.name) == key) return true;
      for (const auto& s : c.subcategories) {
        if (normalize_label(s.name) == key) return true;
      }
    }
    return false;
  }

 private:
  template <class Range, class NameOf>
  static std::size_t match(const Range& nodes, std::string_view label, std::string_view level,
                           NameOf name_of) {
    const std::string key = normalize_label(label);
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (normalize_label(name_of(nodes[i])) != key) continue;
      if (hit) {
        throw Error(Errc::AmbiguousLabel,
                    std::string(level) + " label '" + std::string(label) + "' matches several nodes");
      }
      hit = i;
    }
    if (!hit) {
      throw Error(Errc::UnknownLabel,
                  std::string(level) + " label '" + std::string(label) + "' not found");
    }
    return *hit;
  }

  std::vector<Category> categories_;
};

inline TaxonomyNodeRef resolve_taxonomy_label(const Taxonomy& taxonomy, std::string_view category,
                                              std::string_view subcategory,
                                              std::string_view atomic) {
  return taxonomy.resolve(category, subcategory, atomic);
}

}  // namespace mtk
