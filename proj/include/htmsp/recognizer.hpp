#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "htmsp/config.hpp"
#include "htmsp/errors.hpp"
#include "htmsp/imaging.hpp"
#include "htmsp/serialize.hpp"

// Template-based classifier: stores encoded training images per class and
// matches a query to its nearest template.
namespace htmsp {

struct StoreProvenance {
  TilingSpec tiling;
  InitMode init_mode = InitMode::kRuleBased;
  InhibitMode inhibit_mode = InhibitMode::kMean;
  std::uint64_t seed = 0;

  bool operator==(const StoreProvenance&) const = default;
};

struct TemplateStore {
  StoreProvenance provenance;
  std::map<std::string, std::vector<EncodedImage>> classes;  // templates in insertion order

  std::size_t num_templates() const {
    std::size_t n = 0;
    for (const auto& [label, templates] : classes) n += templates.size();
    return n;
  }
};

struct LabeledEncoding {
  std::string label;
  EncodedImage encoding;
};

inline TemplateStore train(const std::vector<LabeledEncoding>& samples,
                           StoreProvenance provenance) {
  if (samples.empty()) throw std::invalid_argument("train: no samples");
  TemplateStore store{std::move(provenance), {}};
  const EncodedImage& first = samples.front().encoding;
  for (const auto& sample : samples) {
    if (sample.encoding.rows != first.rows || sample.encoding.cols != first.cols ||
        sample.encoding.tiling != first.tiling)
      throw std::invalid_argument("train: encoding dims/tiling differ for class '" +
                                  sample.label + "'");
    store.classes[sample.label].push_back(sample.encoding);
  }
  return store;
}

// Hamming similarity: the fraction of positions where the two bit maps agree.
inline double similarity(const EncodedImage& a, const EncodedImage& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("similarity: dimension mismatch");
  std::size_t matches = 0;
  for (std::size_t p = 0; p < a.bits.size(); ++p) matches += a.bits[p] == b.bits[p];
  return static_cast<double>(matches) / static_cast<double>(a.bits.size());
}

// Cosine over the binary maps; exposed for sensitivity checks.
inline double cosine_similarity(const EncodedImage& a, const EncodedImage& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  std::size_t dot = 0, na = 0, nb = 0;
  for (std::size_t p = 0; p < a.bits.size(); ++p) {
    dot += a.bits[p] & b.bits[p];
    na += a.bits[p];
    nb += b.bits[p];
  }
  if (na == 0 && nb == 0) return 1.0;
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

enum class Metric { kHamming, kCosine };

struct MatchResult {
  std::string label;
  double score = 0.0;
  std::vector<std::pair<std::string, double>> class_scores;  // label-ordered
};

// Nearest-template classification: per class the best template similarity;
// the winner is the argmax, ties broken by the lexicographically smallest
// label (which is the map iteration order).
inline MatchResult classify(const EncodedImage& query, const TemplateStore& store,
                            Metric metric = Metric::kHamming) {
  if (store.classes.empty()) throw std::invalid_argument("classify: empty store");
  MatchResult result;
  result.score = -1.0;
  for (const auto& [label, templates] : store.classes) {
    double best = 0.0;
    for (const auto& tpl : templates) {
      const double score =
          metric == Metric::kHamming ? similarity(query, tpl) : cosine_similarity(query, tpl);
      best = std::max(best, score);
    }
    result.class_scores.emplace_back(label, best);
    if (best > result.score) {
      result.score = best;
      result.label = label;
    }
  }
  return result;
}

namespace detail {

inline std::string template_file_name(std::size_t class_index, std::size_t template_index) {
  std::ostringstream name;
  name << "c" << std::setw(3) << std::setfill('0') << class_index << "_t" << std::setw(3)
       << std::setfill('0') << template_index << ".bin";
  return name.str();
}

}  // namespace detail

// Directory layout: manifest.json plus one flat-layout binary per template.
inline void save_store(const TemplateStore& store, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create store directory: " + dir.string());

  nlohmann::ordered_json manifest;
  manifest["format"] = 1;
  manifest["init_mode"] = to_string(store.provenance.init_mode);
  manifest["inhibit_mode"] = to_string(store.provenance.inhibit_mode);
  manifest["seed"] = store.provenance.seed;
  manifest["tiling"] = {{"block_h", store.provenance.tiling.block_h},
                        {"block_w", store.provenance.tiling.block_w},
                        {"region_h", store.provenance.tiling.region_h},
                        {"region_w", store.provenance.tiling.region_w},
                        {"neighborhood", store.provenance.tiling.neighborhood}};
  manifest["classes"] = nlohmann::ordered_json::array();

  std::size_t class_index = 0;
  for (const auto& [label, templates] : store.classes) {
    nlohmann::ordered_json entry;
    entry["label"] = label;
    entry["templates"] = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < templates.size(); ++t) {
      const auto name = detail::template_file_name(class_index, t);
      save_encoded(templates[t], store.provenance.init_mode, store.provenance.seed, dir / name);
      entry["templates"].push_back(name);
    }
    manifest["classes"].push_back(std::move(entry));
    ++class_index;
  }

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
}

inline TemplateStore load_store(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }

  TemplateStore store;
  try {
    const std::string init_mode = manifest.at("init_mode");
    store.provenance.init_mode =
        init_mode == "random_weight" ? InitMode::kRandomWeight : InitMode::kRuleBased;
    const std::string inhibit_mode = manifest.at("inhibit_mode");
    store.provenance.inhibit_mode =
        inhibit_mode == "percentile" ? InhibitMode::kPercentile : InhibitMode::kMean;
    store.provenance.seed = manifest.at("seed");
    const auto& tiling = manifest.at("tiling");
    store.provenance.tiling.block_h = tiling.at("block_h");
    store.provenance.tiling.block_w = tiling.at("block_w");
    store.provenance.tiling.region_h = tiling.at("region_h");
    store.provenance.tiling.region_w = tiling.at("region_w");
    store.provenance.tiling.neighborhood = tiling.at("neighborhood");
    for (const auto& entry : manifest.at("classes")) {
      const std::string label = entry.at("label");
      auto& templates = store.classes[label];
      for (const auto& file : entry.at("templates")) {
        templates.push_back(load_encoded(dir / file.get<std::string>()).image);
      }
      if (templates.empty())
        throw IoError("class '" + label + "' has no templates: " + manifest_path.string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  if (store.classes.empty()) throw IoError("store has no classes: " + manifest_path.string());
  return store;
}

}  // namespace htmsp
