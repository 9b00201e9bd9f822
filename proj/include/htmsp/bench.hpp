#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "htmsp/config.hpp"
#include "htmsp/errors.hpp"
#include "htmsp/image.hpp"
#include "htmsp/imaging.hpp"
#include "htmsp/recognizer.hpp"
#include "htmsp/rng.hpp"

// Dataset ingestion, deterministic 50/50 splitting, end-to-end accuracy
// evaluation and the inhibition-region-size sweep.
namespace htmsp {

struct DatasetClass {
  std::string label;
  std::vector<std::filesystem::path> files;  // sorted lexicographically
};

struct Dataset {
  std::filesystem::path root;
  std::vector<DatasetClass> classes;  // sorted by label

  std::size_t num_classes() const { return classes.size(); }
  std::size_t num_images() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.files.size();
    return n;
  }
};

namespace detail {

inline bool has_image_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".pgm" || ext == ".png";
}

}  // namespace detail

// One subdirectory per class; labels are the directory names. Every class
// needs at least two images (one to train, one to test).
inline Dataset load_dataset(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw IoError("dataset root is not a directory: " + root.string());
  Dataset ds{root, {}};
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    DatasetClass cls{entry.path().filename().string(), {}};
    for (const auto& file : std::filesystem::directory_iterator(entry.path())) {
      if (file.is_regular_file() && detail::has_image_extension(file.path()))
        cls.files.push_back(file.path());
    }
    std::sort(cls.files.begin(), cls.files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    ds.classes.push_back(std::move(cls));
  }
  std::sort(ds.classes.begin(), ds.classes.end(),
            [](const auto& a, const auto& b) { return a.label < b.label; });
  if (ds.classes.empty())
    throw IoError("dataset root has no class directories: " + root.string());
  for (const auto& cls : ds.classes) {
    if (cls.files.size() < 2)
      throw IoError("class '" + cls.label + "' has " + std::to_string(cls.files.size()) +
                    " image(s); need at least 2");
  }
  return ds;
}

struct ClassSplit {
  std::vector<int> train;  // indices into DatasetClass::files
  std::vector<int> test;

  bool operator==(const ClassSplit&) const = default;
};

struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<ClassSplit> classes;

  bool operator==(const SplitPlan&) const = default;
};

// Per-class Fisher-Yates shuffle keyed by (seed, label), first half to
// training; odd counts give the extra image to training.
inline SplitPlan split(const Dataset& dataset, std::uint64_t seed) {
  SplitPlan plan{seed, {}};
  plan.classes.reserve(dataset.classes.size());
  for (const auto& cls : dataset.classes) {
    const int n = static_cast<int>(cls.files.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    const std::uint64_t label_key = rng::fnv1a(cls.label);
    for (int t = n - 1; t > 0; --t) {
      const auto r = rng::bounded(seed, rng::Stream::kShuffle, label_key,
                                  static_cast<std::uint64_t>(t),
                                  static_cast<std::uint64_t>(t) + 1);
      std::swap(order[static_cast<std::size_t>(t)], order[static_cast<std::size_t>(r)]);
    }
    const int n_train = (n + 1) / 2;
    ClassSplit cs;
    cs.train.assign(order.begin(), order.begin() + n_train);
    cs.test.assign(order.begin() + n_train, order.end());
    plan.classes.push_back(std::move(cs));
  }
  return plan;
}

struct EvalConfig {
  SpConfig sp;
  TilingSpec tiling;
  int resize_h = 64;  // 0 keeps the source resolution
  int resize_w = 64;
  std::uint64_t split_seed = 42;
  int jobs = 0;  // 0 = hardware concurrency
};

struct EvalResult {
  double accuracy = 0.0;
  int correct = 0;
  int total = 0;
  std::size_t degenerate_encodings = 0;  // all-zero bit maps, reported for diagnosis
};

namespace detail {

inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// Loads every image of the dataset as grayscale, resized when configured.
// Outer index follows dataset class order.
inline std::vector<std::vector<GrayImage>> load_images(const Dataset& dataset, int resize_h,
                                                       int resize_w, int jobs = 0) {
  std::vector<std::vector<GrayImage>> images(dataset.classes.size());
  std::vector<std::pair<std::size_t, std::size_t>> flat;
  for (std::size_t c = 0; c < dataset.classes.size(); ++c) {
    images[c].resize(dataset.classes[c].files.size());
    for (std::size_t f = 0; f < dataset.classes[c].files.size(); ++f) flat.emplace_back(c, f);
  }
  detail::parallel_for(flat.size(), jobs, [&](std::size_t k) {
    const auto [c, f] = flat[k];
    GrayImage img = load_image(dataset.classes[c].files[f]);
    if (resize_h > 0 && resize_w > 0) img = resize_nearest(img, resize_h, resize_w);
    images[c][f] = std::move(img);
  });
  return images;
}

// Core evaluation over preloaded images: encode everything, train on the
// train half, classify the test half.
inline EvalResult evaluate_prepared(const std::vector<std::vector<GrayImage>>& images,
                                    const std::vector<std::string>& labels, const SplitPlan& plan,
                                    const SpConfig& sp, const TilingSpec& tiling, int jobs = 0) {
  if (images.size() != plan.classes.size() || images.size() != labels.size())
    throw std::invalid_argument("evaluate_prepared: split plan does not match images");
  const ImageEncoder encoder(tiling, sp);

  std::vector<std::vector<EncodedImage>> encoded(images.size());
  std::vector<std::pair<std::size_t, std::size_t>> flat;
  for (std::size_t c = 0; c < images.size(); ++c) {
    encoded[c].resize(images[c].size());
    for (std::size_t f = 0; f < images[c].size(); ++f) flat.emplace_back(c, f);
  }
  detail::parallel_for(flat.size(), jobs, [&](std::size_t k) {
    const auto [c, f] = flat[k];
    encoded[c][f] = encoder.encode(images[c][f]);
  });

  EvalResult result;
  for (const auto& cls : encoded) {
    for (const auto& enc : cls) {
      if (enc.count_active() == 0) ++result.degenerate_encodings;
    }
  }

  std::vector<LabeledEncoding> training;
  for (std::size_t c = 0; c < encoded.size(); ++c) {
    for (int f : plan.classes[c].train) {
      training.push_back({labels[c], encoded[c][static_cast<std::size_t>(f)]});
    }
  }
  const auto store = train(training, StoreProvenance{tiling, sp.init_mode, sp.inhibit_mode,
                                                     sp.seed});

  std::vector<std::pair<std::size_t, std::size_t>> queries;
  for (std::size_t c = 0; c < encoded.size(); ++c) {
    for (int f : plan.classes[c].test) queries.emplace_back(c, static_cast<std::size_t>(f));
  }
  std::vector<std::uint8_t> correct(queries.size(), 0);
  detail::parallel_for(queries.size(), jobs, [&](std::size_t k) {
    const auto [c, f] = queries[k];
    correct[k] = classify(encoded[c][f], store).label == labels[c] ? 1 : 0;
  });

  result.total = static_cast<int>(queries.size());
  for (auto ok : correct) result.correct += ok;
  result.accuracy =
      result.total == 0 ? 0.0 : static_cast<double>(result.correct) / result.total;
  return result;
}

inline EvalResult evaluate(const Dataset& dataset, const SplitPlan& plan,
                           const EvalConfig& config) {
  config.sp.validate();
  config.tiling.validate();
  const auto images = load_images(dataset, config.resize_h, config.resize_w, config.jobs);
  std::vector<std::string> labels(dataset.classes.size());
  for (std::size_t c = 0; c < labels.size(); ++c) labels[c] = dataset.classes[c].label;
  return evaluate_prepared(images, labels, plan, config.sp, config.tiling, config.jobs);
}

struct SweepRow {
  InitMode mode;
  int region_h = 0;
  int region_w = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;

  bool operator==(const SweepRow&) const = default;
};

struct SweepSummaryRow {
  InitMode mode;
  int region_h = 0;
  int region_w = 0;
  double mean_accuracy = 0.0;
  double max_accuracy = 0.0;

  bool operator==(const SweepSummaryRow&) const = default;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summary;
  std::size_t degenerate_encodings = 0;

  bool operator==(const SweepReport&) const = default;
};

// Runs every (mode, region size) cell. Random-weight cells repeat `trials`
// times with seeds base, base+1, ...; rule-based cells are deterministic and
// run once, so their mean equals their max by construction.
inline SweepReport sweep(const Dataset& dataset, const std::vector<std::pair<int, int>>& sizes,
                         const std::vector<InitMode>& modes, int trials,
                         const EvalConfig& base) {
  if (sizes.empty()) throw std::invalid_argument("sweep: need at least one region size");
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  base.sp.validate();
  base.tiling.validate();

  const auto images = load_images(dataset, base.resize_h, base.resize_w, base.jobs);
  std::vector<std::string> labels(dataset.classes.size());
  for (std::size_t c = 0; c < labels.size(); ++c) labels[c] = dataset.classes[c].label;
  const auto plan = split(dataset, base.split_seed);

  SweepReport report;
  for (InitMode mode : modes) {
    for (const auto& [region_h, region_w] : sizes) {
      TilingSpec tiling = base.tiling;
      tiling.region_h = region_h;
      tiling.region_w = region_w;
      const int cell_trials = mode == InitMode::kRuleBased ? 1 : trials;
      double sum = 0.0, best = 0.0;
      for (int t = 0; t < cell_trials; ++t) {
        SpConfig sp = base.sp;
        sp.init_mode = mode;
        sp.seed = base.sp.seed + static_cast<std::uint64_t>(t);
        const auto result = evaluate_prepared(images, labels, plan, sp, tiling, base.jobs);
        report.rows.push_back({mode, region_h, region_w, t, sp.seed, result.accuracy});
        report.degenerate_encodings += result.degenerate_encodings;
        sum += result.accuracy;
        best = std::max(best, result.accuracy);
      }
      report.summary.push_back({mode, region_h, region_w, sum / cell_trials, best});
    }
  }
  return report;
}

namespace detail {

inline std::string format_accuracy(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6) << v;
  return out.str();
}

}  // namespace detail

inline std::string sweep_detail_csv(const SweepReport& report) {
  std::string csv = "mode,region_h,region_w,trial,seed,accuracy\n";
  for (const auto& row : report.rows) {
    csv += to_string(row.mode) + "," + std::to_string(row.region_h) + "," +
           std::to_string(row.region_w) + "," + std::to_string(row.trial) + "," +
           std::to_string(row.seed) + "," + detail::format_accuracy(row.accuracy) + "\n";
  }
  return csv;
}

inline std::string sweep_summary_csv(const SweepReport& report) {
  std::string csv = "mode,region_h,region_w,mean_acc,max_acc\n";
  for (const auto& row : report.summary) {
    csv += to_string(row.mode) + "," + std::to_string(row.region_h) + "," +
           std::to_string(row.region_w) + "," + detail::format_accuracy(row.mean_accuracy) + "," +
           detail::format_accuracy(row.max_accuracy) + "\n";
  }
  return csv;
}

inline void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace htmsp
