// Command-line front end: encode single images, train and persist template
// stores, evaluate datasets, and run inhibition-region sweeps.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 missing or
// unreadable files.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htmsp/bench.hpp"
#include "htmsp/config.hpp"
#include "htmsp/errors.hpp"
#include "htmsp/image.hpp"
#include "htmsp/imaging.hpp"
#include "htmsp/recognizer.hpp"
#include "htmsp/run_config.hpp"

namespace {

namespace fs = std::filesystem;
using namespace htmsp;

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> overrides;  // KEY=VALUE pairs
  std::string mode;                    // convenience alias for init_mode
  int trials = -1;
  int jobs = 0;
  std::string out_dir = ".";
};

void add_common_options(CLI::App* cmd, CommonArgs* args, bool with_out) {
  cmd->add_option("-c,--config", args->config_file, "run configuration file (key = value lines)");
  cmd->add_option("--set", args->overrides, "override a config key, e.g. --set rho=0.3")
      ->type_name("KEY=VALUE");
  cmd->add_option("--mode", args->mode, "initialization mode: random_weight or rule_based");
  cmd->add_option("--trials", args->trials, "random-mode trials per cell");
  cmd->add_option("--jobs", args->jobs, "worker cap for encoding/classification (0 = all cores)");
  if (with_out) cmd->add_option("-o,--out", args->out_dir, "output directory");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config =
      args.config_file.empty() ? RunConfig{} : parse_config_file(args.config_file);
  for (const auto& entry : args.overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects KEY=VALUE, got '" + entry + "'");
    apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
  }
  if (!args.mode.empty()) config.sp.init_mode = parse_init_mode(args.mode);
  if (args.trials >= 0) config.trials = args.trials;
  config.validate();
  return config;
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec && !fs::is_directory(path)) throw IoError("cannot create output directory: " + dir);
  return path;
}

std::string format3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

int cmd_encode(const std::string& image_path, const CommonArgs& args) {
  const RunConfig config = resolve_config(args);
  const auto out = ensure_out_dir(args.out_dir);
  const GrayImage gray = load_image(image_path);
  const ImageEncoder encoder(config.tiling, config.sp);
  const EncodeTrace trace = encoder.encode_trace(gray);

  const std::string stem = fs::path(image_path).stem().string();
  const fs::path gray_path = out / (stem + "_gray.pgm");
  const fs::path weights_path = out / (stem + "_weights.pgm");
  const fs::path overlap_path = out / (stem + "_overlap.pgm");
  const fs::path inhibit_path = out / (stem + "_inhibit.pgm");
  save_pgm(trace.padded, gray_path);
  save_pgm(trace.weights_gray(), weights_path);
  save_pgm(trace.weighted, overlap_path);
  save_pgm(trace.encoded.to_gray(), inhibit_path);
  std::cout << gray_path.string() << "\n"
            << weights_path.string() << "\n"
            << overlap_path.string() << "\n"
            << inhibit_path.string() << "\n";
  return 0;
}

int cmd_train(const std::string& dataset_root, const std::string& store_dir,
              const CommonArgs& args) {
  const RunConfig config = resolve_config(args);
  const Dataset dataset = load_dataset(dataset_root);
  const SplitPlan plan = split(dataset, config.sp.seed);
  const auto images = load_images(dataset, config.resize_h, config.resize_w, args.jobs);
  const ImageEncoder encoder(config.tiling, config.sp);

  std::vector<LabeledEncoding> samples;
  for (std::size_t c = 0; c < dataset.classes.size(); ++c) {
    for (int f : plan.classes[c].train) {
      samples.push_back({dataset.classes[c].label,
                         encoder.encode(images[c][static_cast<std::size_t>(f)])});
    }
  }
  const TemplateStore store = train(
      samples, StoreProvenance{config.tiling, config.sp.init_mode, config.sp.inhibit_mode,
                               config.sp.seed});
  save_store(store, store_dir);
  std::cout << "stored " << store.num_templates() << " templates for " << store.classes.size()
            << " classes in " << store_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& dataset_root, const CommonArgs& args) {
  const RunConfig config = resolve_config(args);
  const auto out = ensure_out_dir(args.out_dir);
  const Dataset dataset = load_dataset(dataset_root);

  EvalConfig eval_config;
  eval_config.sp = config.sp;
  eval_config.tiling = config.tiling;
  eval_config.resize_h = config.resize_h;
  eval_config.resize_w = config.resize_w;
  eval_config.split_seed = config.sp.seed;
  eval_config.jobs = args.jobs;

  // One cell at the configured region size; random-weight repeats per trial.
  const std::vector<std::pair<int, int>> sizes{
      {config.tiling.region_h, config.tiling.region_w}};
  const SweepReport report = sweep(dataset, sizes, {config.sp.init_mode}, config.trials,
                                   eval_config);
  for (const auto& row : report.rows) std::cout << "accuracy " << format3(row.accuracy) << "\n";
  write_text_file(sweep_detail_csv(report), out / "eval.csv");
  if (report.degenerate_encodings > 0) {
    std::cerr << "warning: " << report.degenerate_encodings
              << " all-zero encoding(s); inputs may be constant\n";
  }
  return 0;
}

std::vector<std::pair<int, int>> parse_sizes(const std::string& list) {
  std::vector<std::pair<int, int>> sizes;
  std::string token;
  std::istringstream in(list);
  while (std::getline(in, token, ',')) {
    token = htmsp::detail::trim(token);
    if (token.empty()) continue;
    const int r = htmsp::detail::parse_int("sizes", token);
    sizes.emplace_back(r, r);
  }
  if (sizes.empty()) throw ConfigError("--sizes expects a list like 2,4,8");
  return sizes;
}

std::vector<InitMode> parse_modes(const std::string& value) {
  if (value == "both") return {InitMode::kRandomWeight, InitMode::kRuleBased};
  return {parse_init_mode(value)};
}

int cmd_sweep(const std::string& dataset_root, const std::string& sizes_list,
              const std::string& modes_value, const CommonArgs& args) {
  const RunConfig config = resolve_config(args);
  const auto out = ensure_out_dir(args.out_dir);
  const Dataset dataset = load_dataset(dataset_root);

  EvalConfig eval_config;
  eval_config.sp = config.sp;
  eval_config.tiling = config.tiling;
  eval_config.resize_h = config.resize_h;
  eval_config.resize_w = config.resize_w;
  eval_config.split_seed = config.sp.seed;
  eval_config.jobs = args.jobs;

  const SweepReport report = sweep(dataset, parse_sizes(sizes_list), parse_modes(modes_value),
                                   config.trials, eval_config);
  write_text_file(sweep_detail_csv(report), out / "sweep_detail.csv");
  write_text_file(sweep_summary_csv(report), out / "sweep_summary.csv");
  for (const auto& row : report.summary) {
    std::cout << to_string(row.mode) << " region " << row.region_h << "x" << row.region_w
              << " mean " << format3(row.mean_accuracy) << " max " << format3(row.max_accuracy)
              << "\n";
  }
  if (report.degenerate_encodings > 0) {
    std::cerr << "warning: " << report.degenerate_encodings
              << " all-zero encoding(s); inputs may be constant\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HTM spatial pooler feature encoding and face-recognition workbench"};
  app.require_subcommand(1);

  CommonArgs encode_args, train_args, eval_args, sweep_args;
  std::string encode_image, train_root, train_store, eval_root, sweep_root;
  std::string sweep_sizes, sweep_modes = "both";

  CLI::App* encode = app.add_subcommand("encode", "encode one image and dump the stage renders");
  encode->add_option("image", encode_image, "input image (PGM or PNG)")->required();
  add_common_options(encode, &encode_args, true);

  CLI::App* train_cmd = app.add_subcommand("train", "encode the training split and persist it");
  train_cmd->add_option("dataset", train_root, "dataset root (one directory per class)")
      ->required();
  train_cmd->add_option("--store", train_store, "template store directory")->required();
  add_common_options(train_cmd, &train_args, false);

  CLI::App* eval_cmd = app.add_subcommand("eval", "train/test accuracy for one configuration");
  eval_cmd->add_option("dataset", eval_root, "dataset root (one directory per class)")
      ->required();
  add_common_options(eval_cmd, &eval_args, true);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "accuracy sweep over region sizes");
  sweep_cmd->add_option("dataset", sweep_root, "dataset root (one directory per class)")
      ->required();
  sweep_cmd->add_option("--sizes", sweep_sizes, "square region sizes in blocks, e.g. 2,4,8")
      ->required();
  sweep_cmd->add_option("--modes", sweep_modes, "both, random_weight, or rule_based");
  add_common_options(sweep_cmd, &sweep_args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (encode->parsed()) return cmd_encode(encode_image, encode_args);
    if (train_cmd->parsed()) return cmd_train(train_root, train_store, train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_root, eval_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_root, sweep_sizes, sweep_modes, sweep_args);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
