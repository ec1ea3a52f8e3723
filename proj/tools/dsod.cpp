// Command-line front end: synth, train, infer, eval, ablate.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "dsod/ablation.hpp"
#include "dsod/checkpoint.hpp"
#include "dsod/config.hpp"
#include "dsod/dataset.hpp"
#include "dsod/evaluate.hpp"
#include "dsod/png_io.hpp"
#include "dsod/tiling.hpp"
#include "dsod/training.hpp"

namespace fs = std::filesystem;
using namespace dsod;

namespace {

constexpr int kInternalError = 1;
constexpr int kUserError = 2;

/// Bad input from the user: reported without a stack of context, exit 2.
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void apply_thread_limit() {
  if (const char* v = std::getenv("DISENT_SOD_THREADS")) {
    const int n = std::atoi(v);
    if (n < 1) throw UserError("DISENT_SOD_THREADS must be a positive integer");
    torch::set_num_threads(n);
  }
}

TrainConfig read_config(const std::string& path, const std::vector<std::string>& overrides,
                        std::optional<Stage> stage) {
  TrainConfig cfg = path.empty() ? config_from_json(nlohmann::json::object()) : load_config(path);
  return apply_overrides(cfg, overrides, stage);
}

int cmd_synth(const fs::path& out, int count, int size, std::uint64_t seed) {
  if (count < 1) throw UserError("--count must be >= 1");
  write_dataset(out, synthesize_dataset(seed, count, size), plan_scenes(seed, count));
  std::cout << "wrote " << count << " scenes to " << out.string() << "\n";
  return 0;
}

int cmd_train(const std::string& stage_name, const std::string& config, const fs::path& data_dir,
              const fs::path& out, const std::vector<std::string>& overrides, fs::path log_path) {
  const Stage stage = stage_from_string(stage_name);
  const TrainConfig cfg = read_config(config, overrides, stage);
  if (!fs::is_directory(data_dir)) throw UserError("data directory '" + data_dir.string() + "' does not exist");
  const Dataset data = load_dataset(data_dir);
  if (data.empty()) throw UserError("data directory '" + data_dir.string() + "' holds no image/mask pairs");
  if (log_path.empty()) log_path = fs::path(out.string() + ".log.jsonl");
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw UserError("cannot write log file '" + log_path.string() + "'");
  TrainOptions options;
  options.log = &log;
  const TrainingResult r = stage == Stage::kLrscn ? train_lrscn(cfg, data, options) : train_hrrn(cfg, data, options);
  save_checkpoint(out, r.checkpoint);
  std::cout << to_string(stage) << ": " << r.losses.size() << " steps, loss " << format_number(r.losses.front())
            << " -> " << format_number(r.losses.back()) << ", checkpoint " << out.string() << "\n";
  return 0;
}

int cmd_infer(const fs::path& image_path, const fs::path& lrscn_path, const fs::path& hrrn_path,
              const fs::path& out, const fs::path& trimap_out) {
  const Image image = load_image(image_path);
  const Checkpoint lc = load_checkpoint(lrscn_path, ModelKind::kLrscn);
  const Checkpoint hc = load_checkpoint(hrrn_path, ModelKind::kHrrn);
  Lrscn lrscn = load_lrscn(lc);
  Hrrn hrrn = load_hrrn(hc);
  const int canonical = hc.config.at("train").at("hrrn").at("canonical_size").get<int>();
  const PipelineResult r = run_pipeline(image, lrscn, hrrn, canonical);
  save_saliency(r.saliency, out);
  if (!trimap_out.empty()) encode_trimap(r.trimap, trimap_out);
  return 0;
}

int cmd_eval(const fs::path& pred, const fs::path& gt, const fs::path& out, const fs::path& pr_out,
             const fs::path& jsonl_out) {
  const EvaluationReport report = evaluate_directory(pred, gt);
  for (const auto& stem : report.unmatched) std::cerr << "unmatched stem: " << stem << "\n";
  if (report.rows.empty()) throw UserError("no prediction/ground-truth stems matched");
  write_metrics_csv(out, report);
  if (!pr_out.empty()) write_pr_csv(pr_out, report);
  if (!jsonl_out.empty()) write_metrics_jsonl(jsonl_out, report);
  const auto& m = report.mean;
  std::cout << report.rows.size() << " images: mae " << format_number(m.mae) << " f_beta " << format_number(m.f_beta)
            << " f_beta_max " << format_number(m.f_beta_max) << " bde " << format_number(m.bde) << " b_mu "
            << format_number(m.b_mu) << "\n";
  return 0;
}

int cmd_ablate(const std::string& config, const fs::path& out, const std::vector<std::string>& overrides) {
  const TrainConfig cfg = read_config(config, overrides, std::nullopt);
  fs::create_directories(out);
  const AblationReport report = ablate_noise(cfg, &std::cout);
  write_ablation_long_csv(out / "ablation_long.csv", report);
  write_ablation_seed_csv(out / "ablation_per_seed.csv", report);
  write_ablation_median_csv(out / "ablation_median.csv", report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage salient object detection: data synthesis, training, inference, evaluation"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Write a synthetic image/mask dataset");
  fs::path synth_out;
  int count = 0;
  int size = 128;
  std::uint64_t seed = 0;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--count", count, "Number of scenes")->required();
  synth->add_option("--size", size, "Square scene size in pixels");
  synth->add_option("--seed", seed, "Generator seed");

  auto* train = app.add_subcommand("train", "Train one stage and write a checkpoint");
  std::string stage, config;
  fs::path data_dir, ckpt_out, log_path;
  std::vector<std::string> overrides;
  train->add_option("--stage", stage, "lrscn or hrrn")->required()->check(CLI::IsMember({"lrscn", "hrrn"}));
  train->add_option("--config", config, "JSON config file (defaults when omitted)");
  train->add_option("--data", data_dir, "Dataset directory with images/ and masks/")->required();
  train->add_option("--out", ckpt_out, "Checkpoint path")->required();
  train->add_option("--override", overrides, "key=value config override (repeatable)");
  train->add_option("--log", log_path, "Training log path (default <out>.log.jsonl)");

  auto* infer = app.add_subcommand("infer", "Run the full pipeline on one image");
  fs::path image, lrscn_ckpt, hrrn_ckpt, infer_out, trimap_out;
  infer->add_option("--image", image, "Input PNG")->required();
  infer->add_option("--lrscn", lrscn_ckpt, "LRSCN checkpoint")->required();
  infer->add_option("--hrrn", hrrn_ckpt, "HRRN checkpoint")->required();
  infer->add_option("--out", infer_out, "Saliency PNG")->required();
  infer->add_option("--trimap-out", trimap_out, "Trimap PNG (0/128/255)");

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  fs::path pred_dir, gt_dir, eval_out, pr_out, jsonl_out;
  eval->add_option("--pred", pred_dir, "Prediction directory")->required();
  eval->add_option("--gt", gt_dir, "Ground-truth directory")->required();
  eval->add_option("--out", eval_out, "Metric CSV")->required();
  eval->add_option("--pr-out", pr_out, "Precision/recall CSV");
  eval->add_option("--jsonl-out", jsonl_out, "Per-image JSON lines");

  auto* ablate = app.add_subcommand("ablate", "Noisy-annotation ablation of the uncertainty loss");
  std::string ablate_config;
  fs::path ablate_out;
  std::vector<std::string> ablate_overrides;
  ablate->add_option("--config", ablate_config, "JSON config file (defaults when omitted)");
  ablate->add_option("--out", ablate_out, "Output directory")->required();
  ablate->add_option("--override", ablate_overrides, "key=value config override (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUserError;
  }

  try {
    apply_thread_limit();
    if (*synth) return cmd_synth(synth_out, count, size, seed);
    if (*train) return cmd_train(stage, config, data_dir, ckpt_out, overrides, log_path);
    if (*infer) return cmd_infer(image, lrscn_ckpt, hrrn_ckpt, infer_out, trimap_out);
    if (*eval) return cmd_eval(pred_dir, gt_dir, eval_out, pr_out, jsonl_out);
    if (*ablate) return cmd_ablate(ablate_config, ablate_out, ablate_overrides);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUserError;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kUserError;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}
