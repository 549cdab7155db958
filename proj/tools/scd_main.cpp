#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scd/checkpoint.hpp"
#include "scd/config.hpp"
#include "scd/gradcheck.hpp"
#include "scd/metrics.hpp"
#include "scd/png_io.hpp"
#include "scd/report.hpp"
#include "scd/train.hpp"

namespace {

namespace fs = std::filesystem;

struct ConfigCli {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> steps, iters, image_size, batch_size, eval_pairs;
  std::optional<int> feature_channels, reduced_channels, corr_radius, corr_patch_radius;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, gamma, change_prob, jitter;
  std::optional<std::string> gru, fusion_mode, h0;
  std::optional<bool> frozen;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (defaults apply otherwise)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--steps", steps, "training steps");
    cmd->add_option("--iters", iters, "decoder iterations");
    cmd->add_option("--gru", gru, "decoder variant: none | basic | three-gate");
    cmd->add_option("--fusion-mode", fusion_mode,
                    "feature-maps-only | local | global | both");
    cmd->add_option("--h0", h0, "hidden-state init: feature | zero");
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--gamma", gamma, "sequential loss discount");
    cmd->add_option("--seed", seed, "run seed");
    cmd->add_option("--image-size", image_size, "synthetic image side (multiple of 16)");
    cmd->add_option("--batch", batch_size, "batch size");
    cmd->add_option("--radius", corr_radius, "correlation radius");
    cmd->add_option("--patch-radius", corr_patch_radius, "correlation patch radius");
    cmd->add_option("--feature-channels", feature_channels, "encoder channels per level");
    cmd->add_option("--reduced-channels", reduced_channels, "channels after 1x1 reduction");
    cmd->add_option("--eval-pairs", eval_pairs, "held-out pair count");
    cmd->add_option("--change-prob", change_prob, "probability a pair contains change");
    cmd->add_option("--jitter", jitter, "photometric jitter amplitude on t1");
    cmd->add_flag("--frozen-encoder,!--no-frozen-encoder", frozen,
                  "exclude encoder weights from the optimizer");
  }

  scd::RunConfig resolve() const {
    scd::RunConfig c = config_path.empty() ? scd::RunConfig{} : scd::load_config(config_path);
    if (out_dir) c.out_dir = *out_dir;
    if (steps) c.steps = *steps;
    if (iters) c.iterations = *iters;
    if (gru) c.gru_variant = *gru;
    if (fusion_mode) c.fusion_mode = *fusion_mode;
    if (h0) c.h0_mode = *h0;
    if (lr) c.learning_rate = *lr;
    if (gamma) c.gamma = *gamma;
    if (seed) c.seed = *seed;
    if (image_size) c.image_size = *image_size;
    if (batch_size) c.batch_size = *batch_size;
    if (corr_radius) c.corr_radius = *corr_radius;
    if (corr_patch_radius) c.corr_patch_radius = *corr_patch_radius;
    if (feature_channels) c.feature_channels = *feature_channels;
    if (reduced_channels) c.reduced_channels = *reduced_channels;
    if (eval_pairs) c.eval_pairs = *eval_pairs;
    if (change_prob) c.change_probability = *change_prob;
    if (jitter) c.photometric_jitter = *jitter;
    if (frozen) c.encoder_frozen = *frozen;
    c.validate();
    return c;
  }
};

int cmd_train(const ConfigCli& cli, bool verbose) {
  const scd::RunConfig config = cli.resolve();
  const scd::TrainResult result = scd::train_model(config, verbose ? &std::cout : nullptr);
  std::cout << "checkpoint: " << result.checkpoint_path << "\n"
            << "config:     " << result.config_path << "\n"
            << "log:        " << result.log_path << "\n"
            << "eval pairs: " << result.eval_dir << "\n"
            << "loss " << result.first_loss << " -> " << result.final_loss << " over "
            << config.steps << " steps (" << result.seconds << "s)\n"
            << scd::metrics_to_json(result.eval) << "\n";
  return 0;
}

int cmd_infer(const std::string& ckpt, const std::string& t0, const std::string& t1,
              const std::string& out, const std::string& gt_path, const std::string& config_path,
              std::string metrics_out) {
  scd::LoadedModel lm = scd::load_model(ckpt, config_path);
  const scd::LoadedImage a = scd::load_image(t0);
  const scd::LoadedImage b = scd::load_image(t1);
  if (a.orig_h != b.orig_h || a.orig_w != b.orig_w)
    throw std::invalid_argument("image pair differs in size");

  scd::LabelMap gt;
  const bool has_gt = !gt_path.empty();
  if (has_gt) {
    gt = scd::load_mask(gt_path);
    if (gt.h != a.orig_h || gt.w != a.orig_w)
      throw std::invalid_argument("ground-truth mask size does not match the image pair");
  }

  const scd::InferOutput result = scd::infer_pair(*lm.model, *lm.tape, a.image, b.image,
                                                  a.orig_h, a.orig_w, has_gt ? &gt : nullptr);
  scd::save_mask(out, result.mask);
  std::cout << "mask: " << out << " (" << result.mask.w << "x" << result.mask.h << ", change "
            << scd::change_fraction(result.mask) * 100 << "%)\n";
  if (has_gt) {
    for (std::size_t k = 0; k < result.per_iter_f1.size(); ++k)
      std::cout << "iteration " << k + 1 << ": F1 " << result.per_iter_f1[k] << "\n";
    if (metrics_out.empty()) metrics_out = out + ".metrics.json";
    std::ofstream mo(metrics_out);
    mo << scd::metrics_to_json(result.metrics) << "\n";
    std::cout << "metrics: " << metrics_out << "\n";
  }
  return 0;
}

int cmd_ablate(const ConfigCli& cli, const std::string& axis) {
  const scd::RunConfig config = cli.resolve();
  const scd::AblationResult result = scd::run_ablation(config, axis, &std::cerr);
  std::cout << scd::ablation_to_text(result);
  fs::create_directories(config.out_dir);
  const std::string json_path =
      (fs::path(config.out_dir) / ("ablate-" + axis + ".json")).string();
  std::ofstream out(json_path);
  out << scd::ablation_to_json(result) << "\n";
  std::cout << "written: " << json_path << "\n";
  return 0;
}

int cmd_robust(const std::string& ckpt, const std::string& pairs_dir,
               std::vector<double> magnitudes, const std::string& config_path,
               const std::string& out_path) {
  scd::LoadedModel lm = scd::load_model(ckpt, config_path);
  if (magnitudes.empty())
    magnitudes = scd::default_robust_magnitudes(lm.config.image_size);
  const scd::RobustReport report =
      scd::robustness_eval(*lm.model, *lm.tape, pairs_dir, magnitudes);
  std::cout << scd::robust_report_to_text(report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << scd::robust_report_to_json(report) << "\n";
    std::cout << "written: " << out_path << "\n";
  }
  return 0;
}

int cmd_report(const ConfigCli& cli, int height, int width, const std::string& modules,
               bool as_json) {
  const scd::RunConfig config = cli.resolve();
  if (height == 0) height = config.image_size;
  if (width == 0) width = config.image_size;
  scd::ModelReport report;
  if (modules.empty()) {
    report = scd::build_report(config, height, width);
  } else {
    std::set<std::string> only;
    std::string item;
    std::istringstream stream(modules);
    while (std::getline(stream, item, ',')) only.insert(item);
    report = scd::build_report(config, height, width, only);
  }
  std::cout << (as_json ? scd::report_to_json(report) + "\n" : scd::report_to_text(report));
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  const std::vector<scd::GradCheckRow> rows = scd::run_gradcheck(seed);
  std::cout << scd::gradcheck_table(rows);
  if (!scd::gradcheck_all_pass(rows)) {
    int failed = 0;
    for (const auto& r : rows) failed += r.pass ? 0 : 1;
    std::cerr << "E_GRADCHECK: " << failed << " op(s) exceeded tolerance\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scene change detection with correlation fusion and a recurrent decoder"};
  app.require_subcommand(1);

  ConfigCli train_cli;
  bool train_verbose = false;
  CLI::App* train = app.add_subcommand("train", "train on synthetic change pairs");
  train_cli.attach(train);
  train->add_flag("--verbose", train_verbose, "echo per-step JSON records to stdout");

  std::string in_ckpt, in_t0, in_t1, in_out = "mask.png", in_gt, in_cfg, in_metrics;
  CLI::App* infer = app.add_subcommand("infer", "predict a change mask for a PNG pair");
  infer->add_option("--ckpt", in_ckpt, "checkpoint file")->required();
  infer->add_option("--t0", in_t0, "image at t0")->required();
  infer->add_option("--t1", in_t1, "image at t1")->required();
  infer->add_option("--out", in_out, "output mask PNG");
  infer->add_option("--gt", in_gt, "ground-truth mask PNG (enables metrics)");
  infer->add_option("--model-config", in_cfg, "config snapshot (default: next to checkpoint)");
  infer->add_option("--metrics-out", in_metrics, "metrics JSON path");

  ConfigCli ablate_cli;
  std::string ablate_axis;
  CLI::App* ablate = app.add_subcommand("ablate", "train one model per axis value");
  ablate_cli.attach(ablate);
  ablate->add_option("--axis", ablate_axis, "iters | gru-variant | fusion-mode")->required();

  std::string rb_ckpt, rb_pairs, rb_cfg, rb_out;
  std::vector<double> rb_magnitudes;
  CLI::App* robust = app.add_subcommand("robust", "misalignment robustness evaluation");
  robust->add_option("--ckpt", rb_ckpt, "checkpoint file")->required();
  robust->add_option("--pairs", rb_pairs, "pairs directory with manifest.json")->required();
  robust->add_option("--magnitudes", rb_magnitudes,
                     "perturbation magnitudes in px (default: 50 and 100 scaled to image width)")
      ->delimiter(',');
  robust->add_option("--model-config", rb_cfg, "config snapshot (default: next to checkpoint)");
  robust->add_option("--out", rb_out, "report JSON path");

  ConfigCli report_cli;
  int rp_h = 0, rp_w = 0;
  std::string rp_modules;
  bool rp_json = false;
  CLI::App* report = app.add_subcommand("report", "parameter and FLOP accounting per module");
  report_cli.attach(report);
  report->add_option("--height", rp_h, "input height (default: image size)");
  report->add_option("--width", rp_w, "input width (default: image size)");
  report->add_option("--modules", rp_modules, "comma-separated module filter");
  report->add_flag("--json", rp_json, "print JSON instead of text");

  std::uint64_t gc_seed = 1;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--seed", gc_seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_USAGE: " << e.what() << "\n";
    return 1;
  }

  try {
    if (train->parsed()) return cmd_train(train_cli, train_verbose);
    if (infer->parsed())
      return cmd_infer(in_ckpt, in_t0, in_t1, in_out, in_gt, in_cfg, in_metrics);
    if (ablate->parsed()) return cmd_ablate(ablate_cli, ablate_axis);
    if (robust->parsed()) return cmd_robust(rb_ckpt, rb_pairs, rb_magnitudes, rb_cfg, rb_out);
    if (report->parsed()) return cmd_report(report_cli, rp_h, rp_w, rp_modules, rp_json);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "E_USAGE: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_RUNTIME: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
