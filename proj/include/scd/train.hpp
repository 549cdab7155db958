#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "scd/config.hpp"
#include "scd/data.hpp"
#include "scd/metrics.hpp"
#include "scd/model.hpp"
#include "scd/tensor.hpp"

namespace scd {

// Gradient descent with adaptive moment estimation (beta1 = 0.9,
// beta2 = 0.999, eps = 1e-8).
template <typename T>
class Adam {
 public:
  Adam(std::vector<typename Tape<T>::Param> params, double learning_rate);
  void step();

 private:
  struct Slot {
    Tensor<T> param;
    std::vector<T> m, v;
  };
  std::vector<Slot> slots_;
  double lr_;
  int t_ = 0;
};

struct TrainResult {
  std::string checkpoint_path;
  std::string config_path;
  std::string log_path;
  std::string eval_dir;
  MetricReport eval;
  double first_loss = 0;
  double final_loss = 0;
  double seconds = 0;
};

// Thrown when the loss goes non-finite; a diagnostic snapshot has been
// written to the run directory by then.
struct TrainDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full training run: optimize on generated pairs, write checkpoint + config
// snapshot + JSONL log + the held-out pairs directory, evaluate on it.
// `echo` (optional) receives one JSON line per step.
TrainResult train_model(const RunConfig& config, std::ostream* echo = nullptr);

std::uint64_t train_pair_seed(std::uint64_t run_seed, int step, int batch_index);
std::uint64_t eval_pair_seed(std::uint64_t run_seed, int index);

SceneSpec scene_spec_from(const RunConfig& config);

std::vector<ChangePair<float>> held_out_pairs(const RunConfig& config);

// Micro-averaged metrics of the final-iteration prediction over the pairs.
MetricReport evaluate_on_pairs(const ChangeModel<float>& model, Tape<float>& tape,
                               const std::vector<ChangePair<float>>& pairs);

// Builds a model from the config snapshot next to the checkpoint (or an
// explicit config path) and restores the weights.
struct LoadedModel {
  RunConfig config;
  std::unique_ptr<Tape<float>> tape;
  std::unique_ptr<ChangeModel<float>> model;
};
LoadedModel load_model(const std::string& checkpoint_path, const std::string& config_path = "");

struct InferOutput {
  LabelMap mask;                    // final iteration, cropped to source size
  std::vector<double> per_iter_f1;  // empty without ground truth
  MetricReport metrics;
  bool has_metrics = false;
};
InferOutput infer_pair(const ChangeModel<float>& model, Tape<float>& tape,
                       const Tensor<float>& img0, const Tensor<float>& img1, int orig_h,
                       int orig_w, const LabelMap* gt);

struct RobustRow {
  std::string kind;
  double magnitude = 0;
  MetricReport metrics;
  double f1_delta = 0;  // vs. unperturbed
};
struct RobustReport {
  MetricReport baseline;
  std::vector<RobustRow> rows;
};
// Perturbs only the t0 image of every pair in the directory and re-runs
// inference per (kind, magnitude).
RobustReport robustness_eval(const ChangeModel<float>& model, Tape<float>& tape,
                             const std::string& pairs_dir, const std::vector<double>& magnitudes);
std::string robust_report_to_json(const RobustReport& r);
std::string robust_report_to_text(const RobustReport& r);

// Scaled equivalents of 50 and 100 px at a 512-px reference width.
std::vector<double> default_robust_magnitudes(int image_width);

struct AblationCell {
  std::string value;
  MetricReport metrics;
};
struct AblationResult {
  std::string axis;
  std::vector<AblationCell> cells;
};
// Axis "iters" sweeps {3,5,7,10}, "gru-variant" {none, basic, three-gate},
// "fusion-mode" {feature-maps-only, local, global, both}; every cell shares
// the base config's seed and budget.
AblationResult run_ablation(const RunConfig& base, const std::string& axis,
                            std::ostream* progress = nullptr);
std::string ablation_to_json(const AblationResult& r);
std::string ablation_to_text(const AblationResult& r);

}  // namespace scd
