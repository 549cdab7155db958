#include "scd/train.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scd/checkpoint.hpp"
#include "scd/loss.hpp"
#include "scd/png_io.hpp"

namespace scd {

namespace fs = std::filesystem;
using nlohmann::json;

template <typename T>
Adam<T>::Adam(std::vector<typename Tape<T>::Param> params, double learning_rate)
    : lr_(learning_rate) {
  for (auto& p : params) {
    Slot s;
    s.param = p.tensor;
    s.m.assign(p.tensor.value().size(), T(0));
    s.v.assign(p.tensor.value().size(), T(0));
    slots_.push_back(std::move(s));
  }
}

template <typename T>
void Adam<T>::step() {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, t_);
  const double bc2 = 1.0 - std::pow(kBeta2, t_);
  for (Slot& s : slots_) {
    const std::vector<T>& g = s.param.grad();
    std::vector<T>& w = s.param.value();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      s.m[i] = static_cast<T>(kBeta1 * s.m[i] + (1.0 - kBeta1) * gi);
      s.v[i] = static_cast<T>(kBeta2 * s.v[i] + (1.0 - kBeta2) * gi * gi);
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      w[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + kEps));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

std::uint64_t train_pair_seed(std::uint64_t run_seed, int step, int batch_index) {
  return Rng(run_seed).fork(1000 + static_cast<std::uint64_t>(step) * 4096 + batch_index).next_u64();
}

std::uint64_t eval_pair_seed(std::uint64_t run_seed, int index) {
  return Rng(run_seed).fork(0x45564C00ull + index).next_u64();
}

SceneSpec scene_spec_from(const RunConfig& c) {
  SceneSpec s;
  s.min_shapes = c.scene_min_shapes;
  s.max_shapes = c.scene_max_shapes;
  s.min_size = c.scene_min_size;
  s.max_size = c.scene_max_size;
  s.change_probability = c.change_probability;
  s.photometric_jitter = c.photometric_jitter;
  s.alignment_jitter = c.alignment_jitter;
  return s;
}

std::vector<ChangePair<float>> held_out_pairs(const RunConfig& config) {
  const SceneSpec spec = scene_spec_from(config);
  std::vector<ChangePair<float>> pairs;
  pairs.reserve(config.eval_pairs);
  for (int i = 0; i < config.eval_pairs; ++i)
    pairs.push_back(generate_pair<float>(eval_pair_seed(config.seed, i), config.image_size,
                                         config.image_size, spec));
  return pairs;
}

MetricReport evaluate_on_pairs(const ChangeModel<float>& model, Tape<float>& tape,
                               const std::vector<ChangePair<float>>& pairs) {
  NoGradScope<float> guard(tape);
  Confusion confusion;
  for (const ChangePair<float>& pair : pairs) {
    const std::vector<Tensor<float>> logits = model.forward(pair.img0, pair.img1);
    confusion.add(predict(logits.back()), pair.gt);
  }
  return compute_metrics(confusion);
}

TrainResult train_model(const RunConfig& config, std::ostream* echo) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  fs::create_directories(config.out_dir);
  const std::string log_path = (fs::path(config.out_dir) / "train_log.jsonl").string();
  std::ofstream log(log_path);
  if (!log) throw std::runtime_error("cannot write training log: " + log_path);

  Tape<float> tape;
  Rng init_rng(config.seed);
  ChangeModel<float> model(tape, config, init_rng);
  Adam<float> opt(model.trainable_parameters(), config.learning_rate);

  const SceneSpec spec = scene_spec_from(config);
  const std::vector<double> iter_w = iteration_weights(config.iterations, config.gamma);

  TrainResult result;
  for (int step = 1; step <= config.steps; ++step) {
    tape.clear_ops();
    tape.zero_grad();

    std::vector<ChangePair<float>> batch;
    batch.reserve(config.batch_size);
    for (int b = 0; b < config.batch_size; ++b)
      batch.push_back(generate_pair<float>(train_pair_seed(config.seed, step, b),
                                           config.image_size, config.image_size, spec));

    std::vector<const LabelMap*> gts;
    for (const auto& p : batch) gts.push_back(&p.gt);
    const auto [w0, w1] = class_weights(gts);
    if (w0 == 0.0 || w1 == 0.0)
      std::cerr << "warning: step " << step
                << " batch contains a single class; the absent class dominates the weights\n";

    Tensor<float> total;
    std::vector<double> per_iter(config.iterations, 0.0);
    for (const ChangePair<float>& pair : batch) {
      const std::vector<Tensor<float>> preds = model.forward(pair.img0, pair.img1);
      LossReport<float> report =
          sequential_weighted_ce(preds, pair.gt, config.gamma, w0, w1);
      for (int k = 0; k < config.iterations; ++k)
        per_iter[k] += report.per_iteration[k] / config.batch_size;
      total = total.defined() ? add(total, report.total) : report.total;
    }
    if (config.batch_size > 1) total = scale(total, 1.0f / config.batch_size);

    const double loss_value = total.item();
    if (step == 1) result.first_loss = loss_value;
    result.final_loss = loss_value;

    json record{{"step", step}, {"total_loss", loss_value}, {"per_iter_losses", per_iter},
                {"iter_weights", iter_w}};
    log << record.dump() << "\n";
    if (echo) *echo << record.dump() << "\n";

    if (!std::isfinite(loss_value)) {
      json diag{{"step", step}, {"total_loss", loss_value}, {"per_iter_losses", per_iter},
                {"config", json::parse(to_json(config))}};
      std::ofstream diag_out(fs::path(config.out_dir) / "diagnostic.json");
      diag_out << diag.dump(2) << "\n";
      throw TrainDivergence("training loss went non-finite at step " + std::to_string(step) +
                            "; diagnostic snapshot written to " + config.out_dir);
    }

    tape.backward(total);
    opt.step();
  }
  tape.clear_ops();
  tape.zero_grad();

  const std::string ckpt_path = (fs::path(config.out_dir) / "model.ckpt").string();
  save_checkpoint(ckpt_path, tape);
  const std::string cfg_path = (fs::path(config.out_dir) / "config.json").string();
  save_config(cfg_path, config);

  std::vector<ChangePair<float>> eval_set = held_out_pairs(config);
  const std::string eval_dir = (fs::path(config.out_dir) / "eval").string();
  write_pairs_dir(eval_dir, eval_set);
  result.eval = evaluate_on_pairs(model, tape, eval_set);
  {
    std::ofstream metrics_out(fs::path(config.out_dir) / "metrics.json");
    metrics_out << metrics_to_json(result.eval) << "\n";
  }

  result.checkpoint_path = ckpt_path;
  result.config_path = cfg_path;
  result.log_path = log_path;
  result.eval_dir = eval_dir;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

LoadedModel load_model(const std::string& checkpoint_path, const std::string& config_path) {
  std::string cfg = config_path;
  if (cfg.empty()) {
    cfg = (fs::path(checkpoint_path).parent_path() / "config.json").string();
    if (!fs::exists(cfg))
      throw std::runtime_error("no config snapshot next to checkpoint; pass one explicitly");
  }
  LoadedModel lm;
  lm.config = load_config(cfg);
  lm.tape = std::make_unique<Tape<float>>();
  Rng rng(lm.config.seed);
  lm.model = std::make_unique<ChangeModel<float>>(*lm.tape, lm.config, rng);
  load_checkpoint(checkpoint_path, *lm.tape);
  return lm;
}

InferOutput infer_pair(const ChangeModel<float>& model, Tape<float>& tape,
                       const Tensor<float>& img0, const Tensor<float>& img1, int orig_h,
                       int orig_w, const LabelMap* gt) {
  NoGradScope<float> guard(tape);
  const std::vector<Tensor<float>> logits = model.forward(img0, img1);
  InferOutput out;
  out.mask = crop(predict(logits.back()), orig_h, orig_w);
  if (gt) {
    for (const Tensor<float>& l : logits)
      out.per_iter_f1.push_back(evaluate(crop(predict(l), orig_h, orig_w), *gt).f1_change);
    out.metrics = evaluate(out.mask, *gt);
    out.has_metrics = true;
  }
  return out;
}

std::vector<double> default_robust_magnitudes(int image_width) {
  const double s = static_cast<double>(image_width) / 512.0;
  return {50.0 * s, 100.0 * s};
}

RobustReport robustness_eval(const ChangeModel<float>& model, Tape<float>& tape,
                             const std::string& pairs_dir,
                             const std::vector<double>& magnitudes) {
  const PairsManifest manifest = read_pairs_manifest(pairs_dir);
  struct Loaded {
    Tensor<float> t0, t1;
    LabelMap gt;
  };
  std::vector<Loaded> pairs;
  for (const auto& entry : manifest.pairs) {
    const fs::path base = fs::path(pairs_dir) / "pairs";
    Loaded l;
    l.t0 = load_image((base / (entry.id + "_t0.png")).string()).image;
    l.t1 = load_image((base / (entry.id + "_t1.png")).string()).image;
    l.gt = load_mask((base / (entry.id + "_gt.png")).string());
    pairs.push_back(std::move(l));
  }
  if (pairs.empty()) throw std::runtime_error("no pairs found in " + pairs_dir);

  NoGradScope<float> guard(tape);
  const auto eval_with = [&](Perturbation::Kind kind, double magnitude,
                             bool perturb) -> MetricReport {
    Confusion confusion;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      Tensor<float> t0 = pairs[i].t0;
      if (perturb) {
        // one deterministic stream per (pair, kind, magnitude)
        Rng rng(Rng(0xB0B5u + static_cast<std::uint64_t>(i))
                    .fork(static_cast<std::uint64_t>(kind == Perturbation::Kind::Homography) * 7919 +
                          static_cast<std::uint64_t>(magnitude * 1024.0))
                    .next_u64());
        t0 = warp(t0, Perturbation{kind, magnitude}, rng);
      }
      const std::vector<Tensor<float>> logits = model.forward(t0, pairs[i].t1);
      confusion.add(crop(predict(logits.back()), pairs[i].gt.h, pairs[i].gt.w), pairs[i].gt);
    }
    return compute_metrics(confusion);
  };

  RobustReport report;
  report.baseline = eval_with(Perturbation::Kind::Translation, 0.0, false);
  for (const auto kind : {Perturbation::Kind::Translation, Perturbation::Kind::Homography}) {
    for (double m : magnitudes) {
      RobustRow row;
      row.kind = to_string(kind);
      row.magnitude = m;
      row.metrics = eval_with(kind, m, true);
      row.f1_delta = row.metrics.f1_change - report.baseline.f1_change;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string robust_report_to_json(const RobustReport& r) {
  json rows = json::array();
  for (const RobustRow& row : r.rows)
    rows.push_back({{"kind", row.kind},
                    {"magnitude", row.magnitude},
                    {"f1_change", row.metrics.f1_change},
                    {"miou", row.metrics.miou},
                    {"f1_delta", row.f1_delta}});
  json j{{"baseline_f1", r.baseline.f1_change}, {"baseline_miou", r.baseline.miou},
         {"rows", rows}};
  return j.dump(2);
}

std::string robust_report_to_text(const RobustReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %10s %8s %8s\n", "kind", "magnitude", "F1", "delta");
  out << line;
  std::snprintf(line, sizeof(line), "%-12s %10s %8.4f %8s\n", "baseline", "-",
                r.baseline.f1_change, "-");
  out << line;
  for (const RobustRow& row : r.rows) {
    std::snprintf(line, sizeof(line), "%-12s %10.2f %8.4f %+8.4f\n", row.kind.c_str(),
                  row.magnitude, row.metrics.f1_change, row.f1_delta);
    out << line;
  }
  return out.str();
}

AblationResult run_ablation(const RunConfig& base, const std::string& axis,
                            std::ostream* progress) {
  std::vector<std::string> values;
  if (axis == "iters")
    values = {"3", "5", "7", "10"};
  else if (axis == "gru-variant")
    values = {"none", "basic", "three-gate"};
  else if (axis == "fusion-mode")
    values = {"feature-maps-only", "local", "global", "both"};
  else
    throw std::invalid_argument("unknown ablation axis: " + axis +
                                " (expected iters | gru-variant | fusion-mode)");

  AblationResult result;
  result.axis = axis;
  for (const std::string& value : values) {
    RunConfig cfg = base;
    if (axis == "iters") {
      cfg.iterations = std::stoi(value);
    } else if (axis == "gru-variant") {
      cfg.gru_variant = value;
      if (value == "none") cfg.iterations = 1;
    } else {
      cfg.fusion_mode = value;
    }
    cfg.out_dir = (fs::path(base.out_dir) / ("ablate-" + axis) / value).string();
    if (progress) *progress << "ablate " << axis << " = " << value << "\n";
    const TrainResult tr = train_model(cfg);
    result.cells.push_back(AblationCell{value, tr.eval});
  }
  return result;
}

std::string ablation_to_json(const AblationResult& r) {
  json cells = json::array();
  for (const AblationCell& c : r.cells)
    cells.push_back({{"value", c.value},
                     {"f1_change", c.metrics.f1_change},
                     {"miou", c.metrics.miou}});
  return json{{"axis", r.axis}, {"cells", cells}}.dump(2);
}

std::string ablation_to_text(const AblationResult& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-20s %8s %8s\n", r.axis.c_str(), "F1", "mIoU");
  out << line;
  for (const AblationCell& c : r.cells) {
    std::snprintf(line, sizeof(line), "%-20s %8.4f %8.4f\n", c.value.c_str(),
                  c.metrics.f1_change, c.metrics.miou);
    out << line;
  }
  return out.str();
}

}  // namespace scd
