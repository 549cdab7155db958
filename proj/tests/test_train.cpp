#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scd/checkpoint.hpp"
#include "scd/gradcheck.hpp"
#include "scd/train.hpp"

using namespace scd;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("scd-train-" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig tiny_config(const fs::path& out) {
  RunConfig c;
  c.image_size = 32;
  c.feature_channels = 6;
  c.reduced_channels = 3;
  c.corr_radius = 1;
  c.gating_channels = 8;
  c.hidden_channels = 8;
  c.iterations = 2;
  c.eval_pairs = 2;
  c.steps = 3;
  c.out_dir = out.string();
  return c;
}

std::vector<char> file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("one step at learning rate zero leaves the checkpoint at initialization") {
  TempDir tmp;
  RunConfig cfg = tiny_config(tmp.path / "run");
  cfg.steps = 1;
  cfg.learning_rate = 0.0;
  const TrainResult result = train_model(cfg);

  Tape<float> fresh;
  Rng rng(cfg.seed);
  ChangeModel<float> reference(fresh, cfg, rng);
  Tape<float> loaded_tape;
  Rng rng2(cfg.seed);
  ChangeModel<float> loaded(loaded_tape, cfg, rng2);
  load_checkpoint(result.checkpoint_path, loaded_tape);
  REQUIRE(fresh.parameters().size() == loaded_tape.parameters().size());
  for (std::size_t i = 0; i < fresh.parameters().size(); ++i)
    CHECK(fresh.parameters()[i].tensor.value() == loaded_tape.parameters()[i].tensor.value());
}

TEST_CASE("training steps actually move the parameters when the rate is nonzero") {
  TempDir tmp;
  RunConfig cfg = tiny_config(tmp.path / "run");
  cfg.steps = 2;
  const TrainResult result = train_model(cfg);
  Tape<float> fresh;
  Rng rng(cfg.seed);
  ChangeModel<float> reference(fresh, cfg, rng);
  Tape<float> loaded_tape;
  Rng rng2(cfg.seed);
  ChangeModel<float> loaded(loaded_tape, cfg, rng2);
  load_checkpoint(result.checkpoint_path, loaded_tape);
  bool any_moved = false;
  for (std::size_t i = 0; i < fresh.parameters().size(); ++i)
    any_moved |= fresh.parameters()[i].tensor.value() !=
                 loaded_tape.parameters()[i].tensor.value();
  CHECK(any_moved);
}

TEST_CASE("two runs with one seed produce byte-identical checkpoints") {
  TempDir tmp;
  RunConfig a = tiny_config(tmp.path / "a");
  RunConfig b = tiny_config(tmp.path / "b");
  const TrainResult ra = train_model(a);
  const TrainResult rb = train_model(b);
  CHECK(file_bytes(ra.checkpoint_path) == file_bytes(rb.checkpoint_path));
}

TEST_CASE("the training log is line-delimited JSON with the pinned fields") {
  TempDir tmp;
  RunConfig cfg = tiny_config(tmp.path / "run");
  cfg.iterations = 3;
  const TrainResult result = train_model(cfg);
  std::ifstream log(result.log_path);
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    ++lines;
    CHECK(j.at("step").get<int>() == lines);
    CHECK(j.at("total_loss").is_number());
    CHECK(j.at("per_iter_losses").size() == 3);
    const auto w = j.at("iter_weights").get<std::vector<double>>();
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(0.64));
    CHECK(w[2] == doctest::Approx(1.0));
  }
  CHECK(lines == cfg.steps);
}

TEST_CASE("training writes checkpoint, config snapshot, metrics and eval pairs") {
  TempDir tmp;
  const RunConfig cfg = tiny_config(tmp.path / "run");
  const TrainResult result = train_model(cfg);
  CHECK(fs::exists(result.checkpoint_path));
  CHECK(fs::exists(result.config_path));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "metrics.json"));
  CHECK(fs::exists(fs::path(result.eval_dir) / "manifest.json"));
  const RunConfig snapshot = load_config(result.config_path);
  CHECK(to_json(snapshot) == to_json(cfg));
}

TEST_CASE("a trained checkpoint reloads through the config snapshot for inference") {
  TempDir tmp;
  const RunConfig cfg = tiny_config(tmp.path / "run");
  const TrainResult result = train_model(cfg);
  LoadedModel lm = load_model(result.checkpoint_path);
  const auto pair = generate_pair<float>(7, cfg.image_size, cfg.image_size, scene_spec_from(cfg));
  const InferOutput out = infer_pair(*lm.model, *lm.tape, pair.img0, pair.img1, cfg.image_size,
                                     cfg.image_size, &pair.gt);
  CHECK(out.mask.h == cfg.image_size);
  CHECK(out.has_metrics);
  CHECK(out.per_iter_f1.size() == static_cast<std::size_t>(cfg.iterations));
}

TEST_CASE("an exploding learning rate aborts with a diagnostic snapshot") {
  TempDir tmp;
  RunConfig cfg = tiny_config(tmp.path / "run");
  cfg.steps = 60;
  cfg.learning_rate = 1e8;
  CHECK_THROWS_AS(train_model(cfg), TrainDivergence);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "diagnostic.json"));
}

TEST_CASE("the gradcheck fault-injection fixture fails exactly the corrupted row") {
  GradCheckOptions opts;
  opts.corrupt_op = "mul";
  opts.e2e_samples_per_param = 1;
  const auto rows = run_gradcheck(11, opts);
  for (const auto& row : rows) {
    CAPTURE(row.op);
    if (row.op == "mul")
      CHECK_FALSE(row.pass);
    else
      CHECK(row.pass);
  }
}
