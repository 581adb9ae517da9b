#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "json.hpp"
#include "run_manifest.hpp"
#include "specband/error.hpp"
#include "specband/gradsuite.hpp"
#include "specband/parallel.hpp"
#include "specband/pipeline.hpp"

namespace specband::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void make_out_dir(const fs::path& out) {
  if (out.empty()) fail(ErrorKind::InvalidArgument, "--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + out.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

void add_raster_outputs(RunManifest& m, const fs::path& base) {
  m.add_output(header_path(base));
  m.add_output(payload_path(base));
}

struct Inputs {
  HyperCube hsi;
  HyperCube aux;
  LabelRaster labels;
};

Inputs read_inputs(const InputPaths& p, RunManifest& m) {
  if (p.hsi.empty() || p.aux.empty() || p.labels.empty()) {
    fail(ErrorKind::InvalidArgument, "--hsi, --aux and --labels are required");
  }
  Inputs in{read_cube(p.hsi), read_cube(p.aux), read_labels(p.labels)};
  if (in.hsi.height != in.aux.height || in.hsi.width != in.aux.width || in.hsi.height != in.labels.height ||
      in.hsi.width != in.labels.width) {
    fail(ErrorKind::RegistrationMismatch, "hsi, aux and labels must share height and width");
  }
  m.add_input("hsi", p.hsi);
  m.add_input("aux", p.aux);
  m.add_input("labels", p.labels);
  return in;
}

// Split parameters stored with the checkpoint so later commands see the
// same train/test partition.
struct SplitInfo {
  std::size_t train_per_class = 0;
  std::uint64_t seed = 0;
};

SplitInfo split_info(const std::string& extra_json) {
  try {
    const json extra = json::parse(extra_json);
    return {extra.at("train_per_class").get<std::size_t>(), extra.at("split_seed").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    fail(ErrorKind::HeaderMismatch, std::string("checkpoint lacks split information: ") + e.what());
  }
}

struct LoadedRun {
  LoadedCheckpoint ckpt;
  PatchSet patches;
  Split split;
};

LoadedRun load_run(const fs::path& checkpoint, const Inputs& in, RunManifest& m) {
  if (checkpoint.empty()) fail(ErrorKind::InvalidArgument, "--checkpoint is required");
  m.add_input("checkpoint", checkpoint);
  LoadedRun run{load_checkpoint(checkpoint), {}, {}};
  const ModelConfig& cfg = run.ckpt.params.config;
  if (in.hsi.bands != cfg.hsi_bands || in.aux.bands != cfg.aux_bands) {
    fail(ErrorKind::ShapeMismatch, "checkpoint expects " + std::to_string(cfg.hsi_bands) + " hsi and " +
                                       std::to_string(cfg.aux_bands) + " aux bands, inputs have " +
                                       std::to_string(in.hsi.bands) + " and " + std::to_string(in.aux.bands));
  }
  if (in.labels.num_classes() > cfg.num_classes) {
    fail(ErrorKind::ShapeMismatch, "labels hold " + std::to_string(in.labels.num_classes()) +
                                       " classes, checkpoint was trained for " + std::to_string(cfg.num_classes));
  }
  const Preprocessing prep = preprocessing_from_tensors(run.ckpt.extra_tensors);
  run.patches = prepare_patches(prep, in.hsi, in.aux, in.labels, cfg.patch_size);
  run.patches.num_classes = cfg.num_classes;
  const SplitInfo info = split_info(run.ckpt.extra_json);
  run.split = split(label_sites(in.labels), info.train_per_class, info.seed);
  return run;
}

std::vector<std::size_t> part_indices(const LoadedRun& run, SplitPart part) {
  switch (part) {
    case SplitPart::Train:
      return run.split.train;
    case SplitPart::Test:
      return run.split.test;
    case SplitPart::All:
      break;
  }
  std::vector<std::size_t> all(run.patches.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

std::string part_name(SplitPart p) {
  switch (p) {
    case SplitPart::Train:
      return "train";
    case SplitPart::Test:
      return "test";
    case SplitPart::All:
      return "all";
  }
  return "all";
}

// Evenly spaced hues at full saturation, class 1 red.
json palette(int classes) {
  json colors = json::array();
  for (int c = 1; c <= classes; ++c) {
    const double h = 6.0 * (c - 1) / classes;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
      case 0: r = 1, g = x; break;
      case 1: r = x, g = 1; break;
      case 2: g = 1, b = x; break;
      case 3: g = x, b = 1; break;
      case 4: r = x, b = 1; break;
      default: r = 1, b = x; break;
    }
    auto byte = [](double v) { return static_cast<int>(std::lround(255.0 * v)); };
    colors.push_back({{"class", c}, {"rgb", {byte(r), byte(g), byte(b)}}});
  }
  return {{"unlabeled", 0}, {"classes", colors}};
}

json redundancy_json(const RedundancyReport& r, bool acc, bool mi) {
  json j{{"bands", r.bands}};
  if (acc) {
    j["acc"] = r.acc;
    j["constant_bands"] = r.constant_bands;
  }
  if (mi) j["mi"] = r.mi;
  return j;
}

}  // namespace

SplitPart split_part_from_string(const std::string& name) {
  if (name == "train") return SplitPart::Train;
  if (name == "test") return SplitPart::Test;
  if (name == "all") return SplitPart::All;
  fail(ErrorKind::InvalidArgument, "unknown split '" + name + "' (train, test, all)");
}

int run_synth(const SynthOptions& o, const std::vector<std::string>& argv) {
  o.spec.validate();
  make_out_dir(o.out);
  RunManifest m("synth", argv);
  const SynthSpec& s = o.spec;
  m.set_seed(s.seed);
  m.config() = {{"height", s.height},
                {"width", s.width},
                {"classes", s.classes},
                {"bands", s.bands},
                {"aux_bands", s.aux_bands},
                {"planted", s.planted_bands},
                {"gap", s.class_signature_gap},
                {"noise", s.noise_sigma},
                {"rho", s.redundancy_rho},
                {"aux_gap", s.aux_signature_gap},
                {"aux_noise", s.aux_noise_sigma},
                {"region_size", s.region_size},
                {"labeled_fraction", s.labeled_fraction},
                {"complementary", s.complementary}};
  const SynthScene scene = synth_generate(s);
  m.mark("generate_ms");
  write_cube(scene.hsi, o.out / "hsi");
  write_cube(scene.aux, o.out / "aux");
  write_labels(scene.labels, o.out / "labels");
  const json truth{{"planted", scene.planted}, {"bands", s.bands}, {"classes", s.classes}, {"seed", s.seed}};
  write_text(o.out / "truth.json", truth.dump(2) + "\n");
  for (const char* base : {"hsi", "aux", "labels"}) add_raster_outputs(m, o.out / base);
  m.add_output(o.out / "truth.json");
  m.write(o.out);
  std::cout << "wrote " << s.height << "x" << s.width << " scene with " << s.bands << " bands to " << o.out.string()
            << "\n";
  return 0;
}

int run_train(TrainOptions o, const std::vector<std::string>& argv) {
  make_out_dir(o.out);
  RunManifest m("train", argv);
  const Inputs in = read_inputs(o.inputs, m);
  m.mark("load_ms");

  ModelConfig& cfg = o.model;
  cfg.hsi_bands = in.hsi.bands;
  cfg.aux_bands = in.aux.bands;
  cfg.reduced_bands = o.reduced_bands == 0 ? in.aux.bands : o.reduced_bands;
  cfg.num_classes = in.labels.num_classes();
  cfg.validate();
  if (cfg.reduced_bands > in.hsi.bands) {
    fail(ErrorKind::InvalidArgument, "--reduced-bands " + std::to_string(cfg.reduced_bands) + " exceeds hsi bands " +
                                         std::to_string(in.hsi.bands));
  }
  o.train.validate();
  const std::uint64_t split_seed = o.split_seed < 0 ? o.train.seed : static_cast<std::uint64_t>(o.split_seed);
  if (o.train_per_class == 0) fail(ErrorKind::InvalidArgument, "--train-per-class must be >= 1");

  const PreparedScene scene =
      prepare_scene(in.hsi, in.aux, in.labels, o.train_per_class, split_seed, cfg.reduced_bands, cfg.patch_size);
  m.mark("preprocess_ms");

  m.set_seed(o.train.seed);
  m.config() = {{"model", json::parse(config_to_json(cfg))},
                {"epochs", o.train.epochs},
                {"batch_size", o.train.batch_size},
                {"lr", o.train.learning_rate},
                {"optimizer", to_string(o.train.optimizer)},
                {"train_per_class", o.train_per_class},
                {"split_seed", split_seed},
                {"train_samples", scene.split.train.size()},
                {"test_samples", scene.split.test.size()}};

  ModelParams params = ModelParams::init(cfg);
  o.train.divergence_dump = o.out / "diverged";
  const TrainResult result = train(params, scene.patches, scene.split.train, o.train,
                                   [](std::size_t epoch, double loss) {
                                     std::cout << "epoch " << epoch << " loss " << loss << "\n";
                                   });
  m.mark("train_ms");

  const json extra{{"train_per_class", o.train_per_class}, {"split_seed", split_seed}};
  save_checkpoint(params, o.out / "model", extra.dump(), preprocessing_tensors(scene.prep));
  write_text(o.out / "loss.csv", loss_csv(result));
  add_raster_outputs(m, o.out / "model");
  m.add_output(o.out / "loss.csv");
  m.write(o.out);
  std::cout << "parameters " << count_params(params) << ", checkpoint " << (o.out / "model").string() << "\n";
  return 0;
}

int run_eval(const EvalOptions& o, const std::vector<std::string>& argv) {
  make_out_dir(o.out);
  RunManifest m("eval", argv);
  const Inputs in = read_inputs(o.inputs, m);
  LoadedRun run = load_run(o.checkpoint, in, m);
  ModelParams& params = run.ckpt.params;
  m.set_seed(params.config.seed);
  m.config() = {{"split", part_name(o.part)}, {"model", json::parse(config_to_json(params.config))}};
  m.mark("load_ms");

  const unsigned threads = configured_threads();
  const std::vector<int> predicted = argmax_classes(predict_logits(params, run.patches, {}, threads));
  m.mark("predict_ms");

  const std::vector<std::size_t> idx = part_indices(run, o.part);
  std::vector<int> truth, pred;
  for (std::size_t i : idx) {
    truth.push_back(run.patches.patches[i].label);
    pred.push_back(predicted[i]);
  }
  const EvalReport report = evaluate_predictions(truth, pred, params.config.num_classes);
  json doc = json::parse(to_json(report));
  doc["split"] = part_name(o.part);
  write_text(o.out / "report.json", doc.dump(2) + "\n");

  LabelRaster map(in.labels.height, in.labels.width);
  for (std::size_t i = 0; i < run.patches.size(); ++i) {
    map.at(run.patches.patches[i].row, run.patches.patches[i].col) = predicted[i];
  }
  write_labels(map, o.out / "classmap");
  write_text(o.out / "palette.json", palette(params.config.num_classes).dump(2) + "\n");

  m.add_output(o.out / "report.json");
  add_raster_outputs(m, o.out / "classmap");
  m.add_output(o.out / "palette.json");
  m.write(o.out);
  std::cout << "split " << part_name(o.part) << " samples " << report.total << " OA " << report.oa << " AA "
            << report.aa << " kappa " << report.kappa << "\n";
  return 0;
}

int run_select(const SelectOptions& o, const std::vector<std::string>& argv) {
  make_out_dir(o.out);
  RunManifest m("select-bands", argv);
  const Inputs in = read_inputs(o.inputs, m);
  LoadedRun run = load_run(o.checkpoint, in, m);
  m.set_seed(run.ckpt.params.config.seed);
  m.config() = {{"split", part_name(o.part)}, {"block", o.block}};
  const std::vector<std::size_t> idx = part_indices(run, o.part);
  const DatasetSelection sel = select_bands(run.ckpt.params, run.patches, idx, o.block, configured_threads());
  m.mark("select_ms");
  const json doc{{"k", sel.k}, {"indices", sel.indices}, {"scores", sel.frequency}};
  write_text(o.out / "selection.json", doc.dump(2) + "\n");
  m.add_output(o.out / "selection.json");
  m.write(o.out);
  std::cout << "k " << sel.k << " indices";
  for (std::size_t b : sel.indices) std::cout << " " << b;
  std::cout << "\n";
  return 0;
}

int run_analyze(const AnalyzeOptions& o, const std::vector<std::string>& argv) {
  if (o.hsi.empty() || o.labels.empty()) fail(ErrorKind::InvalidArgument, "--hsi and --labels are required");
  if (!o.checkpoint.empty() && !o.bands.empty()) {
    fail(ErrorKind::InvalidArgument, "give either --checkpoint or --bands, not both");
  }
  const bool acc = o.acc || !o.mi;
  const bool mi = o.mi || !o.acc;
  make_out_dir(o.out);
  RunManifest m("analyze", argv);
  const HyperCube hsi = read_cube(o.hsi);
  const LabelRaster labels = read_labels(o.labels);
  m.add_input("hsi", o.hsi);
  m.add_input("labels", o.labels);

  std::vector<std::size_t> selected = o.bands;
  Preprocessing prep;
  if (!o.checkpoint.empty()) {
    if (o.aux.empty()) fail(ErrorKind::InvalidArgument, "--checkpoint needs --aux");
    const HyperCube aux = read_cube(o.aux);
    m.add_input("aux", o.aux);
    LoadedRun run = load_run(o.checkpoint, {hsi, aux, labels}, m);
    prep = preprocessing_from_tensors(run.ckpt.extra_tensors);
    selected = select_bands(run.ckpt.params, run.patches, {}, 0, configured_threads()).indices;
  } else {
    prep.hsi_stats = fit_band_stats(hsi, &labels);
  }
  for (std::size_t b : selected) {
    if (b >= hsi.bands) {
      fail(ErrorKind::IndexOutOfRange, "band " + std::to_string(b) + " out of range [0, " + std::to_string(hsi.bands) + ")");
    }
  }
  m.config() = {{"acc", acc}, {"mi", mi}, {"selected", selected}};

  const LabeledPixels px = labeled_pixels(prep, hsi, labels);
  auto measure = [&](const std::vector<double>& features, std::size_t c) {
    RedundancyReport r;
    r.bands = c;
    if (acc) r.acc = redundancy_acc(features, px.n, c, &r.constant_bands);
    if (mi) r.mi = redundancy_mi(features, px.n, c, px.labels);
    return r;
  };
  json doc{{"pixels", px.n}, {"all", redundancy_json(measure(px.features, px.bands), acc, mi)}};
  if (!selected.empty()) {
    const std::vector<double> sub = select_columns(px.features, px.n, px.bands, selected);
    doc["selected"] = redundancy_json(measure(sub, selected.size()), acc, mi);
    doc["selected"]["indices"] = selected;
  }
  m.mark("analyze_ms");
  write_text(o.out / "analysis.json", doc.dump(2) + "\n");
  m.add_output(o.out / "analysis.json");
  m.write(o.out);
  std::cout << doc.dump() << "\n";
  return 0;
}

int run_gradcheck(const GradcheckOptions& o, const std::vector<std::string>& argv) {
  RunManifest m("gradcheck", argv);
  m.set_seed(o.seed);
  m.config() = {{"tolerance", o.tolerance}};
  const GradSuiteReport report = gradient_suite(o.seed);
  m.mark("suite_ms");
  json cases = json::array();
  for (const GradCaseResult& c : report.cases) {
    std::cout << c.name << " " << c.max_rel_error << " (" << c.checked << " entries)\n";
    cases.push_back({{"name", c.name}, {"max_rel_error", c.max_rel_error}, {"checked", c.checked}});
  }
  const bool ok = report.max_rel_error <= o.tolerance;
  std::cout << "max rel-err " << report.max_rel_error << (ok ? " ok" : " exceeds tolerance") << "\n";
  if (!o.out.empty()) {
    make_out_dir(o.out);
    const json doc{{"cases", cases}, {"max_rel_error", report.max_rel_error}, {"tolerance", o.tolerance}, {"pass", ok}};
    write_text(o.out / "gradcheck.json", doc.dump(2) + "\n");
    m.add_output(o.out / "gradcheck.json");
    m.write(o.out);
  }
  return ok ? 0 : 4;
}

}  // namespace specband::cli
