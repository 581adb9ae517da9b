#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "specband/error.hpp"

using namespace specband;
using namespace specband::cli;

namespace {

constexpr int kUsage = 2;
constexpr int kIo = 3;
constexpr int kNumerical = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::HeaderMismatch:
    case ErrorKind::TruncatedPayload:
    case ErrorKind::UnsupportedDtype:
    case ErrorKind::RegistrationMismatch:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::EmptyCube:
      return kIo;
    case ErrorKind::NonFinite:
    case ErrorKind::NonFiniteGradient:
    case ErrorKind::DivergedLoss:
    case ErrorKind::RankDeficient:
    case ErrorKind::DegenerateInput:
      return kNumerical;
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidSpec:
    case ErrorKind::EvenPatchSize:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::InsufficientSamples:
    case ErrorKind::EmptyTestSet:
      return kUsage;
  }
  return kUsage;
}

void add_inputs(CLI::App* cmd, InputPaths& p) {
  cmd->add_option("--hsi", p.hsi, "HSI cube (base path, .json or .raw)")->required();
  cmd->add_option("--aux", p.aux, "Auxiliary cube")->required();
  cmd->add_option("--labels", p.labels, "Label raster")->required();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Multi-source hyperspectral classification with key band selection"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic two-source scene with planted bands");
  cmd_synth->add_option("--height", synth.spec.height)->capture_default_str();
  cmd_synth->add_option("--width", synth.spec.width)->capture_default_str();
  cmd_synth->add_option("--classes", synth.spec.classes)->capture_default_str();
  cmd_synth->add_option("--bands", synth.spec.bands)->capture_default_str();
  cmd_synth->add_option("--aux-bands", synth.spec.aux_bands)->capture_default_str();
  cmd_synth->add_option("--planted", synth.spec.planted_bands, "Comma-separated planted band indices")
      ->delimiter(',')
      ->capture_default_str();
  cmd_synth->add_option("--gap", synth.spec.class_signature_gap, "Class level spread, in noise sigmas")
      ->capture_default_str();
  cmd_synth->add_option("--noise", synth.spec.noise_sigma)->capture_default_str();
  cmd_synth->add_option("--rho", synth.spec.redundancy_rho, "Correlation among non-planted bands")
      ->capture_default_str();
  cmd_synth->add_option("--aux-gap", synth.spec.aux_signature_gap)->capture_default_str();
  cmd_synth->add_option("--aux-noise", synth.spec.aux_noise_sigma)->capture_default_str();
  cmd_synth->add_option("--region-size", synth.spec.region_size)->capture_default_str();
  cmd_synth->add_option("--labeled-fraction", synth.spec.labeled_fraction)->capture_default_str();
  cmd_synth->add_flag("--complementary", synth.spec.complementary,
                      "HSI separates class 1 only, aux confuses classes 1 and 2");
  cmd_synth->add_option("--seed", synth.spec.seed)->capture_default_str();
  cmd_synth->add_option("--out", synth.out, "Output directory")->required();

  TrainOptions tr;
  std::string optimizer = "adam";
  std::string sources = "both";
  bool no_pca = false;
  auto* cmd_train = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_inputs(cmd_train, tr.inputs);
  cmd_train->add_option("--patch-size", tr.model.patch_size)->capture_default_str();
  cmd_train->add_option("--band-ratio", tr.model.band_ratio, "Fraction of bands kept by selection, in (0, 1]")
      ->capture_default_str();
  cmd_train->add_option("--blocks", tr.model.num_blocks)->capture_default_str();
  cmd_train->add_option("--reduced-bands", tr.reduced_bands, "PCA bands (default: number of aux bands)");
  cmd_train->add_option("--width", tr.model.width, "Fused channel width")->capture_default_str();
  cmd_train->add_option("--attention-width", tr.model.attention_width)->capture_default_str();
  cmd_train->add_option("--hsi-hidden", tr.model.hsi_hidden)->capture_default_str();
  cmd_train->add_option("--sources", sources, "both | hsi | aux")->capture_default_str();
  cmd_train->add_flag("--no-pca", no_pca, "Feed the full HSI to the reduced branch");
  cmd_train->add_flag("--share-blocks", tr.model.share_block_params);
  cmd_train->add_flag("--freeze-selection", tr.model.freeze_selection, "Reuse the first block's selection");
  cmd_train->add_option("--epochs", tr.train.epochs)->capture_default_str();
  cmd_train->add_option("--lr", tr.train.learning_rate)->capture_default_str();
  cmd_train->add_option("--batch-size", tr.train.batch_size)->capture_default_str();
  cmd_train->add_option("--optimizer", optimizer, "adam | sgd")->capture_default_str();
  cmd_train->add_option("--seed", tr.train.seed)->capture_default_str();
  cmd_train->add_option("--train-per-class", tr.train_per_class)->capture_default_str();
  cmd_train->add_option("--split-seed", tr.split_seed, "Split seed (default: --seed)");
  cmd_train->add_option("--out", tr.out)->required();

  EvalOptions ev;
  std::string eval_part = "test";
  auto* cmd_eval = app.add_subcommand("eval", "Evaluate a checkpoint and write a classification map");
  add_inputs(cmd_eval, ev.inputs);
  cmd_eval->add_option("--checkpoint", ev.checkpoint)->required();
  cmd_eval->add_option("--split", eval_part, "train | test | all")->capture_default_str();
  cmd_eval->add_option("--out", ev.out)->required();

  SelectOptions sel;
  std::string sel_part = "all";
  auto* cmd_select = app.add_subcommand("select-bands", "Dataset-level band selection from a checkpoint");
  add_inputs(cmd_select, sel.inputs);
  cmd_select->add_option("--checkpoint", sel.checkpoint)->required();
  cmd_select->add_option("--split", sel_part, "train | test | all")->capture_default_str();
  cmd_select->add_option("--block", sel.block)->capture_default_str();
  cmd_select->add_option("--out", sel.out)->required();

  AnalyzeOptions an;
  auto* cmd_analyze = app.add_subcommand("analyze", "Band redundancy (ACC) and label information (MI)");
  cmd_analyze->add_option("--hsi", an.hsi)->required();
  cmd_analyze->add_option("--labels", an.labels)->required();
  cmd_analyze->add_option("--aux", an.aux);
  cmd_analyze->add_option("--checkpoint", an.checkpoint, "Compare against the checkpoint's selected bands");
  cmd_analyze->add_option("--bands", an.bands, "Comma-separated selected bands")->delimiter(',');
  cmd_analyze->add_flag("--acc", an.acc);
  cmd_analyze->add_flag("--mi", an.mi);
  cmd_analyze->add_option("--out", an.out)->required();

  GradcheckOptions gc;
  auto* cmd_grad = app.add_subcommand("gradcheck", "Finite-difference check of every op and a toy network");
  cmd_grad->add_option("--seed", gc.seed)->capture_default_str();
  cmd_grad->add_option("--tolerance", gc.tolerance)->capture_default_str();
  cmd_grad->add_option("--out", gc.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*cmd_synth) return run_synth(synth, args);
    if (*cmd_train) {
      tr.train.optimizer = optimizer_from_string(optimizer);
      tr.model.sources = sources_from_string(sources);
      tr.model.use_pca = !no_pca;
      return run_train(tr, args);
    }
    if (*cmd_eval) {
      ev.part = split_part_from_string(eval_part);
      return run_eval(ev, args);
    }
    if (*cmd_select) {
      sel.part = split_part_from_string(sel_part);
      return run_select(sel, args);
    }
    if (*cmd_analyze) return run_analyze(an, args);
    if (*cmd_grad) return run_gradcheck(gc, args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
