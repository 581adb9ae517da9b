#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specband/dataio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace specband;

namespace {

fs::path work_dir(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / ("specband_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SPECBAND_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string inputs(const fs::path& scene) {
  return "--hsi " + (scene / "hsi").string() + " --aux " + (scene / "aux").string() + " --labels " +
         (scene / "labels").string();
}

// Small two-class scene for fast train/eval round trips.
fs::path small_scene(const fs::path& dir, int seed = 3) {
  const fs::path out = dir / "scene";
  EXPECT_EQ(run("synth --height 12 --width 12 --bands 8 --planted 1,5 --classes 2 --seed " + std::to_string(seed) +
                " --out " + out.string()),
            0);
  return out;
}

}  // namespace

TEST(Cli, SynthEchoesPlantedBands) {
  const fs::path dir = work_dir("synth");
  ASSERT_EQ(run("synth --bands 30 --planted 2,7,19 --classes 3 --seed 1 --out " + (dir / "a").string()), 0);
  const json truth = read_json(dir / "a" / "truth.json");
  EXPECT_EQ(truth["planted"], json::array({2, 7, 19}));
  for (const char* base : {"hsi", "aux", "labels"}) {
    EXPECT_TRUE(fs::exists(dir / "a" / (std::string(base) + ".json")));
    EXPECT_TRUE(fs::exists(dir / "a" / (std::string(base) + ".raw")));
  }
  EXPECT_TRUE(fs::exists(dir / "a" / "manifest.json"));
}

TEST(Cli, SynthIsDeterministic) {
  const fs::path dir = work_dir("synth_det");
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run("synth --bands 30 --planted 2,7,19 --classes 3 --seed 1 --out " + (dir / sub).string()), 0);
  }
  for (const char* f : {"hsi.raw", "hsi.json", "aux.raw", "labels.raw", "truth.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  // Output digests recorded in the manifests agree as well.
  EXPECT_EQ(read_json(dir / "a" / "manifest.json")["outputs"], read_json(dir / "b" / "manifest.json")["outputs"]);
}

TEST(Cli, UsageErrorsExitTwo) {
  const fs::path dir = work_dir("usage");
  EXPECT_EQ(run("synth --planted 40 --bands 30 --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run("synth --bands 30 --out"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  const fs::path scene = small_scene(dir);
  EXPECT_EQ(run("train " + inputs(scene) + " --band-ratio 1.5 --out " + (dir / "t").string()), 2);
  EXPECT_EQ(run("train " + inputs(scene) + " --patch-size 4 --out " + (dir / "t").string()), 2);
  EXPECT_EQ(run("train " + inputs(scene) + " --train-per-class 100000 --out " + (dir / "t").string()), 2);
}

TEST(Cli, BandRatioHalfIsAccepted) {
  const fs::path dir = work_dir("ratio");
  const fs::path scene = small_scene(dir);
  EXPECT_EQ(run("train " + inputs(scene) +
                " --band-ratio 0.5 --patch-size 3 --blocks 1 --epochs 1 --train-per-class 4 --out " +
                (dir / "t").string()),
            0);
  EXPECT_EQ(read_json(dir / "t" / "model.json")["config"]["band_ratio"], 0.5);
}

TEST(Cli, MissingInputExitsThree) {
  const fs::path dir = work_dir("io");
  const fs::path scene = small_scene(dir);
  EXPECT_EQ(run("train --hsi " + (dir / "nothing").string() + " --aux " + (scene / "aux").string() + " --labels " +
                (scene / "labels").string() + " --out " + (dir / "t").string()),
            3);
  EXPECT_EQ(run("eval " + inputs(scene) + " --checkpoint " + (dir / "none").string() + " --out " +
                (dir / "e").string()),
            3);
}

TEST(Cli, DivergenceExitsFourAndDumpsState) {
  const fs::path dir = work_dir("diverge");
  const fs::path scene = small_scene(dir);
  EXPECT_EQ(run("train " + inputs(scene) +
                " --patch-size 3 --blocks 1 --epochs 3 --train-per-class 4 --optimizer sgd --lr 1e300 --out " +
                (dir / "t").string()),
            4);
  EXPECT_TRUE(fs::exists(dir / "t" / "diverged.json"));
}

TEST(Cli, MemorizesTenSamples) {
  const fs::path dir = work_dir("memorize");
  const fs::path scene = small_scene(dir);
  ASSERT_EQ(run("train " + inputs(scene) +
                " --patch-size 5 --blocks 1 --width 8 --attention-width 8 --train-per-class 5 --batch-size 10"
                " --epochs 200 --lr 1e-2 --seed 2 --out " +
                (dir / "t").string()),
            0);
  ASSERT_EQ(run("eval " + inputs(scene) + " --checkpoint " + (dir / "t" / "model").string() + " --split train --out " +
                (dir / "e").string()),
            0);
  const json report = read_json(dir / "e" / "report.json");
  EXPECT_EQ(report["total"], 10);
  EXPECT_EQ(report["oa"], 1.0);
}

TEST(Cli, EvalWritesMapAndPalette) {
  const fs::path dir = work_dir("map");
  const fs::path scene = small_scene(dir);
  ASSERT_EQ(run("train " + inputs(scene) + " --patch-size 3 --blocks 1 --epochs 1 --train-per-class 4 --out " +
                (dir / "t").string()),
            0);
  ASSERT_EQ(run("eval " + inputs(scene) + " --checkpoint " + (dir / "t" / "model").string() + " --out " +
                (dir / "e").string()),
            0);
  const LabelRaster truth = read_labels(scene / "labels");
  const LabelRaster map = read_labels(dir / "e" / "classmap");
  ASSERT_EQ(map.labels.size(), truth.labels.size());
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    if (truth.labels[i] == 0) {
      EXPECT_EQ(map.labels[i], 0);
    } else {
      EXPECT_GE(map.labels[i], 1);
      EXPECT_LE(map.labels[i], 2);
    }
  }
  const json palette = read_json(dir / "e" / "palette.json");
  EXPECT_EQ(palette["classes"].size(), 2u);
  const json manifest = read_json(dir / "e" / "manifest.json");
  EXPECT_EQ(manifest["command"], "eval");
  EXPECT_EQ(manifest["inputs"].size(), 4u);
}

TEST(Cli, SelectBandsWithFullRatioKeepsEveryBand) {
  const fs::path dir = work_dir("select");
  const fs::path scene = small_scene(dir);
  ASSERT_EQ(run("train " + inputs(scene) +
                " --band-ratio 1.0 --patch-size 3 --blocks 1 --epochs 1 --train-per-class 4 --out " +
                (dir / "t").string()),
            0);
  ASSERT_EQ(run("select-bands " + inputs(scene) + " --checkpoint " + (dir / "t" / "model").string() + " --out " +
                (dir / "s").string()),
            0);
  const json sel = read_json(dir / "s" / "selection.json");
  EXPECT_EQ(sel["k"], 8);
  EXPECT_EQ(sel["indices"], json::array({0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(sel["scores"].size(), 8u);
}

TEST(Cli, AnalyzeDuplicatedBandsHasUnitAcc) {
  const fs::path dir = work_dir("analyze");
  HyperCube cube(6, 6, 4);
  LabelRaster labels(6, 6);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      const double v = static_cast<double>(r * 6 + c) * 0.25;
      for (std::size_t b = 0; b < 4; ++b) cube.at(b, r, c) = v;
      labels.at(r, c) = 1 + static_cast<int>(c >= 3);
    }
  }
  write_cube(cube, dir / "dup");
  write_labels(labels, dir / "lab");
  ASSERT_EQ(run("analyze --hsi " + (dir / "dup").string() + " --labels " + (dir / "lab").string() +
                " --acc --out " + (dir / "a").string()),
            0);
  const json a = read_json(dir / "a" / "analysis.json");
  EXPECT_DOUBLE_EQ(a["all"]["acc"].get<double>(), 1.0);
  EXPECT_FALSE(a["all"].contains("mi"));
  EXPECT_EQ(run("analyze --hsi " + (dir / "dup").string() + " --labels " + (dir / "lab").string() +
                " --bands 9 --out " + (dir / "b").string()),
            2);
}

TEST(Cli, TrainEvalIsBitReproducible) {
  const fs::path dir = work_dir("determinism");
  const fs::path scene = small_scene(dir);
  for (const char* sub : {"a", "b"}) {
    const fs::path root = dir / sub;
    ASSERT_EQ(run("train " + inputs(scene) + " --patch-size 5 --blocks 2 --epochs 2 --train-per-class 6 --seed 11 --out " +
                  (root / "t").string()),
              0);
    ASSERT_EQ(run("eval " + inputs(scene) + " --checkpoint " + (root / "t" / "model").string() + " --out " +
                  (root / "e").string()),
              0);
  }
  for (const char* f : {"t/model.raw", "t/model.json", "t/loss.csv", "e/report.json", "e/classmap.raw",
                        "e/classmap.json", "e/palette.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST(Cli, GradcheckPasses) {
  const fs::path dir = work_dir("gradcheck");
  EXPECT_EQ(run("gradcheck --out " + (dir / "g").string()), 0);
  EXPECT_TRUE(read_json(dir / "g" / "gradcheck.json")["pass"].get<bool>());
}
