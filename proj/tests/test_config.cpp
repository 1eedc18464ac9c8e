#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "sald/error.hpp"
#include "sald/experiments.hpp"

using namespace sald;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(SALD_SOURCE_DIR) / "configs";

}  // namespace

TEST(Config, ShippedFilesMatchPresets) {
  for (const char* name : {"fig2", "fig3-minimal-curve", "fig4", "shape-space"}) {
    const ExperimentConfig file = load_config(kConfigs / (std::string(name) + ".json"));
    EXPECT_EQ(to_json(file), to_json(preset_config(name))) << name;
  }
}

TEST(Config, PresetSettings) {
  const ExperimentConfig c = preset_config("fig2");
  EXPECT_EQ(c.train.lambda, 0.1);
  EXPECT_EQ(c.train.epochs, 5000u);
  EXPECT_EQ(c.train.lr, 5e-4);
  EXPECT_EQ(c.train.loss_kind, LossKind::SALD);
  EXPECT_EQ(preset_config("shape-space").train.latent_dim, 8);
  EXPECT_EQ(preset_config("shape-space").inputs.size(), 4u);
  EXPECT_THROW(preset_config("fig9"), Error);
}

TEST(Config, RoundTripThroughJson) {
  ExperimentConfig c = preset_config("shape-space");
  c.train.seed = 77;
  c.sampling.sigma2 = 0.25;
  c.train.loss_kind = LossKind::SAL;
  const ExperimentConfig back = parse_config(to_json(c), ".");
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("{\"hidden\": 64, \"typo_key\": 1}", "."), Error);
  EXPECT_THROW(parse_config("{\"hidden\": \"wide\"}", "."), Error);
  EXPECT_THROW(parse_config("{\"loss\": \"mse\"}", "."), Error);
  EXPECT_THROW(parse_config("{\"lambda\": -1}", "."), Error);
  EXPECT_THROW(parse_config("{\"depth\": 1}", "."), Error);
  EXPECT_THROW(parse_config("[1, 2]", "."), Error);
  EXPECT_THROW(parse_config("{", "."), Error);
  EXPECT_THROW(parse_config("{\"inputs\": [\"no/such/file.obj\"]}", "."), Error);
  EXPECT_THROW(load_config("/no/such/config.json"), Error);
}

TEST(Config, RelativeInputsResolveAgainstConfigDir) {
  const auto dir = std::filesystem::temp_directory_path() / "sald_test_config";
  std::filesystem::create_directories(dir / "shapes");
  {
    std::ofstream seg(dir / "shapes" / "line.seg");
    seg << "0 0 1 0\n";
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"inputs": ["shapes/line.seg", "fixture:circle"], "epochs": 10})";
  }
  const ExperimentConfig c = load_config(dir / "run.json");
  ASSERT_EQ(c.inputs.size(), 2u);
  EXPECT_EQ(std::filesystem::path(c.inputs[0]), dir / "shapes" / "line.seg");
  EXPECT_EQ(c.inputs[1], "fixture:circle");
  EXPECT_EQ(c.train.epochs, 10u);
  EXPECT_EQ(c.hidden, ExperimentConfig{}.hidden);
}
