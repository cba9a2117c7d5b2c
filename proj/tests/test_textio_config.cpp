#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "ngcl/config.hpp"
#include "ngcl/error.hpp"
#include "ngcl/textio.hpp"
#include "test_util.hpp"

using namespace ngcl;

TEST(TextIo, ParseDoubleRejectsTrailingGarbage) {
  EXPECT_EQ(parse_double("1.5"), 1.5);
  EXPECT_EQ(parse_double("-2e-3"), -2e-3);
  EXPECT_FALSE(parse_double("1.5x"));
  EXPECT_FALSE(parse_double(""));
  EXPECT_FALSE(parse_long("3.0"));
  EXPECT_EQ(parse_long("-42"), -42);
}

TEST(TextIo, FormatDoubleRoundTripsBitExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(parse_double(format_double(v)).value(), v);
  }
  EXPECT_EQ(parse_double(format_double(std::numeric_limits<double>::denorm_min())).value(),
            std::numeric_limits<double>::denorm_min());
}

TEST(TextIo, SplitAndTrim) {
  EXPECT_EQ(trim("  a b \t"), "a b");
  const auto parts = split("a,,b", ',');
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[1], "");
}

// Published final hyperparameters, written out independently of the implementation.
TEST(Config, DefaultDumpMatchesPublishedFinalValues) {
  const std::string expected =
      "# pretraining\n"
      "hidden=256\n"
      "pretrain.lr=0.001\n"
      "pretrain.weight_decay=0\n"
      "node_mask_ratio=0.2\n"
      "edge_perturb_ratio=0.2\n"
      "tau=0.3\n"
      "pretrain.epochs=50\n"
      "pretrain.batch_size=128\n"
      "alpha=1\n"
      "gamma=0.5\n"
      "sigma_mode=median\n"
      "sigma=1\n"
      "augment=true\n"
      "graph_loss=true\n"
      "infograph_loss=true\n"
      "pretrain=true\n"
      "augment_seed=0\n"
      "# attention classifier\n"
      "gat.layers=2\n"
      "gat.embed=16\n"
      "gat.heads=4\n"
      "neighbor_rate=0.5\n"
      "# fine-tuning\n"
      "finetune.lr=0.001\n"
      "finetune.weight_decay=1e-04\n"
      "finetune.batch_size=128\n"
      "finetune.epochs=50\n"
      "finetune_encoder=false\n"
      "threshold=0.5\n"
      "# graph construction\n"
      "window_s=2\n"
      "overlap=0.5\n"
      "pre_s=10\n"
      "post_s=10\n"
      "mvar_order=10\n"
      "dtf_normalized=true\n"
      "band.delta=1,4\n"
      "band.theta=4,8\n"
      "band.alpha=8,13\n"
      "band.beta=13,30\n"
      "band.gamma=30,80\n"
      "band.ripple=80,250\n"
      "band.fast_ripple=250,500\n"
      "# evaluation\n"
      "folds=10\n"
      "seed=0\n"
      "# synthetic data\n"
      "synth.n_per_class=100\n"
      "synth.nodes=20\n"
      "synth.soz_size=4\n"
      "synth.noise=0.1\n"
      "synth.seed=0\n";
  EXPECT_EQ(dump_config(PipelineConfig{}), expected);
}

TEST(Config, DumpParsesBackToTheSameConfig) {
  PipelineConfig cfg;
  apply_assignment(cfg, "tau=0.7");
  apply_assignment(cfg, "band.gamma=31.5,79");
  apply_assignment(cfg, "band.extra=2,3");
  apply_assignment(cfg, "finetune_encoder=true");
  const auto text = dump_config(cfg);
  const auto dir = ngcl::testing::temp_dir("config_roundtrip");
  {
    std::ofstream(dir / "c.cfg") << text;
  }
  PipelineConfig back;
  load_config_file(back, dir / "c.cfg");
  EXPECT_EQ(dump_config(back), text);
}

TEST(Config, LaterAssignmentsOverrideFile) {
  const auto dir = ngcl::testing::temp_dir("config_precedence");
  {
    std::ofstream(dir / "c.cfg") << "# comment\nhidden = 64\nseed=5\n";
  }
  PipelineConfig cfg;
  load_config_file(cfg, dir / "c.cfg");
  EXPECT_EQ(cfg.training.pretrain.hidden, 64);
  apply_assignment(cfg, "hidden=32");
  EXPECT_EQ(cfg.training.pretrain.hidden, 32);
  EXPECT_EQ(cfg.seed, 5u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  PipelineConfig cfg;
  EXPECT_THROW(apply_assignment(cfg, "hiden=3"), InvalidArgument);
  EXPECT_THROW(apply_assignment(cfg, "hidden=abc"), InvalidArgument);
  EXPECT_THROW(apply_assignment(cfg, "augment=maybe"), InvalidArgument);
  EXPECT_THROW(apply_assignment(cfg, "band.delta=4,1"), InvalidArgument);
  EXPECT_THROW(apply_assignment(cfg, "novalue"), InvalidArgument);
  EXPECT_THROW(load_config_file(cfg, "/nonexistent/x.cfg"), MissingArtifactError);
}
