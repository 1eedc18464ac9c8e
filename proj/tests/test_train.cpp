#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sald/error.hpp"
#include "sald/fixtures.hpp"
#include "sald/train.hpp"

using namespace sald;

namespace {

SampleBatch l_samples(std::uint64_t seed, std::size_t total = 6000) {
  SamplingOptions opt;
  opt.total = total;
  return sample_training_set(fixtures::l_shape(), opt, seed);
}

ImplicitNet small_net(int latent = 0) { return geometric_init(build_decoder(2, latent, 32, 4), 0.3, 1); }

}  // namespace

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p{1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  AdamState s;
  for (int i = 0; i < 10; ++i) adam_step(p, g, s, 0.1);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 3.0}));
}

TEST(Adam, MovesAgainstGradient) {
  std::vector<double> p{0.0, 0.0};
  const std::vector<double> g{2.0, -0.5};
  AdamState s;
  for (int i = 0; i < 100; ++i) adam_step(p, g, s, 0.01);
  EXPECT_LT(p[0], 0.0);
  EXPECT_GT(p[1], 0.0);
  // Bias correction makes every step exactly lr in the sign direction.
  EXPECT_NEAR(p[0], -1.0, 1e-6);
}

TEST(Adam, ScalarQuadraticConverges) {
  std::vector<double> x{5.0};
  AdamState s;
  for (int i = 0; i < 5000; ++i) {
    const std::vector<double> g{2.0 * (x[0] - 1.5)};
    adam_step(x, g, s, 0.01);
  }
  EXPECT_NEAR(x[0], 1.5, 1e-6);
}

TEST(Adam, SizeMismatch) {
  std::vector<double> p(3);
  const std::vector<double> g(2);
  AdamState s;
  EXPECT_THROW(adam_step(p, g, s, 0.1), Error);
}

TEST(Schedule, StepDecay) {
  TrainConfig c;
  c.lr = 1e-3;
  EXPECT_EQ(learning_rate_at(c, 4999), 1e-3);
  c.lr_decay_every = 100;
  c.lr_decay_factor = 0.5;
  EXPECT_EQ(learning_rate_at(c, 99), 1e-3);
  EXPECT_EQ(learning_rate_at(c, 100), 5e-4);
  EXPECT_EQ(learning_rate_at(c, 250), 2.5e-4);
}

TEST(TrainSingle, LShapeSaldLossDropsTenfold) {
  TrainConfig c;
  c.epochs = 5000;
  c.batch_points = 256;
  c.lambda = 0.1;
  c.seed = 3;
  const TrainResult r = train_single(l_samples(3), small_net(), c);
  ASSERT_EQ(r.history.size(), 5000u);
  double tail = 0.0;
  for (std::size_t i = 4900; i < 5000; ++i) tail += r.history[i].loss.total / 100.0;
  EXPECT_LT(tail, 0.1 * r.history.front().loss.total);
}

TEST(TrainSingle, SalTrainsToo) {
  TrainConfig c;
  c.epochs = 1500;
  c.batch_points = 256;
  c.loss_kind = LossKind::SAL;
  const TrainResult r = train_single(l_samples(4), small_net(), c);
  for (const EpochRecord& e : r.history) EXPECT_EQ(e.loss.grad_term, 0.0);
  EXPECT_LT(r.history.back().loss.total, 0.5 * r.history.front().loss.total);
}

TEST(TrainSingle, SeedFixedRerunIsBitwiseIdentical) {
  TrainConfig c;
  c.epochs = 60;
  c.batch_points = 128;
  c.seed = 9;
  const SampleBatch data = l_samples(5, 1500);
  const TrainResult a = train_single(data, small_net(), c);
  const TrainResult b = train_single(data, small_net(), c);
  EXPECT_TRUE(a.net == b.net);
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].loss.total, b.history[i].loss.total);
  c.seed = 10;
  const TrainResult d = train_single(data, small_net(), c);
  EXPECT_FALSE(a.net == d.net);
}

TEST(TrainSingle, NanLossAborts) {
  SampleBatch data = l_samples(6, 600);
  data.values[0].h = NAN;
  TrainConfig c;
  c.epochs = 50;
  c.batch_points = static_cast<std::size_t>(data.values.size() + data.grads.size()) * 4;
  try {
    train_single(data, small_net(), c);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("value_term"), std::string::npos);
  }
}

TEST(TrainSingle, RejectsBadConfig) {
  TrainConfig c;
  c.lr = 0.0;
  EXPECT_THROW(train_single(l_samples(7, 600), small_net(), c), Error);
  c.lr = 1e-3;
  c.batch_points = 0;
  EXPECT_THROW(train_single(l_samples(7, 600), small_net(), c), Error);
}

TEST(AutoDecoder, SingleShapeMatchesSingleTraining) {
  TrainConfig c;
  c.epochs = 1500;
  c.batch_points = 256;
  c.latent_dim = 2;
  c.shapes_per_step = 1;
  const std::vector<SampleBatch> shapes{l_samples(8)};
  const AutoDecoderResult ad = train_autodecoder(shapes, small_net(2), init_latents(1, 2, 0.1, 1), c);
  c.latent_dim = 0;
  const TrainResult single = train_single(shapes[0], small_net(), c);
  auto tail = [](std::span<const EpochRecord> h) {
    double s = 0.0;
    for (std::size_t i = h.size() - 100; i < h.size(); ++i) s += h[i].loss.total / 100.0;
    return s;
  };
  const double a = tail(ad.history), b = tail(single.history);
  EXPECT_NEAR(a, b, 0.5 * b);
  for (const EpochRecord& e : ad.history) EXPECT_LT(e.loss.reg_term, 1e-3);
}

TEST(AutoDecoder, LatentNormsStayBounded) {
  TrainConfig c;
  c.epochs = 800;
  c.batch_points = 128;
  c.latent_dim = 4;
  c.shapes_per_step = 2;
  SamplingOptions opt;
  opt.total = 1500;
  std::vector<SampleBatch> shapes;
  for (const char* n : {"l-shape", "square", "circle"}) shapes.push_back(sample_training_set(fixtures::by_name(n), opt, 2));
  const AutoDecoderResult r = train_autodecoder(shapes, small_net(4), init_latents(3, 4, 0.1, 3), c);
  ASSERT_EQ(r.latents.rows(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    double n2 = 0.0;
    for (double v : r.latents.row(i)) n2 += v * v;
    EXPECT_LE(std::sqrt(n2), 10.0);
  }
  EXPECT_THROW(train_autodecoder(shapes, small_net(4), init_latents(2, 4, 0.1, 3), c), Error);
}

TEST(Latents, InitAndInterpolate) {
  const LatentTable t = init_latents(5, 3, 0.1, 4);
  EXPECT_EQ(t.rows(), 5u);
  EXPECT_TRUE(t == init_latents(5, 3, 0.1, 4));
  const std::vector<double> z1{1.0, -2.0}, z2{3.0, 4.0};
  EXPECT_EQ(interpolate_latent(z1, z2, 0.0), z1);
  EXPECT_EQ(interpolate_latent(z1, z2, 1.0), z2);
  const std::vector<double> neg{-1.0, 2.0};
  EXPECT_EQ(interpolate_latent(z1, neg, 0.5), (std::vector<double>{0.0, 0.0}));
}

TEST(History, CsvHasOneRowPerEpoch) {
  TrainConfig c;
  c.epochs = 5;
  c.batch_points = 64;
  const TrainResult r = train_single(l_samples(11, 600), small_net(), c);
  const auto path = std::filesystem::temp_directory_path() / "sald_test_history.csv";
  write_history_csv(r.history, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch,total,value_term,grad_term,reg_term,lr");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
}
