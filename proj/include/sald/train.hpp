#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sald/geometry.hpp"
#include "sald/loss_value.hpp"
#include "sald/net.hpp"

namespace sald {

enum class LossKind { SAL, SALD };

struct TrainConfig {
  /// One epoch is one optimisation step on a fresh random draw.
  std::size_t epochs = 5000;
  double lr = 5e-4;
  /// lr is multiplied by lr_decay_factor every lr_decay_every epochs (0 = never).
  double lr_decay_factor = 0.5;
  std::size_t lr_decay_every = 0;
  /// Points drawn per shape per step.
  std::size_t batch_points = 1024;
  double lambda = 0.1;
  LossKind loss_kind = LossKind::SALD;
  int latent_dim = 0;
  std::uint64_t seed = 0;
  /// Auto-decoder: shapes per step.
  std::size_t shapes_per_step = 64;
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossValue loss;
  double lr = 0.0;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update in place. Moments are sized on first use.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr);

double learning_rate_at(const TrainConfig& config, std::size_t epoch);

struct TrainResult {
  ImplicitNet net;
  std::vector<EpochRecord> history;
};

/// Optimises the SAL or SALD loss of one shape from precomputed samples.
/// Throws NumericError on a non-finite loss.
TrainResult train_single(const SampleBatch& data, ImplicitNet net, const TrainConfig& config);
TrainResult train_single(const RawGeometry& geom, ImplicitNet net, const TrainConfig& config,
                         const SamplingOptions& sampling = {});

/// Rows drawn from N(0, stddev^2).
LatentTable init_latents(std::size_t rows, int dim, double stddev, std::uint64_t seed);

struct AutoDecoderResult {
  ImplicitNet net;
  LatentTable latents;
  std::vector<EpochRecord> history;
};

/// Jointly optimises the decoder and one latent code per shape, adding
/// 0.001 |z|^2 per shape to the loss.
AutoDecoderResult train_autodecoder(std::span<const SampleBatch> shapes, ImplicitNet net, LatentTable latents,
                                    const TrainConfig& config);

/// (1 - t) z1 + t z2
std::vector<double> interpolate_latent(std::span<const double> z1, std::span<const double> z2, double t);

/// Columns: epoch,total,value_term,grad_term,reg_term,lr
void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

}  // namespace sald
