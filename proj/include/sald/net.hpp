#pragma once

// Implicit decoder f(x; theta), optionally conditioned on a latent code z.
//
// A fully connected softplus MLP with one scalar output and an optional skip
// connection that appends the raw input [x, z] to the input of one layer.
// Spatial gradients are computed in forward mode: each sample is carried as
// one value row plus d tangent rows, and every layer maps them together via
//   grad y_{l+1} = diag(softplus'(W y_l + b)) W grad y_l.
// Parameter gradients differentiate that recursion in reverse, which brings
// in softplus'' for the derivative term of the loss.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sald/geometry.hpp"
#include "sald/loss_value.hpp"
#include "sald/vec.hpp"

namespace sald {

struct NetArchitecture {
  int spatial_dim = 3;
  int latent_dim = 0;
  int hidden = 512;
  /// Number of linear layers, output layer included.
  int depth = 8;
  /// Layer whose input is [previous activation, x, z]; -1 disables the skip.
  int skip_layer = -1;
  double beta = 100.0;

  int input_width() const { return spatial_dim + latent_dim; }
  bool operator==(const NetArchitecture&) const = default;
};

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
  bool operator==(const LayerShape&) const = default;
};

class ImplicitNet {
 public:
  explicit ImplicitNet(const NetArchitecture& arch);

  const NetArchitecture& arch() const { return arch_; }
  std::size_t num_layers() const { return layers_.size(); }
  const LayerShape& layer(std::size_t l) const { return layers_[l]; }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> weights(std::size_t l);
  std::span<const double> weights(std::size_t l) const;
  std::span<double> bias(std::size_t l);
  std::span<const double> bias(std::size_t l) const;

  bool operator==(const ImplicitNet&) const = default;

 private:
  NetArchitecture arch_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

/// Decoder with `depth` linear layers of width `hidden`: input_dim+latent_dim
/// -> hidden -> ... -> 1, skip connection into layer depth/2 (for depth >= 3).
ImplicitNet build_decoder(int input_dim, int latent_dim, int hidden = 512, int depth = 8, double beta = 100.0);

/// Initialisation that makes f approximate the signed distance to a sphere
/// of the given radius: hidden weights ~ N(0, 2/fan_out), zero biases, the
/// re-injected skip columns zeroed, output weights sqrt(pi/fan_in), output
/// bias -radius.
ImplicitNet geometric_init(ImplicitNet net, double radius, std::uint64_t seed);

/// The same network with its output negated (last layer flipped).
ImplicitNet negated(const ImplicitNet& net);

double forward(const ImplicitNet& net, std::span<const double> x, std::span<const double> z = {});
std::vector<double> spatial_gradient(const ImplicitNet& net, std::span<const double> x,
                                     std::span<const double> z = {});

/// Batched evaluation; points use their first spatial_dim coordinates.
void forward_batch(const ImplicitNet& net, std::span<const Vec3> points, std::span<const double> z,
                   std::span<double> values);
/// values[i] = f(points[i]); gradients[i] = grad_x f(points[i]) (z = 0 in 2D).
void gradient_batch(const ImplicitNet& net, std::span<const Vec3> points, std::span<const double> z,
                    std::span<double> values, std::span<Vec3> gradients);

struct NetGradients {
  std::vector<double> params;
  std::vector<double> latent;
};

struct LossEvaluation {
  LossValue loss;
  NetGradients grads;
};

/// SALD loss  mean_D tau(f, h) + lambda * mean_D' min(|grad f - n|, |grad f + n|)
/// and its exact gradient with respect to all parameters and z.
/// `batch.grads` may be empty (value term only).
LossEvaluation loss_gradients(const ImplicitNet& net, std::span<const double> z, const SampleBatch& batch,
                              double lambda);

// --- checkpoint ------------------------------------------------------------

struct LatentTable {
  int dim = 0;
  std::vector<double> codes;  // rows x dim

  std::size_t rows() const { return dim == 0 ? 0 : codes.size() / static_cast<std::size_t>(dim); }
  std::span<double> row(std::size_t i) { return {codes.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> row(std::size_t i) const {
    return {codes.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  bool operator==(const LatentTable&) const = default;
};

struct Checkpoint {
  ImplicitNet net;
  LatentTable latents;
};

/// "SNET", u32 version, u32 spatial_dim, u32 latent_dim, u32 hidden, u32 depth,
/// i32 skip_layer, f64 beta, then per layer W (row-major) and b, then u64
/// latent row count and the codes. Little-endian throughout.
void write_checkpoint(const ImplicitNet& net, const LatentTable* latents, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace sald
