#include "sald/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sald/error.hpp"
#include "sald/loss.hpp"
#include "sald/random.hpp"
#include "sald/output.hpp"

namespace sald {
namespace {

constexpr std::uint64_t kDrawStream = 0x747261696e;

void check_config(const TrainConfig& c) {
  if (!(c.lr > 0.0)) throw Error("learning rate must be positive");
  if (c.batch_points < 1) throw Error("batch_points must be at least 1");
  if (!(c.lambda >= 0.0)) throw Error("lambda must be nonnegative");
}

void check_finite(const LossValue& loss, std::size_t epoch) {
  if (std::isfinite(loss.total)) return;
  std::ostringstream msg;
  msg << "non-finite loss at epoch " << epoch << " (value_term=" << loss.value_term
      << ", grad_term=" << loss.grad_term << ", reg_term=" << loss.reg_term << ")";
  throw NumericError(msg.str());
}

// Uniform draw with replacement. SAL spends the whole budget on value
// samples; SALD splits it in proportion to the stored value/gradient counts.
SampleBatch draw_minibatch(const SampleBatch& data, const TrainConfig& config, std::mt19937_64& rng) {
  const std::size_t nv = data.values.size();
  const std::size_t ng = config.loss_kind == LossKind::SALD ? data.grads.size() : 0;
  std::size_t n_values = config.batch_points;
  if (ng > 0) {
    const double share = static_cast<double>(nv) / static_cast<double>(nv + ng);
    n_values = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(share * static_cast<double>(config.batch_points))), 1,
        config.batch_points);
  }
  const std::size_t n_grads = ng > 0 ? config.batch_points - n_values : 0;

  SampleBatch mb;
  mb.dim = data.dim;
  mb.values.reserve(n_values);
  mb.grads.reserve(n_grads);
  std::uniform_int_distribution<std::size_t> pick_value(0, nv - 1);
  for (std::size_t i = 0; i < n_values; ++i) mb.values.push_back(data.values[pick_value(rng)]);
  if (n_grads > 0) {
    std::uniform_int_distribution<std::size_t> pick_grad(0, ng - 1);
    for (std::size_t i = 0; i < n_grads; ++i) mb.grads.push_back(data.grads[pick_grad(rng)]);
  }
  return mb;
}

double effective_lambda(const TrainConfig& c) { return c.loss_kind == LossKind::SALD ? c.lambda : 0.0; }

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
  if (params.size() != grads.size()) throw Error("adam_step: parameter/gradient size mismatch");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error("adam_step: optimizer state does not match parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

double learning_rate_at(const TrainConfig& config, std::size_t epoch) {
  if (config.lr_decay_every == 0) return config.lr;
  const auto k = static_cast<double>(epoch / config.lr_decay_every);
  return config.lr * std::pow(config.lr_decay_factor, k);
}

TrainResult train_single(const SampleBatch& data, ImplicitNet net, const TrainConfig& config) {
  check_config(config);
  if (data.values.empty()) throw Error("empty batch");
  if (net.arch().latent_dim != 0) throw Error("train_single expects an unconditioned network");
  auto rng = make_rng(config.seed, kDrawStream);
  const double lambda = effective_lambda(config);

  TrainResult result{std::move(net), {}};
  result.history.reserve(config.epochs);
  AdamState adam;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const SampleBatch mb = draw_minibatch(data, config, rng);
    const LossEvaluation eval = loss_gradients(result.net, {}, mb, lambda);
    check_finite(eval.loss, epoch);
    const double lr = learning_rate_at(config, epoch);
    adam_step(result.net.params(), eval.grads.params, adam, lr);
    result.history.push_back({epoch, eval.loss, lr});
  }
  return result;
}

TrainResult train_single(const RawGeometry& geom, ImplicitNet net, const TrainConfig& config,
                         const SamplingOptions& sampling) {
  return train_single(sample_training_set(geom, sampling, config.seed), std::move(net), config);
}

LatentTable init_latents(std::size_t rows, int dim, double stddev, std::uint64_t seed) {
  LatentTable t;
  t.dim = dim;
  t.codes.resize(rows * static_cast<std::size_t>(dim));
  auto rng = make_rng(seed, 0x6c6174656e74);
  std::normal_distribution<double> gauss(0.0, stddev);
  for (double& c : t.codes) c = gauss(rng);
  return t;
}

AutoDecoderResult train_autodecoder(std::span<const SampleBatch> shapes, ImplicitNet net, LatentTable latents,
                                    const TrainConfig& config) {
  check_config(config);
  const int dim = net.arch().latent_dim;
  if (dim <= 0) throw Error("auto-decoder training needs latent_dim > 0");
  if (shapes.empty()) throw Error("no training shapes");
  if (latents.dim != dim || latents.rows() != shapes.size()) {
    throw Error("latent table must have one row of size latent_dim per shape");
  }
  for (const SampleBatch& s : shapes) {
    if (s.values.empty()) throw Error("empty batch");
  }

  auto rng = make_rng(config.seed, kDrawStream);
  const double lambda = effective_lambda(config);
  const std::size_t per_step = std::min(std::max<std::size_t>(config.shapes_per_step, 1), shapes.size());
  std::vector<std::size_t> order(shapes.size());
  std::iota(order.begin(), order.end(), 0);

  AutoDecoderResult result{std::move(net), std::move(latents), {}};
  result.history.reserve(config.epochs);
  AdamState adam_net, adam_latent;
  std::vector<double> g_net(result.net.num_params());
  std::vector<double> g_latent(result.latents.codes.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (per_step < shapes.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(per_step));
    }
    std::fill(g_net.begin(), g_net.end(), 0.0);
    std::fill(g_latent.begin(), g_latent.end(), 0.0);
    LossValue mean;
    const double w = 1.0 / static_cast<double>(per_step);
    for (std::size_t k = 0; k < per_step; ++k) {
      const std::size_t shape = order[k];
      const SampleBatch mb = draw_minibatch(shapes[shape], config, rng);
      const auto z = result.latents.row(shape);
      const LossEvaluation eval = loss_gradients(result.net, z, mb, lambda);
      const double reg = latent_reg_ad(z);
      const std::vector<double> reg_grad = latent_reg_ad_gradient(z);
      for (std::size_t i = 0; i < g_net.size(); ++i) g_net[i] += w * eval.grads.params[i];
      for (int i = 0; i < dim; ++i) {
        g_latent[shape * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)] +=
            w * (eval.grads.latent[static_cast<std::size_t>(i)] + reg_grad[static_cast<std::size_t>(i)]);
      }
      mean.value_term += w * eval.loss.value_term;
      mean.grad_term += w * eval.loss.grad_term;
      mean.reg_term += w * reg;
    }
    mean.total = mean.value_term + lambda * mean.grad_term + mean.reg_term;
    check_finite(mean, epoch);
    const double lr = learning_rate_at(config, epoch);
    adam_step(result.net.params(), g_net, adam_net, lr);
    adam_step(result.latents.codes, g_latent, adam_latent, lr);
    result.history.push_back({epoch, mean, lr});
  }
  return result;
}

std::vector<double> interpolate_latent(std::span<const double> z1, std::span<const double> z2, double t) {
  if (z1.size() != z2.size()) throw Error("latent dimension mismatch");
  std::vector<double> z(z1.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - t) * z1[i] + t * z2[i];
  return z;
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out.precision(17);
  out << "epoch,total,value_term,grad_term,reg_term,lr\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << r.loss.total << ',' << r.loss.value_term << ',' << r.loss.grad_term << ','
        << r.loss.reg_term << ',' << r.lr << '\n';
  }
}

}  // namespace sald
