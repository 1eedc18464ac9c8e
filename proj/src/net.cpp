#include "sald/net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sald/error.hpp"
#include "sald/kernels.hpp"
#include "sald/loss.hpp"
#include "sald/parallel.hpp"
#include "sald/random.hpp"

namespace sald {
namespace {

// Samples per work item. Fixed so the reduction tree does not depend on the
// number of threads.
constexpr std::size_t kChunk = 128;

struct Softplus {
  double value, d1, d2;
};

// softplus_beta(p) = log(1 + exp(beta p)) / beta, evaluated on the side of
// zero where exp cannot overflow.
inline Softplus softplus(double p, double beta) {
  const double t = beta * p;
  if (t > 0.0) {
    const double e = std::exp(-t);
    const double q = 1.0 / (1.0 + e);
    return {p + std::log1p(e) / beta, q, beta * e * q * q};
  }
  const double e = std::exp(t);
  const double q = 1.0 / (1.0 + e);
  return {std::log1p(e) / beta, e * q, beta * e * q * q};
}

struct Workspace {
  std::vector<std::vector<double>> acts;  // layer inputs, rows x in
  std::vector<std::vector<double>> pre;   // pre-activations, rows x out
  std::vector<std::vector<double>> d1;    // softplus' per (sample, unit)
  std::vector<std::vector<double>> d2;    // softplus''
  std::vector<double> pbar;
  std::vector<double> pbar_next;
  std::vector<double> abar;
};

Workspace& local_workspace() {
  thread_local Workspace ws;
  return ws;
}

void check_inputs(const ImplicitNet& net, std::size_t x_size, std::span<const double> z) {
  const NetArchitecture& a = net.arch();
  if (x_size != static_cast<std::size_t>(a.spatial_dim)) {
    throw Error("dimension mismatch: expected " + std::to_string(a.spatial_dim) + " coordinates, got " +
                std::to_string(x_size));
  }
  if (z.size() != static_cast<std::size_t>(a.latent_dim)) {
    throw Error("dimension mismatch: expected latent of size " + std::to_string(a.latent_dim) + ", got " +
                std::to_string(z.size()));
  }
}

// Rows are sample-major: row s*C + 0 carries the value, rows s*C + c
// (c = 1..d) carry d/dx_{c-1}.
void run_forward(const ImplicitNet& net, std::span<const Vec3> pts, std::span<const double> z, std::size_t C,
                 Workspace& ws) {
  const auto& K = kernels::active();
  const NetArchitecture& arch = net.arch();
  const std::size_t n = pts.size();
  const std::size_t rows = n * C;
  const std::size_t L = net.num_layers();
  const std::size_t d = static_cast<std::size_t>(arch.spatial_dim);
  const std::size_t m = static_cast<std::size_t>(arch.latent_dim);
  const std::size_t w0 = d + m;

  ws.acts.resize(L);
  ws.pre.resize(L);
  ws.d1.resize(L);
  ws.d2.resize(L);

  std::vector<double>& a0 = ws.acts[0];
  a0.assign(rows * w0, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double* row = a0.data() + s * C * w0;
    for (std::size_t k = 0; k < d; ++k) row[k] = pts[s][k];
    for (std::size_t k = 0; k < m; ++k) row[d + k] = z[k];
    for (std::size_t c = 1; c < C; ++c) a0[(s * C + c) * w0 + (c - 1)] = 1.0;
  }

  for (std::size_t l = 0; l < L; ++l) {
    const LayerShape& ls = net.layer(l);
    std::vector<double>& P = ws.pre[l];
    P.resize(rows * ls.out);
    K.gemm_nt(rows, ls.out, ls.in, ws.acts[l].data(), ls.in, net.weights(l).data(), ls.in, P.data(), ls.out);
    const auto b = net.bias(l);
    for (std::size_t s = 0; s < n; ++s) {
      double* row = P.data() + s * C * ls.out;
      for (std::size_t j = 0; j < ls.out; ++j) row[j] += b[j];
    }
    if (l + 1 == L) break;

    const std::size_t nin = net.layer(l + 1).in;
    std::vector<double>& next = ws.acts[l + 1];
    next.resize(rows * nin);
    ws.d1[l].resize(n * ls.out);
    ws.d2[l].resize(n * ls.out);
    for (std::size_t s = 0; s < n; ++s) {
      const double* p0 = P.data() + s * C * ls.out;
      double* y0 = next.data() + s * C * nin;
      double* s1 = ws.d1[l].data() + s * ls.out;
      double* s2 = ws.d2[l].data() + s * ls.out;
      for (std::size_t j = 0; j < ls.out; ++j) {
        const Softplus sp = softplus(p0[j], arch.beta);
        y0[j] = sp.value;
        s1[j] = sp.d1;
        s2[j] = sp.d2;
      }
      for (std::size_t c = 1; c < C; ++c) {
        const double* pc = P.data() + (s * C + c) * ls.out;
        double* yc = next.data() + (s * C + c) * nin;
        for (std::size_t j = 0; j < ls.out; ++j) yc[j] = s1[j] * pc[j];
      }
    }
    if (static_cast<int>(l + 1) == arch.skip_layer) {
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(a0.data() + r * w0, w0, next.data() + r * nin + ls.out);
      }
    }
  }
}

// Expects ws.pbar to hold the adjoint of the output rows (rows x 1).
// Accumulates into gparams (net layout) and glatent.
void run_backward(const ImplicitNet& net, std::size_t n, std::size_t C, Workspace& ws, double* gparams,
                  double* glatent) {
  const auto& K = kernels::active();
  const NetArchitecture& arch = net.arch();
  const std::size_t rows = n * C;
  const std::size_t L = net.num_layers();
  const std::size_t d = static_cast<std::size_t>(arch.spatial_dim);
  const std::size_t m = static_cast<std::size_t>(arch.latent_dim);

  for (std::size_t l = L; l-- > 0;) {
    const LayerShape& ls = net.layer(l);
    const double* pbar = ws.pbar.data();
    K.gemm_tn_acc(ls.out, ls.in, rows, pbar, ls.out, ws.acts[l].data(), ls.in, gparams + ls.weight_offset, ls.in);
    double* gb = gparams + ls.bias_offset;
    for (std::size_t s = 0; s < n; ++s) {
      const double* row = pbar + s * C * ls.out;
      for (std::size_t j = 0; j < ls.out; ++j) gb[j] += row[j];
    }
    if (l == 0 && m == 0) break;

    ws.abar.resize(rows * ls.in);
    K.gemm_nn(rows, ls.in, ls.out, pbar, ls.out, net.weights(l).data(), ls.in, ws.abar.data(), ls.in);
    // Only the value rows depend on z; tangent rows of the raw input are constants.
    auto add_latent = [&](std::size_t col0) {
      for (std::size_t s = 0; s < n; ++s) {
        const double* row = ws.abar.data() + s * C * ls.in + col0 + d;
        for (std::size_t k = 0; k < m; ++k) glatent[k] += row[k];
      }
    };
    if (l == 0) {
      add_latent(0);
      break;
    }
    const std::size_t pout = net.layer(l - 1).out;
    if (static_cast<int>(l) == arch.skip_layer && m > 0) add_latent(pout);

    ws.pbar_next.resize(rows * pout);
    const std::vector<double>& P = ws.pre[l - 1];
    for (std::size_t s = 0; s < n; ++s) {
      const double* s1 = ws.d1[l - 1].data() + s * pout;
      const double* s2 = ws.d2[l - 1].data() + s * pout;
      const double* ybar0 = ws.abar.data() + s * C * ls.in;
      double* out0 = ws.pbar_next.data() + s * C * pout;
      for (std::size_t j = 0; j < pout; ++j) out0[j] = ybar0[j] * s1[j];
      for (std::size_t c = 1; c < C; ++c) {
        const double* ybar = ws.abar.data() + (s * C + c) * ls.in;
        const double* pc = P.data() + (s * C + c) * pout;
        double* outc = ws.pbar_next.data() + (s * C + c) * pout;
        for (std::size_t j = 0; j < pout; ++j) {
          outc[j] = s1[j] * ybar[j];
          out0[j] += s2[j] * ybar[j] * pc[j];
        }
      }
    }
    std::swap(ws.pbar, ws.pbar_next);
  }
}

template <typename Fn>
void for_chunks(std::size_t n, Fn&& fn) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) { fn(c * kChunk, std::min(n, (c + 1) * kChunk)); });
}

}  // namespace

// --- ImplicitNet ------------------------------------------------------------

ImplicitNet::ImplicitNet(const NetArchitecture& arch) : arch_(arch) {
  if (arch.spatial_dim < 1) throw Error("spatial_dim must be positive");
  if (arch.latent_dim < 0) throw Error("latent_dim must be nonnegative");
  if (arch.depth < 2) throw Error("depth must be at least 2");
  if (arch.hidden < 1) throw Error("hidden width must be positive");
  if (!(arch.beta > 0.0)) throw Error("softplus beta must be positive");
  if (arch.skip_layer != -1 && (arch.skip_layer < 1 || arch.skip_layer >= arch.depth)) {
    throw Error("skip layer must lie in [1, depth)");
  }
  const auto w0 = static_cast<std::size_t>(arch.input_width());
  const auto hidden = static_cast<std::size_t>(arch.hidden);
  std::size_t offset = 0;
  for (int l = 0; l < arch.depth; ++l) {
    LayerShape s;
    s.in = l == 0 ? w0 : hidden;
    if (l == arch.skip_layer) s.in += w0;
    s.out = l + 1 == arch.depth ? 1 : hidden;
    s.weight_offset = offset;
    offset += s.in * s.out;
    s.bias_offset = offset;
    offset += s.out;
    layers_.push_back(s);
  }
  params_.assign(offset, 0.0);
}

std::span<double> ImplicitNet::weights(std::size_t l) {
  return {params_.data() + layers_[l].weight_offset, layers_[l].in * layers_[l].out};
}
std::span<const double> ImplicitNet::weights(std::size_t l) const {
  return {params_.data() + layers_[l].weight_offset, layers_[l].in * layers_[l].out};
}
std::span<double> ImplicitNet::bias(std::size_t l) { return {params_.data() + layers_[l].bias_offset, layers_[l].out}; }
std::span<const double> ImplicitNet::bias(std::size_t l) const {
  return {params_.data() + layers_[l].bias_offset, layers_[l].out};
}

ImplicitNet build_decoder(int input_dim, int latent_dim, int hidden, int depth, double beta) {
  NetArchitecture a;
  a.spatial_dim = input_dim;
  a.latent_dim = latent_dim;
  a.hidden = hidden;
  a.depth = depth;
  a.skip_layer = depth >= 3 ? depth / 2 : -1;
  a.beta = beta;
  return ImplicitNet(a);
}

ImplicitNet geometric_init(ImplicitNet net, double radius, std::uint64_t seed) {
  auto rng = make_rng(seed, 0x6e6574);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t L = net.num_layers();
  const auto w0 = static_cast<std::size_t>(net.arch().input_width());
  for (std::size_t l = 0; l < L; ++l) {
    const LayerShape ls = net.layer(l);
    const bool skip = static_cast<int>(l) == net.arch().skip_layer;
    const std::size_t live_in = skip ? ls.in - w0 : ls.in;
    auto W = net.weights(l);
    auto b = net.bias(l);
    if (l + 1 < L) {
      const double sd = std::sqrt(2.0 / static_cast<double>(ls.out));
      for (std::size_t i = 0; i < ls.out; ++i) {
        for (std::size_t j = 0; j < ls.in; ++j) W[i * ls.in + j] = j < live_in ? sd * gauss(rng) : 0.0;
      }
      std::fill(b.begin(), b.end(), 0.0);
    } else {
      const double w = std::sqrt(std::numbers::pi / static_cast<double>(live_in));
      for (std::size_t j = 0; j < ls.in; ++j) W[j] = j < live_in ? w : 0.0;
      b[0] = -radius;
    }
  }
  return net;
}

ImplicitNet negated(const ImplicitNet& net) {
  ImplicitNet out = net;
  const std::size_t last = out.num_layers() - 1;
  for (double& w : out.weights(last)) w = -w;
  for (double& b : out.bias(last)) b = -b;
  return out;
}

// --- evaluation ---------------------------------------------------------------

double forward(const ImplicitNet& net, std::span<const double> x, std::span<const double> z) {
  check_inputs(net, x.size(), z);
  Vec3 p{0.0, 0.0, 0.0};
  std::copy(x.begin(), x.end(), p.begin());
  double v = 0.0;
  forward_batch(net, std::span<const Vec3>(&p, 1), z, std::span<double>(&v, 1));
  return v;
}

std::vector<double> spatial_gradient(const ImplicitNet& net, std::span<const double> x, std::span<const double> z) {
  check_inputs(net, x.size(), z);
  Vec3 p{0.0, 0.0, 0.0};
  std::copy(x.begin(), x.end(), p.begin());
  double v = 0.0;
  Vec3 g{};
  gradient_batch(net, std::span<const Vec3>(&p, 1), z, std::span<double>(&v, 1), std::span<Vec3>(&g, 1));
  return {g.begin(), g.begin() + net.arch().spatial_dim};
}

void forward_batch(const ImplicitNet& net, std::span<const Vec3> points, std::span<const double> z,
                   std::span<double> values) {
  if (net.arch().spatial_dim > 3) throw Error("batched evaluation supports up to 3 spatial dimensions");
  check_inputs(net, static_cast<std::size_t>(net.arch().spatial_dim), z);
  if (values.size() != points.size()) throw Error("forward_batch: output size mismatch");
  const std::size_t last = net.num_layers() - 1;
  for_chunks(points.size(), [&](std::size_t begin, std::size_t end) {
    Workspace& ws = local_workspace();
    run_forward(net, points.subspan(begin, end - begin), z, 1, ws);
    std::copy_n(ws.pre[last].data(), end - begin, values.data() + begin);
  });
}

void gradient_batch(const ImplicitNet& net, std::span<const Vec3> points, std::span<const double> z,
                    std::span<double> values, std::span<Vec3> gradients) {
  if (net.arch().spatial_dim > 3) throw Error("batched evaluation supports up to 3 spatial dimensions");
  check_inputs(net, static_cast<std::size_t>(net.arch().spatial_dim), z);
  if (values.size() != points.size() || gradients.size() != points.size()) {
    throw Error("gradient_batch: output size mismatch");
  }
  const std::size_t d = static_cast<std::size_t>(net.arch().spatial_dim);
  const std::size_t C = d + 1;
  const std::size_t last = net.num_layers() - 1;
  for_chunks(points.size(), [&](std::size_t begin, std::size_t end) {
    Workspace& ws = local_workspace();
    run_forward(net, points.subspan(begin, end - begin), z, C, ws);
    const double* out = ws.pre[last].data();
    for (std::size_t s = 0; s < end - begin; ++s) {
      values[begin + s] = out[s * C];
      Vec3 g{0.0, 0.0, 0.0};
      for (std::size_t c = 0; c < d; ++c) g[c] = out[s * C + 1 + c];
      gradients[begin + s] = g;
    }
  });
}

LossEvaluation loss_gradients(const ImplicitNet& net, std::span<const double> z, const SampleBatch& batch,
                              double lambda) {
  const NetArchitecture& arch = net.arch();
  check_inputs(net, static_cast<std::size_t>(batch.dim), z);
  if (batch.values.empty()) throw Error("empty batch");
  if (!(lambda >= 0.0)) throw Error("lambda must be nonnegative");

  const std::size_t d = static_cast<std::size_t>(arch.spatial_dim);
  const std::size_t m = static_cast<std::size_t>(arch.latent_dim);
  const std::size_t nv = batch.values.size();
  const std::size_t ng = batch.grads.size();
  const std::size_t value_chunks = (nv + kChunk - 1) / kChunk;
  const std::size_t grad_chunks = (ng + kChunk - 1) / kChunk;
  const std::size_t last = net.num_layers() - 1;

  struct Partial {
    std::vector<double> params;
    std::vector<double> latent;
    double value_sum = 0.0;
    double grad_sum = 0.0;
  };
  std::vector<Partial> partials(value_chunks + grad_chunks);

  parallel_for(partials.size(), [&](std::size_t task) {
    Partial& part = partials[task];
    part.params.assign(net.num_params(), 0.0);
    part.latent.assign(m, 0.0);
    Workspace& ws = local_workspace();
    std::vector<Vec3> pts;
    if (task < value_chunks) {
      const std::size_t begin = task * kChunk;
      const std::size_t end = std::min(nv, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) pts.push_back(batch.values[i].point);
      run_forward(net, pts, z, 1, ws);
      ws.pbar.assign(pts.size(), 0.0);
      const double* f = ws.pre[last].data();
      for (std::size_t s = 0; s < pts.size(); ++s) {
        const double h = batch.values[begin + s].h;
        part.value_sum += tau_scalar(f[s], h);
        ws.pbar[s] = tau_scalar_derivative(f[s], h) / static_cast<double>(nv);
      }
      run_backward(net, pts.size(), 1, ws, part.params.data(), part.latent.data());
    } else {
      const std::size_t begin = (task - value_chunks) * kChunk;
      const std::size_t end = std::min(ng, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) pts.push_back(batch.grads[i].point);
      const std::size_t C = d + 1;
      run_forward(net, pts, z, C, ws);
      ws.pbar.assign(pts.size() * C, 0.0);
      const double* out = ws.pre[last].data();
      const double scale = lambda / static_cast<double>(ng);
      for (std::size_t s = 0; s < pts.size(); ++s) {
        const Vec3& nrm = batch.grads[begin + s].normal;
        double minus2 = 0.0, plus2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double g = out[s * C + 1 + c];
          minus2 += (g - nrm[c]) * (g - nrm[c]);
          plus2 += (g + nrm[c]) * (g + nrm[c]);
        }
        const double sign = minus2 <= plus2 ? 1.0 : -1.0;
        const double t = std::sqrt(std::min(minus2, plus2));
        part.grad_sum += t;
        if (t > 0.0) {
          for (std::size_t c = 0; c < d; ++c) {
            ws.pbar[s * C + 1 + c] = scale * (out[s * C + 1 + c] - sign * nrm[c]) / t;
          }
        }
      }
      run_backward(net, pts.size(), C, ws, part.params.data(), part.latent.data());
    }
  });

  LossEvaluation result;
  result.grads.params.assign(net.num_params(), 0.0);
  result.grads.latent.assign(m, 0.0);
  double value_sum = 0.0, grad_sum = 0.0;
  for (const Partial& p : partials) {
    for (std::size_t i = 0; i < p.params.size(); ++i) result.grads.params[i] += p.params[i];
    for (std::size_t k = 0; k < m; ++k) result.grads.latent[k] += p.latent[k];
    value_sum += p.value_sum;
    grad_sum += p.grad_sum;
  }
  result.loss.value_term = value_sum / static_cast<double>(nv);
  result.loss.grad_term = ng > 0 ? grad_sum / static_cast<double>(ng) : 0.0;
  result.loss.total = result.loss.value_term + lambda * result.loss.grad_term;
  return result;
}

}  // namespace sald
