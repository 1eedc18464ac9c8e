#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "sald/error.hpp"
#include "sald/net.hpp"
#include "sald/output.hpp"

namespace sald {
namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

void write_checkpoint(const ImplicitNet& net, const LatentTable* latents, const std::filesystem::path& path) {
  const NetArchitecture& a = net.arch();
  if (latents && latents->rows() > 0 && latents->dim != a.latent_dim) {
    throw Error("latent table dimension does not match the network");
  }
  std::ofstream out = open_output(path, std::ios::binary);
  out.write("SNET", 4);
  detail::write_le<std::uint32_t>(out, kCheckpointVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.spatial_dim));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.latent_dim));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.hidden));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.depth));
  detail::write_le<std::int32_t>(out, a.skip_layer);
  detail::write_le<double>(out, a.beta);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    for (double w : net.weights(l)) detail::write_le(out, w);
    for (double b : net.bias(l)) detail::write_le(out, b);
  }
  const std::uint64_t rows = latents ? latents->rows() : 0;
  detail::write_le<std::uint64_t>(out, rows);
  if (rows > 0) {
    for (double c : latents->codes) detail::write_le(out, c);
  }
  if (!out) throw Error("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  detail::expect_magic(in, "SNET");
  const auto version = detail::read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw Error("unsupported checkpoint version");
  NetArchitecture a;
  a.spatial_dim = static_cast<int>(detail::read_le<std::uint32_t>(in));
  a.latent_dim = static_cast<int>(detail::read_le<std::uint32_t>(in));
  a.hidden = static_cast<int>(detail::read_le<std::uint32_t>(in));
  a.depth = static_cast<int>(detail::read_le<std::uint32_t>(in));
  a.skip_layer = detail::read_le<std::int32_t>(in);
  a.beta = detail::read_le<double>(in);
  if (a.hidden > (1 << 20) || a.depth > 1024 || a.spatial_dim > 64 || a.latent_dim > (1 << 16)) {
    throw Error("checkpoint header out of range");
  }
  Checkpoint cp{ImplicitNet(a), {}};
  for (std::size_t l = 0; l < cp.net.num_layers(); ++l) {
    for (double& w : cp.net.weights(l)) w = detail::read_le<double>(in);
    for (double& b : cp.net.bias(l)) b = detail::read_le<double>(in);
  }
  const auto rows = detail::read_le<std::uint64_t>(in);
  cp.latents.dim = rows > 0 ? a.latent_dim : 0;
  if (rows > 0) {
    if (a.latent_dim == 0) throw Error("checkpoint has latents but no latent input");
    cp.latents.codes.resize(rows * static_cast<std::uint64_t>(a.latent_dim));
    for (double& c : cp.latents.codes) c = detail::read_le<double>(in);
  }
  return cp;
}

}  // namespace sald
