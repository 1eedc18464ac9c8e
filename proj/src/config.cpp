#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sald/error.hpp"
#include "sald/experiments.hpp"

namespace sald {
namespace {

using nlohmann::json;

const std::set<std::string> kKeys{
    "name",         "inputs",     "samples",        "hidden",         "depth",          "beta",
    "init_radius",  "latent_dim", "latent_std",     "loss",           "lambda",         "epochs",
    "lr",           "lr_decay_factor", "lr_decay_every", "batch_points", "shapes_per_step", "seed",
    "total_samples", "sigma2",    "k",              "n_surface",      "grid_res",       "padding",
    "eval_samples", "output_dir",
};

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("config key '") + key + "' has the wrong type");
  }
}

bool is_fixture(const std::string& s) { return s.rfind("fixture:", 0) == 0; }

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw Error("unknown config key '" + key + "'");
  }

  ExperimentConfig c;
  read(j, "name", c.name);
  read(j, "inputs", c.inputs);
  read(j, "samples", c.samples);
  read(j, "hidden", c.hidden);
  read(j, "depth", c.depth);
  read(j, "beta", c.beta);
  read(j, "init_radius", c.init_radius);
  read(j, "latent_dim", c.train.latent_dim);
  read(j, "latent_std", c.latent_std);
  std::string loss = c.train.loss_kind == LossKind::SAL ? "sal" : "sald";
  read(j, "loss", loss);
  if (loss == "sal") c.train.loss_kind = LossKind::SAL;
  else if (loss == "sald") c.train.loss_kind = LossKind::SALD;
  else throw Error("loss must be \"sal\" or \"sald\"");
  read(j, "lambda", c.train.lambda);
  read(j, "epochs", c.train.epochs);
  read(j, "lr", c.train.lr);
  read(j, "lr_decay_factor", c.train.lr_decay_factor);
  read(j, "lr_decay_every", c.train.lr_decay_every);
  read(j, "batch_points", c.train.batch_points);
  read(j, "shapes_per_step", c.train.shapes_per_step);
  read(j, "seed", c.train.seed);
  read(j, "total_samples", c.sampling.total);
  read(j, "sigma2", c.sampling.sigma2);
  read(j, "k", c.sampling.k);
  read(j, "n_surface", c.sampling.n_surface);
  read(j, "grid_res", c.grid_res);
  read(j, "padding", c.padding);
  read(j, "eval_samples", c.eval_samples);
  std::string out = c.output_dir.string();
  read(j, "output_dir", out);
  c.output_dir = out;

  if (!(c.train.lambda >= 0.0)) throw Error("lambda must be nonnegative");
  if (c.hidden < 1 || c.depth < 2) throw Error("network needs hidden >= 1 and depth >= 2");
  if (c.grid_res < 2) throw Error("grid_res must be at least 2");
  for (std::string& in : c.inputs) {
    if (is_fixture(in)) continue;
    std::filesystem::path p(in);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw Error("input not found: " + p.string());
    in = p.string();
  }
  if (!c.samples.empty()) {
    std::filesystem::path p(c.samples);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw Error("sample file not found: " + p.string());
    c.samples = p.string();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["inputs"] = c.inputs;
  j["samples"] = c.samples;
  j["hidden"] = c.hidden;
  j["depth"] = c.depth;
  j["beta"] = c.beta;
  j["init_radius"] = c.init_radius;
  j["latent_dim"] = c.train.latent_dim;
  j["latent_std"] = c.latent_std;
  j["loss"] = c.train.loss_kind == LossKind::SAL ? "sal" : "sald";
  j["lambda"] = c.train.lambda;
  j["epochs"] = c.train.epochs;
  j["lr"] = c.train.lr;
  j["lr_decay_factor"] = c.train.lr_decay_factor;
  j["lr_decay_every"] = c.train.lr_decay_every;
  j["batch_points"] = c.train.batch_points;
  j["shapes_per_step"] = c.train.shapes_per_step;
  j["seed"] = c.train.seed;
  j["total_samples"] = c.sampling.total;
  j["sigma2"] = c.sampling.sigma2;
  j["k"] = c.sampling.k;
  j["n_surface"] = c.sampling.n_surface;
  j["grid_res"] = c.grid_res;
  j["padding"] = c.padding;
  j["eval_samples"] = c.eval_samples;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2);
}

}  // namespace sald
