// sald: prepare samples, train, extract, evaluate, verify, and regenerate
// the 2D figures.
//
// Exit codes: 0 ok, 1 usage or input error, 2 numeric failure, 3
// verification failure, 4 no zero crossings in the extraction box.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "sald/error.hpp"
#include "sald/eval.hpp"
#include "sald/experiments.hpp"
#include "sald/extract.hpp"
#include "sald/verify.hpp"

namespace fs = std::filesystem;
using namespace sald;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kVerifyFailed = 3, kNoCrossings = 4 };

struct Overrides {
  std::vector<std::string> inputs;
  std::optional<std::string> samples, loss, out, name;
  std::optional<double> lambda, lr, beta, init_radius;
  std::optional<std::size_t> epochs, batch, total, grid_res, decay_every;
  std::optional<int> hidden, depth, latent_dim;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app) {
    app->add_option("--input", inputs, "Geometry file or fixture:<name> (repeatable)");
    app->add_option("--samples", samples, "Precomputed sample file");
    app->add_option("--loss", loss, "sal or sald")->check(CLI::IsMember({"sal", "sald"}));
    app->add_option("--lambda", lambda, "Weight of the derivative term")->check(CLI::NonNegativeNumber);
    app->add_option("--epochs", epochs, "Optimisation steps");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--lr-decay-every", decay_every, "Halve the learning rate every N epochs (0 = never)");
    app->add_option("--batch", batch, "Points per shape per step");
    app->add_option("--total", total, "Training samples per shape");
    app->add_option("--hidden", hidden, "Hidden width");
    app->add_option("--depth", depth, "Linear layers");
    app->add_option("--beta", beta, "Softplus sharpness");
    app->add_option("--init-radius", init_radius, "Radius of the initial sphere");
    app->add_option("--latent-dim", latent_dim, "Latent code size (auto-decoder when > 0)");
    app->add_option("--grid-res", grid_res, "Extraction grid nodes per axis");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--out", out, "Output directory");
    app->add_option("--name", name, "Run name");
  }

  void apply(ExperimentConfig& c) const {
    if (!inputs.empty()) c.inputs = inputs;
    if (samples) c.samples = *samples;
    if (loss) c.train.loss_kind = *loss == "sal" ? LossKind::SAL : LossKind::SALD;
    if (lambda) c.train.lambda = *lambda;
    if (epochs) c.train.epochs = *epochs;
    if (lr) c.train.lr = *lr;
    if (decay_every) c.train.lr_decay_every = *decay_every;
    if (batch) c.train.batch_points = *batch;
    if (total) c.sampling.total = *total;
    if (hidden) c.hidden = *hidden;
    if (depth) c.depth = *depth;
    if (beta) c.beta = *beta;
    if (init_radius) c.init_radius = *init_radius;
    if (latent_dim) c.train.latent_dim = *latent_dim;
    if (grid_res) c.grid_res = *grid_res;
    if (seed) c.train.seed = *seed;
    if (out) c.output_dir = *out;
    if (name) c.name = *name;
  }
};

Box3 cube_box(int dim, double extent) {
  Box3 b;
  for (int a = 0; a < dim; ++a) {
    b.lo[a] = -extent;
    b.hi[a] = extent;
  }
  return b;
}

bool is_geometry_file(const fs::path& p) {
  static const std::vector<std::string> ext{".obj", ".xyz", ".pts", ".seg", ".txt"};
  return std::find(ext.begin(), ext.end(), p.extension().string()) != ext.end();
}

int cmd_eval(const fs::path& recon, const fs::path& reference, const fs::path& out, std::size_t n,
             std::uint64_t seed, double scale) {
  std::vector<MetricRow> rows;
  if (fs::is_directory(recon)) {
    if (!fs::is_directory(reference)) throw Error("batch mode needs a reference directory");
    std::map<std::string, fs::path> recon_files;
    for (const auto& e : fs::directory_iterator(recon)) {
      if (e.is_regular_file() && is_geometry_file(e.path())) recon_files[e.path().stem().string()] = e.path();
    }
    for (const auto& [stem, path] : recon_files) {
      fs::path ref;
      for (const auto& e : fs::directory_iterator(reference)) {
        if (e.is_regular_file() && e.path().stem() == stem && is_geometry_file(e.path())) ref = e.path();
      }
      if (ref.empty()) {
        std::cerr << "no reference for " << stem << ", skipped\n";
        continue;
      }
      rows.push_back({stem, metric_report(read_geometry(path), read_geometry(ref), n, seed)});
    }
    if (rows.empty()) throw Error("no matching reconstruction/reference pairs");
  } else {
    rows.push_back({recon.stem().string(), metric_report(read_geometry(recon), read_geometry(reference), n, seed)});
  }
  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  write_metric_csv(rows, out, scale);
  for (const MetricRow& r : rows) {
    std::cout << r.name << ": chamfer " << r.report.chamfer_sym * scale << ", normal " << r.report.normal_sym
              << " deg\n";
  }
  return kOk;
}

int cmd_figure(const std::string& preset, const std::optional<fs::path>& config_path, const Overrides& ov) {
  ExperimentConfig c = config_path ? load_config(*config_path) : preset_config(preset);
  ov.apply(c);
  if (preset == "fig2") {
    const Fig2Result r = run_fig2(c);
    std::cout << "SALD chamfer " << r.sald_metrics.chamfer_sym << ", max corner distance " << r.sald_corner << '\n'
              << "SAL  chamfer " << r.sal_metrics.chamfer_sym << ", max corner distance " << r.sal_corner << '\n';
  } else if (preset == "fig4") {
    const Fig4Result r = run_fig4(c);
    for (const auto& [name, g] : {std::pair{"SALD", r.sald_gap}, std::pair{"SAL ", r.sal_gap}}) {
      std::cout << name << " gap path " << g.path_length << " (gap " << r.shape.width << "), end errors "
                << g.start_error << ", " << g.end_error << '\n';
    }
  } else if (preset == "fig3-minimal-curve") {
    const auto rows = run_curve_sweep({-0.4, -0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2, 0.4}, 2.0, c.output_dir);
    for (const CurveSweepRow& r : rows) {
      std::cout << "A=" << r.amplitude << "  SAL " << r.sal << "  SALD excess " << r.sald_excess_sin << '\n';
    }
  } else if (preset == "shape-space") {
    const ShapeSpaceResult r = run_shape_space(c);
    for (std::size_t i = 0; i < r.chamfer.size(); ++i) {
      std::cout << "shape " << i << " chamfer " << r.chamfer[i] << " (diameter " << r.diameter[i] << ")\n";
    }
  } else {
    throw CLI::ValidationError("figure", "unknown preset " + preset);
  }
  std::cout << "artifacts in " << c.output_dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign-agnostic implicit surface learning from raw geometry"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Precompute training samples for one shape");
  std::string prep_input, prep_out;
  SamplingOptions prep_opts;
  std::uint64_t prep_seed = 0;
  prepare->add_option("input", prep_input, "Geometry file or fixture:<name>")->required();
  prepare->add_option("--out", prep_out, "Sample file")->required();
  prepare->add_option("--total", prep_opts.total, "Number of samples");
  prepare->add_option("--k", prep_opts.k, "Neighbour rank for the near-surface spread");
  prepare->add_option("--sigma2", prep_opts.sigma2, "Spread of the far samples");
  prepare->add_option("--seed", prep_seed, "Random seed");

  // train
  auto* train = app.add_subcommand("train", "Train from a config file and/or flags");
  std::optional<std::string> train_config;
  Overrides train_ov;
  train->add_option("--config", train_config, "JSON config")->check(CLI::ExistingFile);
  train_ov.add_to(train);

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Extract the zero level set of a checkpoint");
  std::string rec_ckpt, rec_out;
  std::size_t rec_res = 256, rec_shape = 0;
  double rec_extent = 1.0;
  std::optional<std::string> rec_overlay;
  recon->add_option("checkpoint", rec_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  recon->add_option("--out", rec_out, "Output .obj (3D), .svg or .csv (2D)")->required();
  recon->add_option("--res", rec_res, "Grid nodes per axis")->check(CLI::Range(2, 4096));
  recon->add_option("--extent", rec_extent, "Extract in [-extent, extent]^d")->check(CLI::PositiveNumber);
  recon->add_option("--shape", rec_shape, "Latent row for auto-decoder checkpoints");
  recon->add_option("--overlay", rec_overlay, "Geometry drawn under a 2D curve");

  // eval
  auto* eval = app.add_subcommand("eval", "Chamfer and normal metrics against a reference");
  std::string ev_recon, ev_ref, ev_out;
  std::size_t ev_n = 30000;
  std::uint64_t ev_seed = 0;
  double ev_scale = 1.0;
  eval->add_option("recon", ev_recon, "Reconstruction file or directory")->required()->check(CLI::ExistingPath);
  eval->add_option("reference", ev_ref, "Reference file or directory")->required()->check(CLI::ExistingPath);
  eval->add_option("--out", ev_out, "CSV file")->required();
  eval->add_option("--samples", ev_n, "Surface samples per side");
  eval->add_option("--seed", ev_seed, "Sampling seed");
  eval->add_option("--scale", ev_scale, "Multiply Chamfer columns (e.g. 1000)");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the built-in mathematical self-checks");
  VerifyOptions vopt;
  std::string mutate;
  verify->add_option("--seed", vopt.seed, "Random seed");
  verify->add_option("--pairs", vopt.unit_pairs, "Random unit-vector pairs per dimension");
  verify->add_option("--mutate", mutate, "Break a component on purpose to see the checks fail")
      ->check(CLI::IsMember({"tau-sign"}));

  // figure
  auto* figure = app.add_subcommand("figure", "Regenerate a 2D figure");
  std::string fig_name;
  std::optional<fs::path> fig_config;
  Overrides fig_ov;
  figure->add_option("preset", fig_name, "fig2, fig3-minimal-curve, fig4 or shape-space")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3-minimal-curve", "fig4", "shape-space"}));
  figure->add_option("--config", fig_config, "JSON config replacing the built-in preset")->check(CLI::ExistingFile);
  fig_ov.add_to(figure);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*prepare) {
      const RawGeometry geom = load_input(prep_input);
      const SampleBatch batch = sample_training_set(geom, prep_opts, prep_seed);
      write_samples(batch, prep_out);
      std::cout << batch.values.size() << " value samples, " << batch.grads.size() << " gradient samples -> "
                << prep_out << '\n';
      return kOk;
    }
    if (*train) {
      ExperimentConfig c = train_config ? load_config(*train_config) : ExperimentConfig{};
      train_ov.apply(c);
      run_train(c);
      std::cout << "artifacts in " << c.output_dir.string() << '\n';
      return kOk;
    }
    if (*recon) {
      const Checkpoint cp = read_checkpoint(rec_ckpt);
      const int dim = cp.net.arch().spatial_dim;
      std::optional<RawGeometry> overlay;
      if (rec_overlay) overlay = load_input(*rec_overlay);
      const ReconstructOutcome r = run_reconstruct(rec_ckpt, rec_res, rec_out, cube_box(dim, rec_extent),
                                                   rec_shape, overlay ? &*overlay : nullptr);
      if (r.empty) {
        std::cerr << "no zero crossings in the extraction box\n";
        return kNoCrossings;
      }
      std::cout << "wrote " << r.written.string() << '\n';
      return kOk;
    }
    if (*eval) return cmd_eval(ev_recon, ev_ref, ev_out, ev_n, ev_seed, ev_scale);
    if (*verify) {
      if (mutate == "tau-sign") vopt.tau = [](double a, double b) { return std::abs(a - b); };
      const VerifyReport report = run_verification(vopt);
      print_report(report, std::cout);
      return report.all_passed() ? kOk : kVerifyFailed;
    }
    if (*figure) return cmd_figure(fig_name, fig_config, fig_ov);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
