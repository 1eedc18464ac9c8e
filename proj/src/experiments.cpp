#include "sald/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "sald/error.hpp"
#include "sald/loss.hpp"

namespace sald {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::filesystem::path prepare_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

MetricReport curve_metrics(const Polyline& curve, const RawGeometry& reference, const ExperimentConfig& c) {
  if (curve.empty()) return {kInf, kInf, kInf, kInf, kInf, kInf};
  return metric_report(to_geometry(curve), reference, c.eval_samples, c.train.seed);
}

std::vector<Vec3> unique_corners(const RawGeometry& geom) {
  std::vector<Vec3> v(geom.corners().begin(), geom.corners().end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

SampleBatch samples_for(const RawGeometry& geom, const ExperimentConfig& c, std::uint64_t seed) {
  if (!c.samples.empty()) return read_samples(c.samples);
  return sample_training_set(geom, c.sampling, seed);
}

// Zero level set in black over isolines every 0.05, on top of the input.
void write_level_svg(const ImplicitNet& net, std::span<const double> z, const Polyline& zero, const Box3& box,
                     const RawGeometry* overlay, std::size_t res, const std::filesystem::path& path) {
  const ScalarGrid grid = grid_eval(net, z, box, std::max<std::size_t>(res / 2, 2));
  std::vector<SvgLayer> layers;
  for (int k = -6; k <= 6; ++k) {
    if (k == 0) continue;
    layers.push_back({marching_squares(grid, 0.05 * k), k < 0 ? "#4aa3a3" : "#d9534f", 0.6});
  }
  layers.push_back({zero, "black", 2.0});
  write_svg(layers, overlay, box, path);
}

// SAL and SALD from the same samples and the same initial network.
PairResult run_pair(const RawGeometry& geom, const ExperimentConfig& config, const std::filesystem::path& dir) {
  const SampleBatch samples = samples_for(geom, config, config.train.seed);
  write_samples(samples, dir / "samples.bin");
  struct {
    SingleRun sald, sal;
  } runs{train_on_samples(samples, config, LossKind::SALD), train_on_samples(samples, config, LossKind::SAL)};

  const Box3 box = view_box(geom, config.padding);
  PairResult r;
  r.sald_curve = extract_curve(runs.sald.net, {}, box, config.grid_res);
  r.sal_curve = extract_curve(runs.sal.net, {}, box, config.grid_res);
  r.sald_metrics = curve_metrics(r.sald_curve, geom, config);
  r.sal_metrics = curve_metrics(r.sal_curve, geom, config);

  write_checkpoint(runs.sald.net, nullptr, dir / "sald.ckpt");
  write_checkpoint(runs.sal.net, nullptr, dir / "sal.ckpt");
  write_history_csv(runs.sald.history, dir / "sald_loss.csv");
  write_history_csv(runs.sal.history, dir / "sal_loss.csv");
  write_polyline_csv(r.sald_curve, dir / "sald_curve.csv");
  write_polyline_csv(r.sal_curve, dir / "sal_curve.csv");
  write_level_svg(runs.sald.net, {}, r.sald_curve, box, &geom, config.grid_res, dir / "sald.svg");
  write_level_svg(runs.sal.net, {}, r.sal_curve, box, &geom, config.grid_res, dir / "sal.svg");
  const std::vector<MetricRow> rows{{"sald", r.sald_metrics}, {"sal", r.sal_metrics}};
  write_metric_csv(rows, dir / "metrics.csv");
  return r;
}

}  // namespace

RawGeometry load_input(const std::string& input) {
  if (input.rfind("fixture:", 0) == 0) return fixtures::by_name(input.substr(8));
  return read_geometry(input);
}

Box3 view_box(const RawGeometry& geom, double padding) {
  const Box3 b = geom.bounds();
  const int d = geom.dim();
  double extent = 0.0;
  for (int a = 0; a < d; ++a) extent = std::max(extent, b.hi[a] - b.lo[a]);
  if (!(extent > 0.0)) extent = 1.0;
  const double half = 0.5 * extent * (1.0 + 2.0 * padding);
  Box3 box;
  for (int a = 0; a < d; ++a) {
    const double c = 0.5 * (b.lo[a] + b.hi[a]);
    box.lo[a] = c - half;
    box.hi[a] = c + half;
  }
  return box;
}

SingleRun train_on_samples(const SampleBatch& samples, const ExperimentConfig& config, LossKind kind) {
  ImplicitNet net = geometric_init(build_decoder(samples.dim, 0, config.hidden, config.depth, config.beta),
                                   config.init_radius, config.train.seed);
  TrainConfig tc = config.train;
  tc.loss_kind = kind;
  tc.latent_dim = 0;
  TrainResult r = train_single(samples, std::move(net), tc);
  return {std::move(r.net), std::move(r.history)};
}

Polyline extract_curve(const ImplicitNet& net, std::span<const double> z, const Box3& box, std::size_t res) {
  if (net.arch().spatial_dim != 2) throw Error("curve extraction needs a 2D network");
  const ScalarGrid grid = grid_eval(net, z, box, res);
  const std::vector<double> zc(z.begin(), z.end());
  return marching_squares(grid, 0.0, [&net, zc](const Vec3& p) {
    const double x[2] = {p[0], p[1]};
    return forward(net, x, zc);
  });
}

SurfaceMesh extract_surface(const ImplicitNet& net, std::span<const double> z, const Box3& box, std::size_t res) {
  if (net.arch().spatial_dim != 3) throw Error("surface extraction needs a 3D network");
  return marching_cubes(grid_eval(net, z, box, res), 0.0);
}

double max_distance_to_curve(const std::vector<Vec3>& points, const Polyline& curve) {
  if (curve.empty()) return kInf;
  const RawGeometry g = to_geometry(curve);
  double m = 0.0;
  for (const Vec3& p : points) m = std::max(m, g.closest(p).distance);
  return m;
}

GapCrossing measure_gap_crossing(const Polyline& curve, const fixtures::GapShape& gap) {
  GapCrossing out;
  const Vec3 mid = 0.5 * (gap.gap_start + gap.gap_end);
  std::size_t best_chain = 0, m = 0;
  double best = kInf;
  for (std::size_t c = 0; c < curve.chains.size(); ++c) {
    const auto& pts = curve.chains[c].points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = distance(pts[i], mid);
      if (d < best) {
        best = d;
        best_chain = c;
        m = i;
      }
    }
  }
  if (best == kInf) return out;
  const PolylineChain& chain = curve.chains[best_chain];
  const std::size_t n = chain.points.size();
  auto nearest = [&](const Vec3& q) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (distance(chain.points[i], q) < distance(chain.points[k], q)) k = i;
    }
    return k;
  };
  const std::size_t i = nearest(gap.gap_start);
  const std::size_t j = nearest(gap.gap_end);
  auto arc_length = [&](std::size_t from, std::size_t steps) {
    double len = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      len += distance(chain.points[(from + s) % n], chain.points[(from + s + 1) % n]);
    }
    return len;
  };
  // Walk from i towards j along the direction that passes the midpoint vertex.
  const std::size_t fwd = (j + n - i) % n;
  const bool mid_on_fwd = (m + n - i) % n <= fwd;
  if (chain.closed) {
    out.path_length = mid_on_fwd ? arc_length(i, fwd) : arc_length(j, n - fwd);
  } else {
    const std::size_t lo = std::min(i, j), hi = std::max(i, j);
    if (m < lo || m > hi) return out;
    out.path_length = arc_length(lo, hi - lo);
  }
  out.found = i != j;
  out.start_error = distance(chain.points[i], gap.gap_start);
  out.end_error = distance(chain.points[j], gap.gap_end);
  return out;
}

Fig2Result run_fig2(const ExperimentConfig& config) {
  const RawGeometry geom = load_input(config.inputs.empty() ? "fixture:l-shape" : config.inputs.front());
  const auto dir = prepare_dir(config.output_dir);
  Fig2Result r;
  static_cast<PairResult&>(r) = run_pair(geom, config, dir);
  const std::vector<Vec3> corners = unique_corners(geom);
  r.sald_corner = max_distance_to_curve(corners, r.sald_curve);
  r.sal_corner = max_distance_to_curve(corners, r.sal_curve);

  std::ofstream out(dir / "corners.csv");
  out.precision(17);
  out << "loss,max_corner_distance\nsald," << r.sald_corner << "\nsal," << r.sal_corner << '\n';
  if (!out) throw Error("write failed: " + (dir / "corners.csv").string());
  return r;
}

Fig4Result run_fig4(const ExperimentConfig& config, double gap) {
  const std::string input = config.inputs.empty() ? "fixture:u-gap" : config.inputs.front();
  const auto dir = prepare_dir(config.output_dir);
  Fig4Result r;
  r.shape = fixtures::u_with_gap(gap);
  const RawGeometry geom = input == "fixture:u-gap" ? r.shape.geometry : load_input(input);
  static_cast<PairResult&>(r) = run_pair(geom, config, dir);
  if (input == "fixture:u-gap") {
    r.sald_gap = measure_gap_crossing(r.sald_curve, r.shape);
    r.sal_gap = measure_gap_crossing(r.sal_curve, r.shape);
  }
  std::ofstream out(dir / "gap.csv");
  out.precision(17);
  out << "loss,found,path_length,gap_width,start_error,end_error\n";
  for (const auto& [name, g] : {std::pair{"sald", r.sald_gap}, std::pair{"sal", r.sal_gap}}) {
    out << name << ',' << (g.found ? 1 : 0) << ',' << g.path_length << ',' << r.shape.width << ','
        << g.start_error << ',' << g.end_error << '\n';
  }
  if (!out) throw Error("write failed: " + (dir / "gap.csv").string());
  return r;
}

std::vector<CurveSweepRow> run_curve_sweep(const std::vector<double>& amplitudes, double span,
                                           const std::filesystem::path& output_dir) {
  std::vector<CurveSweepRow> rows;
  std::vector<SvgLayer> layers;
  for (double a : amplitudes) {
    const CurveFamily curve = CurveFamily::sine(a, span);
    CurveSweepRow row;
    row.amplitude = a;
    row.sal = curve_restricted_sal(curve).total();
    row.sald_excess_sin = curve_restricted_sald_excess(curve, DerivativeSimilarity::SinAngle).total();
    row.sald_excess_min_norm = curve_restricted_sald_excess(curve, DerivativeSimilarity::MinNorm).total();
    rows.push_back(row);

    PolylineChain chain;
    for (int k = 0; k <= 200; ++k) {
      const double s = span * k / 200.0;
      chain.points.push_back({s, curve.t(s), 0.0});
    }
    layers.push_back({Polyline{{chain}}, a == 0.0 ? "black" : "#3366cc", a == 0.0 ? 2.0 : 1.0});
  }
  if (output_dir.empty()) return rows;
  prepare_dir(output_dir);
  std::ofstream out(output_dir / "curve_sweep.csv");
  out.precision(17);
  out << "amplitude,sal,sald_excess_sin,sald_excess_min_norm\n";
  for (const CurveSweepRow& r : rows) {
    out << r.amplitude << ',' << r.sal << ',' << r.sald_excess_sin << ',' << r.sald_excess_min_norm << '\n';
  }
  if (!out) throw Error("write failed: " + (output_dir / "curve_sweep.csv").string());

  double a_max = 0.0;
  for (double a : amplitudes) a_max = std::max(a_max, std::abs(a));
  const double half = 0.5 * span + 0.1;
  const Box3 view{{0.5 * span - half, -half, 0.0}, {0.5 * span + half, half, 0.0}};
  const RawGeometry endpoints = RawGeometry::from_points(2, {{0.0, 0.0, 0.0}, {span, 0.0, 0.0}});
  write_svg(layers, &endpoints, view, output_dir / "curves.svg");
  return rows;
}

ShapeSpaceResult run_shape_space(const ExperimentConfig& config) {
  if (config.inputs.size() < 2) throw Error("shape space needs at least two inputs");
  const int dim = config.train.latent_dim;
  if (dim <= 0) throw Error("shape space needs latent_dim > 0");
  const auto dir = prepare_dir(config.output_dir);

  std::vector<RawGeometry> shapes;
  std::vector<SampleBatch> samples;
  for (std::size_t i = 0; i < config.inputs.size(); ++i) {
    shapes.push_back(load_input(config.inputs[i]));
    if (shapes.back().dim() != 2) throw Error("shape space runs are 2D");
    samples.push_back(sample_training_set(shapes.back(), config.sampling, config.train.seed + i));
  }
  ImplicitNet net = geometric_init(build_decoder(2, dim, config.hidden, config.depth, config.beta),
                                   config.init_radius, config.train.seed);
  LatentTable latents = init_latents(shapes.size(), dim, config.latent_std, config.train.seed);
  AutoDecoderResult trained = train_autodecoder(samples, std::move(net), std::move(latents), config.train);
  write_checkpoint(trained.net, &trained.latents, dir / "autodecoder.ckpt");
  write_history_csv(trained.history, dir / "loss.csv");

  Box3 box = view_box(shapes[0], config.padding);
  for (const RawGeometry& g : shapes) {
    const Box3 b = view_box(g, config.padding);
    for (int a = 0; a < 2; ++a) {
      box.lo[a] = std::min(box.lo[a], b.lo[a]);
      box.hi[a] = std::max(box.hi[a], b.hi[a]);
    }
  }

  ShapeSpaceResult r;
  std::vector<MetricRow> rows;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto z = trained.latents.row(i);
    r.curves.push_back(extract_curve(trained.net, z, box, config.grid_res));
    const MetricReport m = curve_metrics(r.curves.back(), shapes[i], config);
    r.chamfer.push_back(m.chamfer_sym);
    r.diameter.push_back(fixtures::diameter(shapes[i]));
    rows.push_back({"shape" + std::to_string(i), m});
    write_polyline_csv(r.curves.back(), dir / ("shape" + std::to_string(i) + ".csv"));
    write_level_svg(trained.net, z, r.curves.back(), box, &shapes[i], config.grid_res,
                    dir / ("shape" + std::to_string(i) + ".svg"));
  }
  write_metric_csv(rows, dir / "metrics.csv");

  for (std::size_t i = 0; i + 1 < shapes.size(); ++i) {
    const std::vector<double> z = interpolate_latent(trained.latents.row(i), trained.latents.row(i + 1), 0.5);
    r.midpoints.push_back(extract_curve(trained.net, z, box, config.grid_res));
    const std::string stem = "mid" + std::to_string(i) + "_" + std::to_string(i + 1);
    write_polyline_csv(r.midpoints.back(), dir / (stem + ".csv"));
    write_level_svg(trained.net, z, r.midpoints.back(), box, nullptr, config.grid_res, dir / (stem + ".svg"));
  }
  return r;
}

void run_train(const ExperimentConfig& config) {
  if (config.inputs.empty()) throw Error("config has no inputs");
  if (config.train.latent_dim > 0) {
    run_shape_space(config);
    return;
  }
  if (config.inputs.size() != 1) throw Error("single-shape training takes exactly one input");
  const auto dir = prepare_dir(config.output_dir);
  const RawGeometry geom = load_input(config.inputs.front());
  const SampleBatch samples = samples_for(geom, config, config.train.seed);
  if (samples.dim != geom.dim()) throw Error("sample file dimension does not match the input");
  SingleRun run = train_on_samples(samples, config, config.train.loss_kind);
  write_checkpoint(run.net, nullptr, dir / "model.ckpt");
  write_history_csv(run.history, dir / "loss.csv");

  const Box3 box = view_box(geom, config.padding);
  MetricReport m;
  if (geom.dim() == 2) {
    const Polyline curve = extract_curve(run.net, {}, box, config.grid_res);
    write_polyline_csv(curve, dir / "zero_set.csv");
    write_level_svg(run.net, {}, curve, box, &geom, config.grid_res, dir / "zero_set.svg");
    m = curve_metrics(curve, geom, config);
  } else {
    const SurfaceMesh mesh = extract_surface(run.net, {}, box, config.grid_res);
    write_obj(mesh, dir / "zero_set.obj");
    m = mesh.empty() ? MetricReport{kInf, kInf, kInf, kInf, kInf, kInf}
                     : metric_report(mesh, geom, config.eval_samples, config.train.seed);
  }
  const std::vector<MetricRow> rows{{config.name, m}};
  write_metric_csv(rows, dir / "metrics.csv");
}

ReconstructOutcome run_reconstruct(const std::filesystem::path& checkpoint, std::size_t res,
                                   const std::filesystem::path& out, const Box3& box, std::size_t shape,
                                   const RawGeometry* overlay) {
  const Checkpoint cp = read_checkpoint(checkpoint);
  std::vector<double> z;
  if (cp.net.arch().latent_dim > 0) {
    if (shape >= cp.latents.rows()) throw Error("checkpoint has no latent row " + std::to_string(shape));
    const auto row = cp.latents.row(shape);
    z.assign(row.begin(), row.end());
  }
  if (!out.parent_path().empty()) prepare_dir(out.parent_path());
  ReconstructOutcome r;
  r.written = out;
  if (cp.net.arch().spatial_dim == 2) {
    const Polyline curve = extract_curve(cp.net, z, box, res);
    r.empty = curve.empty();
    if (out.extension() == ".csv") {
      write_polyline_csv(curve, out);
    } else {
      const std::vector<SvgLayer> layers{{curve, "black", 2.0}};
      write_svg(layers, overlay, box, out);
    }
  } else {
    const SurfaceMesh mesh = extract_surface(cp.net, z, box, res);
    r.empty = mesh.empty();
    write_obj(mesh, out);
  }
  return r;
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.output_dir = std::filesystem::path("out") / name;
  c.train.lambda = 0.1;
  c.train.epochs = 5000;
  c.train.batch_points = 512;
  c.sampling.total = 6000;
  c.grid_res = 512;
  if (name == "fig2") {
    c.inputs = {"fixture:l-shape"};
  } else if (name == "fig4") {
    c.inputs = {"fixture:u-gap"};
  } else if (name == "fig3-minimal-curve") {
    c.inputs = {};
  } else if (name == "shape-space") {
    c.inputs = {"fixture:l-shape", "fixture:square", "fixture:triangle", "fixture:circle"};
    c.train.latent_dim = 8;
    c.train.batch_points = 256;
    c.train.shapes_per_step = 4;
  } else {
    throw Error("unknown preset: " + name);
  }
  return c;
}

}  // namespace sald
