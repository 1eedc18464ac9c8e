#pragma once

// End-to-end pipelines shared by the command-line tool and the acceptance
// runs: train on raw geometry, extract the zero level set, measure it, and
// write every artifact to an output directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sald/eval.hpp"
#include "sald/extract.hpp"
#include "sald/fixtures.hpp"
#include "sald/geometry.hpp"
#include "sald/net.hpp"
#include "sald/train.hpp"

namespace sald {

struct ExperimentConfig {
  std::string name = "run";
  /// Geometry files, or "fixture:<name>" for a built-in shape.
  std::vector<std::string> inputs;
  /// Optional precomputed sample file (single-shape runs only).
  std::string samples;
  int hidden = 64;
  int depth = 4;
  double beta = 100.0;
  double init_radius = 0.3;
  double latent_std = 0.1;
  TrainConfig train;
  SamplingOptions sampling;
  std::size_t grid_res = 256;
  /// Extraction box: the input bounds grown by this fraction of their extent.
  double padding = 0.15;
  std::size_t eval_samples = 30000;
  std::filesystem::path output_dir = "out";
};

/// Reads a JSON config. Relative input paths are resolved against the
/// config file's directory; unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Parses the JSON text of a config; `base_dir` resolves relative paths.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
/// Named built-in presets: "fig2", "fig3-minimal-curve", "fig4", "shape-space".
ExperimentConfig preset_config(const std::string& name);
std::string to_json(const ExperimentConfig& config);

RawGeometry load_input(const std::string& input);

/// Square box around the geometry, padded on every side.
Box3 view_box(const RawGeometry& geom, double padding);

struct SingleRun {
  ImplicitNet net;
  std::vector<EpochRecord> history;
};

/// Decoder built and initialised from the config, trained with `kind`.
SingleRun train_on_samples(const SampleBatch& samples, const ExperimentConfig& config, LossKind kind);

/// Zero level set of a trained 2D network; saddles resolved with the network.
Polyline extract_curve(const ImplicitNet& net, std::span<const double> z, const Box3& box, std::size_t res);
SurfaceMesh extract_surface(const ImplicitNet& net, std::span<const double> z, const Box3& box, std::size_t res);

/// Largest distance from the given points to the curve (infinite if empty).
double max_distance_to_curve(const std::vector<Vec3>& points, const Polyline& curve);

struct GapCrossing {
  bool found = false;
  double path_length = 0.0;
  double start_error = 0.0;  // distance from the true left gap end
  double end_error = 0.0;
};
/// Follows the chain passing closest to the gap midpoint between its
/// vertices nearest the two gap ends.
GapCrossing measure_gap_crossing(const Polyline& curve, const fixtures::GapShape& gap);

// --- pipelines ------------------------------------------------------------

struct PairResult {
  Polyline sald_curve;
  Polyline sal_curve;
  MetricReport sald_metrics;
  MetricReport sal_metrics;
};

struct Fig2Result : PairResult {
  double sald_corner = 0.0;  // max distance from the L corners to the curve
  double sal_corner = 0.0;
};
/// SAL and SALD trained on one shared sample set of the L shape.
Fig2Result run_fig2(const ExperimentConfig& config);

struct Fig4Result : PairResult {
  GapCrossing sald_gap;
  GapCrossing sal_gap;
  fixtures::GapShape shape;
};
Fig4Result run_fig4(const ExperimentConfig& config, double gap = 0.2);

struct CurveSweepRow {
  double amplitude = 0.0;
  double sal = 0.0;
  double sald_excess_sin = 0.0;
  double sald_excess_min_norm = 0.0;
};
/// Curve-restricted losses for t(s) = A sin(pi s / span) over the amplitudes.
std::vector<CurveSweepRow> run_curve_sweep(const std::vector<double>& amplitudes, double span,
                                           const std::filesystem::path& output_dir);

struct ShapeSpaceResult {
  std::vector<double> chamfer;        // symmetric, per shape
  std::vector<double> diameter;       // per shape
  std::vector<Polyline> curves;       // per shape
  std::vector<Polyline> midpoints;    // shape i to i + 1
};
/// Auto-decoder over config.inputs with config.train.latent_dim.
ShapeSpaceResult run_shape_space(const ExperimentConfig& config);

/// Generic training: single-shape SAL/SALD per config, or the auto-decoder
/// when latent_dim > 0. Writes checkpoint, loss CSV, and the extracted zero
/// set (SVG + CSV in 2D, OBJ in 3D).
void run_train(const ExperimentConfig& config);

struct ReconstructOutcome {
  bool empty = true;  // no zero crossings in the box
  std::filesystem::path written;
};
/// Extracts the zero set of a checkpoint (latent row `shape` when present).
ReconstructOutcome run_reconstruct(const std::filesystem::path& checkpoint, std::size_t res,
                                   const std::filesystem::path& out, const Box3& box, std::size_t shape = 0,
                                   const RawGeometry* overlay = nullptr);

}  // namespace sald
