#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sald/extract.hpp"
#include "sald/geometry.hpp"
#include "sald/net.hpp"

using namespace sald;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string output;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(SALD_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path work_dir() {
  const fs::path d = fs::temp_directory_path() / "sald_test_cli";
  fs::create_directories(d);
  return d;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("train --hidden many").code, 1);
  EXPECT_EQ(run("train --input /no/such/shape.obj --epochs 1").code, 1);
  EXPECT_EQ(run("figure fig9").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, VerifyPassesAndCatchesMutation) {
  const CliRun ok = run("verify --pairs 20000");
  EXPECT_EQ(ok.code, 0) << ok.output;
  EXPECT_NE(ok.output.find("all checks passed"), std::string::npos);
  EXPECT_NE(ok.output.find("margin"), std::string::npos);
  const CliRun bad = run("verify --pairs 2000 --mutate tau-sign");
  EXPECT_EQ(bad.code, 3) << bad.output;
  EXPECT_NE(bad.output.find("FAIL"), std::string::npos);
}

TEST(Cli, PrepareTrainReconstructEval) {
  const fs::path dir = work_dir() / "pipeline";
  fs::remove_all(dir);
  const CliRun prep = run("prepare fixture:circle --out " + q(dir / "circle.bin") + " --total 1500 --seed 2");
  ASSERT_EQ(prep.code, 0) << prep.output;
  const SampleBatch b = read_samples(dir / "circle.bin");
  EXPECT_EQ(b.values.size() + b.grads.size(), 1500u);

  const CliRun train = run("train --input fixture:circle --samples " + q(dir / "circle.bin") +
                        " --epochs 300 --hidden 24 --batch 128 --grid-res 96 --out " + q(dir / "run"));
  ASSERT_EQ(train.code, 0) << train.output;
  for (const char* f : {"model.ckpt", "loss.csv", "zero_set.csv", "zero_set.svg", "metrics.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }

  const CliRun rec = run("reconstruct " + q(dir / "run" / "model.ckpt") + " --out " + q(dir / "rec.svg") +
                      " --res 64 --extent 0.6 --overlay fixture:circle");
  EXPECT_EQ(rec.code, 0) << rec.output;
  EXPECT_NE(read_file(dir / "rec.svg").find("<svg"), std::string::npos);

  // A box far inside the circle has no zero crossings.
  const CliRun empty = run("reconstruct " + q(dir / "run" / "model.ckpt") + " --out " + q(dir / "none.csv") +
                        " --res 16 --extent 0.02");
  EXPECT_EQ(empty.code, 4) << empty.output;
}

TEST(Cli, ReconstructSphereCheckpointToWatertightObj) {
  const fs::path dir = work_dir() / "sphere";
  fs::create_directories(dir);
  const ImplicitNet net = geometric_init(build_decoder(3, 0, 128, 4), 0.5, 3);
  write_checkpoint(net, nullptr, dir / "sphere.ckpt");
  const CliRun rec = run("reconstruct " + q(dir / "sphere.ckpt") + " --out " + q(dir / "sphere.obj") +
                      " --res 48 --extent 2");
  ASSERT_EQ(rec.code, 0) << rec.output;
  const SurfaceMesh m = read_obj_mesh(dir / "sphere.obj");
  ASSERT_FALSE(m.empty());
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) ++edges[{t[e], t[(e + 1) % 3]}];
  }
  for (const auto& [e, n] : edges) {
    EXPECT_EQ(n, 1);
    EXPECT_EQ(edges.count({e.second, e.first}), 1u);
  }
}

TEST(Cli, EvalSelfComparisonAndBatchMode) {
  const fs::path dir = work_dir() / "eval";
  fs::remove_all(dir);
  fs::create_directories(dir / "recon");
  fs::create_directories(dir / "ref");
  for (const char* name : {"a", "b"}) {
    std::ofstream(dir / "recon" / (std::string(name) + ".seg")) << "0 0 1 0\n1 0 1 1\n";
    std::ofstream(dir / "ref" / (std::string(name) + ".seg")) << "0 0 1 0\n1 0 1 1\n";
  }
  const CliRun one = run("eval " + q(dir / "recon" / "a.seg") + " " + q(dir / "ref" / "a.seg") + " --out " +
                      q(dir / "one.csv") + " --samples 20000");
  ASSERT_EQ(one.code, 0) << one.output;
  std::istringstream rows(read_file(dir / "one.csv"));
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  EXPECT_EQ(row.substr(0, 2), "a,");
  const double chamfer = std::stod(row.substr(2, row.find(',', 2) - 2));
  EXPECT_LE(chamfer, 1e-3);

  const CliRun batch = run("eval " + q(dir / "recon") + " " + q(dir / "ref") + " --out " + q(dir / "all.csv") +
                        " --samples 2000 --scale 1000");
  ASSERT_EQ(batch.code, 0) << batch.output;
  const std::string all = read_file(dir / "all.csv");
  EXPECT_NE(all.find("\nmean,"), std::string::npos);
  EXPECT_NE(all.find("\nmedian,"), std::string::npos);
}

TEST(Cli, NumericFailureExitCode) {
  const fs::path dir = work_dir() / "nan";
  fs::create_directories(dir);
  SampleBatch b;
  b.dim = 2;
  for (int i = 0; i < 20; ++i) b.values.push_back({{0.01 * i, 0.0, 0.0}, NAN});
  write_samples(b, dir / "nan.bin");
  const CliRun r = run("train --input fixture:circle --samples " + q(dir / "nan.bin") + " --epochs 5 --hidden 8 --out " +
                    q(dir / "out"));
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("epoch"), std::string::npos);
}

TEST(Cli, MinimalCurveFigure) {
  const fs::path dir = work_dir() / "fig3";
  const CliRun r = run("figure fig3-minimal-curve --out " + q(dir));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "curve_sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "curves.svg"));
}

TEST(Cli, TrainFromConfigFile) {
  const fs::path dir = work_dir() / "cfg";
  fs::create_directories(dir);
  std::ofstream(dir / "run.json") << R"({"inputs": ["fixture:square"], "epochs": 50, "hidden": 16,
    "batch_points": 64, "total_samples": 900, "grid_res": 64, "output_dir": ")" +
                                         (dir / "out").string() + "\"}";
  const CliRun r = run("train --config " + q(dir / "run.json") + " --loss sal");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "out" / "model.ckpt"));
  const CliRun bad = run("train --config " + q(dir / "run.json") + " --loss mse");
  EXPECT_EQ(bad.code, 1);
}
