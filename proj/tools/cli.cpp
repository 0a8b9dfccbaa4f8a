#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "semap/cloud.hpp"
#include "semap/dataset.hpp"
#include "semap/errors.hpp"
#include "semap/evaluation.hpp"
#include "semap/gt_fusion.hpp"
#include "semap/metrics.hpp"
#include "semap/photometric.hpp"
#include "semap/synth.hpp"
#include "semap/tcl.hpp"

namespace fs = std::filesystem;

namespace semap::cli {

namespace {

// Bad flag values or a mode the data cannot support; exits with kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void ensureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void writeFile(const fs::path& path, const std::string& content) {
  ensureParent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::optional<std::set<ClassId>> parseFilter(const std::string& names, const ClassPalette& palette) {
  if (names.empty()) return std::nullopt;
  std::set<ClassId> ids;
  std::stringstream ss(names);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    if (const auto id = palette.findByName(name)) {
      ids.insert(*id);
    } else {
      throw UsageError("--filter: unknown class '" + name + "'");
    }
  }
  return ids;
}

// ---------------------------------------------------------------------------

struct RunOptions {
  std::string sequence;
  std::string mode = "tcl-stereo";
  double dist_min = 3.0;
  int window = 7;
  std::string filter;
  std::string out;
  unsigned threads = 0;
  std::string labels_out;
};

void runPipeline(const RunOptions& o, std::ostream& out) {
  const SequenceDataset ds = loadSequence(o.sequence);
  LabelAssignment labels;
  if (o.mode == "baseline") {
    labels = baselineLabels(ds);
  } else {
    TclConfig cfg;
    cfg.dist_min = o.dist_min;
    cfg.window = o.window;
    cfg.mode = o.mode == "tcl-mono" ? StereoMode::kMono : StereoMode::kStereo;
    if (cfg.mode == StereoMode::kStereo && !ds.hasRightLabels()) {
      throw UsageError("--mode tcl-stereo needs right label maps, but " + o.sequence +
                       " has no labels/right/ maps for every keyframe (mono-only dataset)");
    }
    labels = labelAllPoints(ds, cfg, o.threads);
  }

  const auto filter = parseFilter(o.filter, ds.palette);
  const PointCloud cloud = buildCloud(ds, labels);
  ensureParent(o.out);
  writePly(o.out, cloud, filter);

  const fs::path labels_path =
      o.labels_out.empty() ? fs::path(o.out).parent_path() / "labels.txt" : fs::path(o.labels_out);
  writeFile(labels_path, formatLabels(ds, labels));

  std::size_t unlabeled = 0;
  for (const auto& kf : labels.labels) unlabeled += std::count(kf.begin(), kf.end(), std::nullopt);
  out << "labeled " << labels.size() - unlabeled << " of " << labels.size() << " points (" << o.mode << "), wrote "
      << countPassing(cloud, filter) << " vertices to " << o.out << " and labels to " << labels_path.string() << '\n';
}

struct EvalOptions {
  std::vector<std::string> labels;
  std::vector<std::string> gt;
  std::string palette;
  std::string metrics_out;
  bool strict = false;
};

void runEval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  if (o.labels.size() != o.gt.size()) {
    throw UsageError("eval: --labels and --gt must be given the same number of times");
  }
  const ClassPalette palette = loadPalette(o.palette);
  ConfusionMatrix cm = ConfusionMatrix::forPalette(palette);
  for (std::size_t i = 0; i < o.labels.size(); ++i) {
    cm.merge(evaluate(readLabels(o.labels[i]), readGroundTruth(o.gt[i]), palette));
  }
  const MetricOptions opt{o.strict};
  const MeanIou m = meanIou(cm, opt);
  for (ClassId c : m.undefined) {
    err << "warning: class " << palette.at(c).name << " has no predictions or ground truth; excluded from mIoU\n";
  }
  out << formatReport(cm, palette, opt);
  if (!o.metrics_out.empty()) writeFile(o.metrics_out, formatMetricsFile(cm, opt));
}

struct FuseOptions {
  std::string sequence;
  std::string out;
  GtFusionConfig cfg;
  unsigned threads = 0;
};

void runFuse(const FuseOptions& o, std::ostream& out) {
  const SequenceDataset ds = loadSequence(o.sequence);
  const GroundTruthAssignment gt = fuseGroundTruth(ds, o.cfg, o.threads);
  writeFile(o.out, formatGroundTruth(ds, gt));
  std::map<std::string, std::size_t> counts;
  for (const auto& kf : gt.points) {
    for (const GroundTruth& g : kf) ++counts[toString(g.reason)];
  }
  out << "fused ground truth for " << gt.size() << " points:";
  for (const auto& [reason, n] : counts) out << ' ' << reason << '=' << n;
  out << '\n';
}

struct SynthOptions {
  std::string scene = "street";
  std::size_t keyframes = 20;
  std::size_t points_per_kf = 1000;
  double noise = 0.0;
  int boundary_band = 0;
  double boundary_noise = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  bool no_images = false;
  std::size_t lidar_points = 60000;
  bool mono = false;
};

void runSynth(const SynthOptions& o, std::ostream& out) {
  const auto preset = synth::presetFromString(o.scene);
  if (!preset) throw UsageError("--scene must be plane, street or boxes");
  const synth::SceneSetup setup = synth::makePreset(*preset, o.keyframes);
  synth::GeneratorOptions gen;
  gen.points_per_kf = o.points_per_kf;
  gen.seed = o.seed;
  gen.render_images = !o.no_images;
  gen.render_right_images = !o.no_images;
  gen.lidar_points_per_kf = o.lidar_points;
  synth::GeneratedSequence seq = synth::generate(setup.scene, setup.trajectory, setup.rig, setup.palette, gen);

  synth::NoiseModel noise;
  noise.flip_rate = o.noise;
  noise.boundary_band_px = o.boundary_band;
  noise.boundary_flip_rate = o.boundary_noise;
  noise.seed = o.seed;
  synth::CorruptionStats stats;
  SequenceDataset ds = synth::corrupt(seq.dataset, noise, &stats);
  if (o.mono) {
    for (Keyframe& kf : ds.keyframes) kf.labels_right.reset();
  }
  saveSequence(ds, o.out);

  GroundTruthAssignment truth;
  truth.points.resize(ds.keyframes.size());
  for (std::size_t k = 0; k < ds.keyframes.size(); ++k) {
    for (ClassId c : seq.true_labels[k]) truth.points[k].push_back({c, ExclusionReason::kNone});
  }
  writeFile(fs::path(o.out) / "gt_true.txt", formatGroundTruth(ds, truth));
  out << "wrote " << o.scene << " sequence with " << ds.keyframes.size() << " keyframes and " << ds.pointCount()
      << " points to " << o.out << " (" << stats.flipped << " of " << stats.eligible << " label pixels flipped)\n";
}

struct EnergyOptions {
  std::string sequence;
  double lambda = 1.0;
  double huber = 0.0;
  std::size_t first = 0;
  std::size_t count = 0;  // 0 = to the end
  unsigned threads = 0;
};

void runEnergy(const EnergyOptions& o, std::ostream& out) {
  const SequenceDataset ds = loadSequence(o.sequence);
  if (o.first >= ds.keyframes.size()) throw UsageError("--first beyond the last keyframe");
  const std::size_t last = o.count == 0 ? ds.keyframes.size() : std::min(ds.keyframes.size(), o.first + o.count);
  std::vector<std::size_t> window(last - o.first);
  std::iota(window.begin(), window.end(), o.first);
  PhotometricConfig cfg;
  cfg.lambda = o.lambda;
  cfg.huber_delta = o.huber;
  const WindowEnergy e = windowEnergy(ds, window, cfg, o.threads);

  out << std::setprecision(10);
  out << "E " << e.total << '\n';
  out << "temporal " << e.temporal << '\n';
  out << "stereo " << e.stereo << " (lambda " << cfg.lambda << ")\n";
  out << "residuals " << e.residual_count << '\n';
  for (std::size_t w = 0; w < window.size(); ++w) {
    out << "frame " << ds.keyframes[window[w]].id << ' ' << e.per_frame[w] << '\n';
  }
}

struct MergeOptions {
  std::vector<std::string> inputs;
  std::string transforms;
  std::string out;
};

std::vector<Pose> readTransforms(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    if (v.empty()) continue;
    if (v.size() != 12 || !ls.eof()) {
      throw FormatError(path.filename().string() + ":" + std::to_string(line_no) + ": expected 12 fields");
    }
    std::array<double, 12> m{};
    std::copy(v.begin(), v.end(), m.begin());
    poses.push_back(Pose::fromRowMajor(m));
  }
  return poses;
}

void runMerge(const MergeOptions& o, std::ostream& out) {
  std::vector<PointCloud> clouds;
  for (const std::string& in : o.inputs) clouds.push_back(readPly(in));
  std::vector<Pose> transforms =
      o.transforms.empty() ? std::vector<Pose>(clouds.size()) : readTransforms(o.transforms);
  if (transforms.size() != clouds.size()) {
    throw UsageError("merge: " + std::to_string(clouds.size()) + " inputs but " + std::to_string(transforms.size()) +
                     " transforms");
  }
  const PointCloud merged = mergeClouds(clouds, transforms);
  ensureParent(o.out);
  writePly(o.out, merged);
  out << "merged " << clouds.size() << " clouds into " << merged.size() << " vertices at " << o.out << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporally consistent semantic labeling of sparse odometry point clouds", "semap"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "Label every point and export the semantic map");
  run_cmd->add_option("--sequence", run_opt.sequence, "Sequence directory")->required()->check(CLI::ExistingDirectory);
  run_cmd->add_option("--mode", run_opt.mode, "Labeling mode")
      ->check(CLI::IsMember({"baseline", "tcl-mono", "tcl-stereo"}))
      ->capture_default_str();
  run_cmd->add_option("--dist-min", run_opt.dist_min, "Minimum object distance in meters (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  run_cmd->add_option("--window", run_opt.window, "Keyframes on each side of the host")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  run_cmd->add_option("--filter", run_opt.filter, "Comma-separated class names to export");
  run_cmd->add_option("--out", run_opt.out, "Output PLY path")->required();
  run_cmd->add_option("--threads", run_opt.threads, "Worker threads (0 = all cores)");
  run_cmd->add_option("--labels-out", run_opt.labels_out, "labels.txt path (default: next to --out)");

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "Confusion matrix, IoU/mIoU and accuracy/OA");
  eval_cmd->add_option("--labels", eval_opt.labels, "labels.txt (repeat to pool sequences)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", eval_opt.gt, "gt_assignments.txt, one per --labels")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--palette", eval_opt.palette, "palette.txt")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--metrics-out", eval_opt.metrics_out, "Machine-readable metrics file");
  eval_cmd->add_flag("--strict", eval_opt.strict, "Count unlabeled predictions as false negatives");

  FuseOptions fuse_opt;
  auto* fuse_cmd = app.add_subcommand("fuse-gt", "Associate LiDAR and 2D ground truth with sparse points");
  fuse_cmd->add_option("--sequence", fuse_opt.sequence, "Sequence directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  fuse_cmd->add_option("--out", fuse_opt.out, "gt_assignments.txt path")->required();
  fuse_cmd->add_option("--max-range", fuse_opt.cfg.max_range, "LiDAR range limit in meters")->capture_default_str();
  fuse_cmd->add_option("--radius", fuse_opt.cfg.radius_px, "2D match radius in pixels")->capture_default_str();
  fuse_cmd->add_option("--depth-tol", fuse_opt.cfg.depth_tol_rel, "Relative depth tolerance")->capture_default_str();
  fuse_cmd->add_option("--threads", fuse_opt.threads, "Worker threads (0 = all cores)");

  SynthOptions synth_opt;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic sequence with exact ground truth");
  synth_cmd->add_option("--scene", synth_opt.scene, "plane, street or boxes")
      ->check(CLI::IsMember({"plane", "street", "boxes"}))
      ->capture_default_str();
  synth_cmd->add_option("--keyframes", synth_opt.keyframes)->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--points-per-kf", synth_opt.points_per_kf)->capture_default_str();
  synth_cmd->add_option("--noise", synth_opt.noise, "Label flip rate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  synth_cmd->add_option("--boundary-band", synth_opt.boundary_band, "Boundary band width in pixels")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--boundary-noise", synth_opt.boundary_noise, "Flip rate inside the boundary band")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--seed", synth_opt.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_opt.out, "Output sequence directory")->required();
  synth_cmd->add_flag("--no-images", synth_opt.no_images, "Skip grayscale renders");
  synth_cmd->add_option("--lidar-points", synth_opt.lidar_points, "LiDAR rays per keyframe (0 = none)")
      ->capture_default_str();
  synth_cmd->add_flag("--mono", synth_opt.mono, "Omit right label maps");

  EnergyOptions energy_opt;
  auto* energy_cmd = app.add_subcommand("energy", "Evaluate the photometric window energy");
  energy_cmd->add_option("--sequence", energy_opt.sequence, "Sequence directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  energy_cmd->add_option("--lambda", energy_opt.lambda, "Stereo term weight")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  energy_cmd->add_option("--huber", energy_opt.huber, "Huber threshold (0 = squared)")->check(CLI::NonNegativeNumber);
  energy_cmd->add_option("--first", energy_opt.first, "First keyframe index of the window");
  energy_cmd->add_option("--count", energy_opt.count, "Window length (0 = to the end)");
  energy_cmd->add_option("--threads", energy_opt.threads, "Worker threads (0 = all cores)");

  MergeOptions merge_opt;
  auto* merge_cmd = app.add_subcommand("merge", "Stitch semantic PLY maps into one");
  merge_cmd->add_option("--in", merge_opt.inputs, "Input PLY (repeat)")->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--transforms", merge_opt.transforms, "One row-major 3x4 transform per input")
      ->check(CLI::ExistingFile);
  merge_cmd->add_option("--out", merge_opt.out, "Output PLY path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "semap: error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run_cmd) runPipeline(run_opt, out);
    else if (*eval_cmd) runEval(eval_opt, out, err);
    else if (*fuse_cmd) runFuse(fuse_opt, out);
    else if (*synth_cmd) runSynth(synth_opt, out);
    else if (*energy_cmd) runEnergy(energy_opt, out);
    else if (*merge_cmd) runMerge(merge_opt, out);
  } catch (const UsageError& e) {
    err << "semap: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "semap: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "semap: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace semap::cli
