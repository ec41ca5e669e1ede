#include "mvdepth/cli.hpp"

#include "mvdepth/augmentation.hpp"
#include "mvdepth/classical_depth.hpp"
#include "mvdepth/cost_volume.hpp"
#include "mvdepth/depthnet/checkpoint.hpp"
#include "mvdepth/depthnet/gradcheck.hpp"
#include "mvdepth/depthnet/train.hpp"
#include "mvdepth/errors.hpp"
#include "mvdepth/io/config.hpp"
#include "mvdepth/io/image_io.hpp"
#include "mvdepth/io/tum.hpp"
#include "mvdepth/metrics.hpp"
#include "mvdepth/parallel.hpp"
#include "mvdepth/sequence_mapper.hpp"
#include "mvdepth/synthetic.hpp"
#include "mvdepth/toy_data.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

namespace mvdepth::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string config_path;

  double d_min = 0.5;
  double d_max = 50.0;
  int n_depth = 64;
  std::string estimator = "classical";
  std::string checkpoint;
  SelectionThresholds thresholds;
  int threads = 0;  // 0 until resolved
  std::string threads_source = "default";
  std::uint64_t seed = 1;
  std::string out = "out";
  AugmentationConfig augmentation;

  // volume, depth, map, eval
  std::string sequence;
  int ref = -1;
  std::vector<int> meas;
  double depth_scale = io::kTumDepthScale;
  double tolerance = io::kDefaultAssociationTolerance;
  bool no_refine = false;

  // eval
  std::string pred;
  std::string gt;
  std::string map_dir;

  // synth
  int frames = 20;
  double step = 0.1;
  double plane_depth = 6.0;
  std::string texture = "random";
  int period = 16;
  int max_frequency = 8;

  // sizes: 0 picks the subcommand default
  int width = 0;
  int height = 0;

  // train-toy
  int iterations = 2000;
  double lr = 1e-4;
  int batch = 8;
  int samples = 8;
  std::string width_scale = "1/8";
  double target_l1 = 0.0;
  int decay_every = 0;
  double decay_factor = 0.5;
  bool augment = false;

  // gradcheck
  int parameters = 20;
  double fd_step = 1e-5;
};

// Keys accepted in --config files besides the option names.
const std::set<std::string>& augmentation_keys() {
  static const std::set<std::string> keys = {
      "depth_scale_min", "depth_scale_max", "spatial_scale_min", "spatial_scale_max",
      "flip_probability", "vertical_flip_probability", "noise_sigma", "brightness",
      "contrast", "color"};
  return keys;
}

std::string config_key(const CLI::Option* opt) {
  std::string key = opt->get_single_name();
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  return key;
}

depthnet::Rational parse_rational(const std::string& text, const char* field) {
  depthnet::Rational r;
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    r.num = std::stoi(text.substr(0, slash), &used);
    if (used != (slash == std::string::npos ? text.size() : slash)) throw std::invalid_argument("");
    if (slash != std::string::npos) {
      const std::string den = text.substr(slash + 1);
      r.den = std::stoi(den, &used);
      if (used != den.size()) throw std::invalid_argument("");
    }
  } catch (const std::exception&) {
    throw UsageError(std::string(field) + ": expected a ratio such as 1/8, got '" + text + "'");
  }
  if (r.num < 1 || r.den < 1) throw UsageError(std::string(field) + ": ratio must be positive");
  return r;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw IoError("write failed for " + path.string());
}

json thresholds_json(const SelectionThresholds& t) {
  return {{"angle_deg", t.angle_deg}, {"baseline_m", t.baseline_m}};
}

json metrics_json(const MetricsReport& r) { return json::parse(to_json(r)); }

json common_json(const RunConfig& c) {
  return {{"dmin", c.d_min},
          {"dmax", c.d_max},
          {"nd", c.n_depth},
          {"estimator", c.estimator},
          {"checkpoint", c.checkpoint},
          {"thresholds", thresholds_json(c.thresholds)},
          {"threads", c.threads},
          {"threads_source", c.threads_source},
          {"seed", c.seed},
          {"out", c.out},
          {"config", c.config_path}};
}

void write_manifest(const RunConfig& c, json specific, const std::vector<std::string>& outputs) {
  json m;
  m["command"] = c.subcommand;
  m["config"] = common_json(c);
  m["parameters"] = std::move(specific);
  m["outputs"] = outputs;
  write_json(m, fs::path(c.out) / "manifest.json");
}

void validate(const RunConfig& c) {
  if (!(c.d_min > 0.0)) throw UsageError("--dmin: must be positive");
  if (!(c.d_max > c.d_min)) throw UsageError("--dmax: must exceed --dmin");
  if (c.n_depth < 2) throw UsageError("--nd: at least 2 depth samples are required");
  if (c.estimator != "classical" && c.estimator != "network") {
    throw UsageError("--estimator: expected 'classical' or 'network', got '" + c.estimator + "'");
  }
  if (c.estimator == "network" && c.checkpoint.empty() &&
      (c.subcommand == "depth" || c.subcommand == "map")) {
    throw UsageError("--checkpoint: required with --estimator network");
  }
  if (!(c.thresholds.angle_deg >= 0.0)) throw UsageError("--angle-deg: must be non-negative");
  if (!(c.thresholds.baseline_m >= 0.0)) throw UsageError("--baseline-m: must be non-negative");
  if (c.threads < 1) throw UsageError("--threads: must be at least 1");
  if (c.out.empty()) throw UsageError("--out: must not be empty");
  if (!(c.depth_scale > 0.0)) throw UsageError("--depth-scale: must be positive");
  if (!(c.tolerance >= 0.0)) throw UsageError("--tolerance: must be non-negative");
  if (c.width < 0 || c.height < 0) throw UsageError("--width/--height: must be positive");
}

// Loads the sequence and the --ref/--meas frames.
struct FrameSet {
  Frame reference;
  std::vector<Frame> measurements;
};

FrameSet load_frame_set(const RunConfig& c) {
  if (c.sequence.empty()) throw UsageError("sequence: a TUM-layout directory is required");
  if (c.ref < 0) throw UsageError("--ref: a reference frame index is required");
  if (c.meas.empty()) throw UsageError("--meas: at least one measurement frame index is required");
  const io::SequenceIndex index = io::load_tum_sequence(c.sequence, c.tolerance);
  const auto n = static_cast<int>(index.entries.size());
  auto check = [&](int i, const char* field) {
    if (i < 0 || i >= n) {
      throw UsageError(std::string(field) + ": index " + std::to_string(i) + " outside [0, " +
                       std::to_string(n - 1) + "]");
    }
  };
  check(c.ref, "--ref");
  FrameSet set;
  set.reference = io::load_frame(index, static_cast<std::size_t>(c.ref));
  for (int m : c.meas) {
    check(m, "--meas");
    if (m == c.ref) throw UsageError("--meas: the reference frame cannot be its own measurement");
    set.measurements.push_back(io::load_frame(index, static_cast<std::size_t>(m)));
  }
  return set;
}

std::unique_ptr<DepthEstimator> make_estimator(const RunConfig& c) {
  if (c.estimator == "network") {
    depthnet::Checkpoint ckpt = depthnet::load_checkpoint(c.checkpoint);
    const int nd = ckpt.network.config().n_depth_samples;
    if (nd != c.n_depth) {
      throw UsageError("--nd: " + std::to_string(c.n_depth) + " does not match the checkpoint (" +
                       std::to_string(nd) + ")");
    }
    return std::make_unique<NetworkEstimator>(std::move(ckpt), c.d_min, c.d_max, c.threads);
  }
  return std::make_unique<ClassicalEstimator>(
      sample_inverse_depths(c.d_min, c.d_max, static_cast<std::size_t>(c.n_depth)), c.threads,
      !c.no_refine);
}

json frame_selection_json(const RunConfig& c) {
  return {{"sequence", c.sequence}, {"ref", c.ref}, {"meas", c.meas}};
}

int cmd_volume(const RunConfig& c, std::ostream& out) {
  const FrameSet set = load_frame_set(c);
  const DepthHypotheses hyp =
      sample_inverse_depths(c.d_min, c.d_max, static_cast<std::size_t>(c.n_depth));
  const CostVolume volume = build_cost_volume(set.reference, set.measurements, hyp, c.threads);
  const fs::path dir(c.out);
  write_cost_volume(volume, dir / "volume.bin", dir / "hypotheses.txt");
  write_manifest(c, frame_selection_json(c), {"volume.bin", "hypotheses.txt"});
  out << "volume " << volume.depth_count() << "x" << volume.height << "x" << volume.width
      << " -> " << (dir / "volume.bin").string() << '\n';
  return kExitOk;
}

int cmd_depth(const RunConfig& c, std::ostream& out) {
  const FrameSet set = load_frame_set(c);
  auto estimator = make_estimator(c);
  const DepthMap depth = estimator->estimate(set.reference, set.measurements);
  const fs::path dir(c.out);
  io::write_depth_pfm(depth, dir / "depth.pfm");
  json params = frame_selection_json(c);
  params["refine"] = !c.no_refine;
  write_manifest(c, params, {"depth.pfm"});
  out << "depth " << depth.count_valid() << "/" << depth.depths.size() << " valid -> "
      << (dir / "depth.pfm").string() << '\n';
  return kExitOk;
}

int cmd_map(const RunConfig& c, std::ostream& out) {
  if (c.sequence.empty()) throw UsageError("sequence: a TUM-layout directory is required");
  const io::SequenceIndex index = io::load_tum_sequence(c.sequence, c.tolerance);
  SequenceMapper mapper(make_estimator(c), c.thresholds);
  const fs::path dir(c.out);
  fs::create_directories(dir / "depth");

  json frames = json::array();
  json timings = json::array();
  double total = 0.0;
  std::size_t produced = 0;
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    const Frame frame = io::load_frame(index, i);
    const FrameResult r = mapper.process_frame(frame);
    json f;
    f["id"] = r.id;
    f["timestamp"] = index.entries[i].timestamp;
    f["selected"] = r.selected;
    f["measurements"] = r.measurement_ids;
    if (r.depth) {
      const std::string rel = "depth/" + r.id + ".pfm";
      io::write_depth_pfm(*r.depth, dir / rel);
      f["depth"] = rel;
      ++produced;
    } else {
      f["depth"] = nullptr;
    }
    frames.push_back(std::move(f));
    timings.push_back({{"id", r.id}, {"seconds", r.seconds}});
    total += r.seconds;
  }

  json summary;
  summary["sequence"] = c.sequence;
  summary["estimator"] = mapper.estimator().name();
  // Selection compares against the last selected keyframe, not the previous
  // input frame; record that choice.
  summary["selection_reference"] = "last_selected_keyframe";
  summary["thresholds"] = thresholds_json(c.thresholds);
  summary["frames"] = std::move(frames);
  write_json(summary, dir / "summary.json");
  write_json({{"frames", std::move(timings)}, {"total_seconds", total}}, dir / "timings.json");
  json params = {{"sequence", c.sequence}, {"refine", !c.no_refine}};
  write_manifest(c, params, {"summary.json", "timings.json", "depth/"});
  out << "map " << index.entries.size() << " frames, " << produced << " depth maps -> "
      << dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  MetricsReport report;
  json params;
  if (!c.pred.empty() || !c.gt.empty()) {
    if (c.pred.empty() || c.gt.empty()) throw UsageError("--pred/--gt: both files are required");
    if (!c.map_dir.empty()) throw UsageError("--map: use either --map or --pred/--gt");
    report = evaluate(io::load_depth_map(c.pred, c.depth_scale),
                      io::load_depth_map(c.gt, c.depth_scale));
    params = {{"pred", c.pred}, {"gt", c.gt}};
  } else {
    if (c.map_dir.empty() || c.sequence.empty()) {
      throw UsageError("eval: give --pred and --gt, or --map and a sequence directory");
    }
    const fs::path map_dir(c.map_dir);
    std::ifstream in(map_dir / "summary.json");
    if (!in) throw IoError("cannot read " + (map_dir / "summary.json").string());
    json summary;
    try {
      summary = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError(std::string("summary.json: ") + e.what());
    }
    const io::SequenceIndex index = io::load_tum_sequence(c.sequence, c.tolerance);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
      by_id[fs::path(index.entries[i].rgb).stem().string()] = i;
    }
    MetricsAccumulator acc;
    std::size_t used = 0;
    for (const json& f : summary.at("frames")) {
      if (f.at("depth").is_null()) continue;
      const std::string id = f.at("id").get<std::string>();
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw FormatError("frame " + id + " is not in the sequence");
      acc.add(io::read_depth_pfm(map_dir / f.at("depth").get<std::string>()),
              io::load_ground_truth(index, it->second, c.depth_scale));
      ++used;
    }
    report = acc.report();
    params = {{"map", c.map_dir}, {"sequence", c.sequence}, {"frames", used}};
  }
  params["depth_scale"] = c.depth_scale;
  write_json(metrics_json(report), fs::path(c.out) / "report.json");
  write_manifest(c, params, {"report.json"});
  out << to_json(report) << '\n';
  return kExitOk;
}

int cmd_train_toy(const RunConfig& c, std::ostream& out) {
  ToyDataConfig dc;
  dc.count = c.samples;
  dc.width = c.width > 0 ? c.width : 64;
  dc.height = c.height > 0 ? c.height : 48;
  dc.n_depth_samples = c.n_depth;
  dc.d_min = c.d_min;
  dc.d_max = c.d_max;
  dc.seed = c.seed;
  if (c.augment) dc.augmentation = c.augmentation;

  depthnet::NetworkConfig nc;
  nc.n_depth_samples = c.n_depth;
  nc.channel_width_scale = parse_rational(c.width_scale, "--width-scale");
  nc.sigmoid_scale = 1.0 / c.d_min;
  if (dc.width % 8 != 0 || dc.height % 8 != 0) {
    throw UsageError("--width/--height: the network needs multiples of 8");
  }
  if (c.samples < 1) throw UsageError("--samples: at least one sample is required");
  if (c.iterations < 1) throw UsageError("--iterations: must be at least 1");
  if (c.batch < 1) throw UsageError("--batch: must be at least 1");
  if (!(c.lr > 0.0)) throw UsageError("--lr: must be positive");

  const ToyDataset data = make_toy_dataset(dc);
  depthnet::NetworkGraph<float> net(nc);
  net.initialize(c.seed);

  depthnet::TrainConfig tc;
  tc.iterations = c.iterations;
  tc.batch_size = c.batch;
  tc.learning_rate = c.lr;
  tc.lr_decay_every = c.decay_every;
  tc.lr_decay_factor = c.decay_factor;
  tc.target_l1_inv = c.target_l1;
  tc.seed = c.seed;
  const depthnet::TrainingLog log = depthnet::train_toy(net, data.samples, tc);
  const double eval_l1 = depthnet::evaluate_l1_inv(net, data.samples);

  const fs::path dir(c.out);
  depthnet::save_checkpoint(net, data.normalization, dir / "checkpoint.mvdn");
  json records = json::array();
  for (const auto& r : log.records) {
    records.push_back({{"iteration", r.iteration},
                       {"loss", r.loss},
                       {"l1_inv", r.l1_inv},
                       {"learning_rate", r.learning_rate}});
  }
  write_json({{"reached_target", log.reached_target},
              {"eval_l1_inv", eval_l1},
              {"records", std::move(records)}},
             dir / "training_log.json");
  json params = {{"iterations", c.iterations},   {"lr", c.lr},
                 {"batch", c.batch},             {"samples", c.samples},
                 {"width", dc.width},            {"height", dc.height},
                 {"width_scale", c.width_scale}, {"target_l1", c.target_l1},
                 {"decay_every", c.decay_every}, {"decay_factor", c.decay_factor},
                 {"augment", c.augment}};
  write_manifest(c, params, {"checkpoint.mvdn", "training_log.json"});
  const auto& first = log.records.front();
  const auto& last = log.records.back();
  out << "train-toy " << log.records.size() << " iterations, loss " << first.loss << " -> "
      << last.loss << ", l1_inv " << first.l1_inv << " -> " << last.l1_inv << " (eval "
      << eval_l1 << ")\n";
  return kExitOk;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  if (c.frames < 1) throw UsageError("--frames: must be at least 1");
  if (!(c.plane_depth > 0.0)) throw UsageError("--plane-depth: must be positive");
  Intrinsics k;
  k.width = c.width > 0 ? c.width : 320;
  k.height = c.height > 0 ? c.height : 256;
  k.fx = k.fy = 0.8 * k.width;
  k.cx = 0.5 * (k.width - 1);
  k.cy = 0.5 * (k.height - 1);

  std::shared_ptr<const Texture> texture;
  if (c.texture == "random") {
    if (c.max_frequency < 1) throw UsageError("--max-frequency: must be at least 1");
    texture = std::make_shared<const Texture>(make_texture(c.seed, 256, c.max_frequency));
  } else if (c.texture == "repetitive") {
    if (c.period < 2 || 256 % c.period != 0) throw UsageError("--period: must divide 256");
    texture = std::make_shared<const Texture>(make_repetitive_texture(c.seed, 256, c.period));
  } else {
    throw UsageError("--texture: expected 'random' or 'repetitive', got '" + c.texture + "'");
  }
  SyntheticScene scene;
  scene.intrinsics = k;
  scene.planes = {fronto_parallel_plane(k, c.plane_depth, texture)};
  scene.trajectory = linear_trajectory(Vec3::Zero(), Vec3(c.step, 0.0, 0.0),
                                       static_cast<std::size_t>(c.frames));
  fs::create_directories(c.out);
  write_tum_sequence(scene, c.out);
  json params = {{"frames", c.frames},   {"step", c.step},       {"width", k.width},
                 {"height", k.height},   {"plane_depth", c.plane_depth},
                 {"texture", c.texture}, {"period", c.period},
                 {"max_frequency", c.max_frequency}};
  write_manifest(c, params,
                 {"rgb/", "depth/", "rgb.txt", "depth.txt", "groundtruth.txt", "intrinsics.txt"});
  out << "synth " << c.frames << " frames -> " << c.out << '\n';
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& c, std::ostream& out) {
  depthnet::GradCheckConfig gc;
  gc.width = c.width > 0 ? c.width : 32;
  gc.height = c.height > 0 ? c.height : 32;
  gc.n_depth_samples = c.n_depth;
  gc.channel_width_scale = parse_rational(c.width_scale, "--width-scale");
  gc.parameters = c.parameters;
  gc.step = c.fd_step;
  gc.seed = c.seed;
  if (gc.parameters < 1) throw UsageError("--parameters: must be at least 1");
  if (!(gc.step > 0.0)) throw UsageError("--fd-step: must be positive");
  if (gc.width % 8 != 0 || gc.height % 8 != 0) {
    throw UsageError("--width/--height: the network needs multiples of 8");
  }
  const depthnet::GradCheckReport report = depthnet::gradient_check(gc);
  const bool pass = report.max_relative_error < depthnet::kGradCheckTolerance;
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"parameter", e.parameter},
                       {"index", e.index},
                       {"analytic", e.analytic},
                       {"numeric", e.numeric},
                       {"relative_error", e.relative_error}});
  }
  write_json({{"max_relative_error", report.max_relative_error},
              {"tolerance", depthnet::kGradCheckTolerance},
              {"pass", pass},
              {"kinks_skipped", report.kinks_skipped},
              {"entries", std::move(entries)}},
             fs::path(c.out) / "gradcheck.json");
  json params = {{"width", gc.width},       {"height", gc.height},
                 {"width_scale", c.width_scale}, {"parameters", gc.parameters},
                 {"fd_step", gc.step}};
  write_manifest(c, params, {"gradcheck.json"});
  out << "gradcheck max relative error " << report.max_relative_error << " over "
      << report.entries.size() << " parameters: " << (pass ? "pass" : "FAIL") << '\n';
  return pass ? kExitOk : kExitData;
}

// Options not given on the command line take their value from the config
// file. --threads sits between the two: MVDEPTH_THREADS beats the file.
void apply_config(CLI::App& app, CLI::App& sub, RunConfig& c, CLI::Option* threads_opt) {
  if (c.config_path.empty()) {
    c.augmentation.seed = c.seed;
    return;
  }
  io::KeyValueConfig file;
  try {
    file = io::KeyValueConfig::load(c.config_path);
  } catch (const Error& e) {
    throw UsageError(std::string("--config: ") + e.what());
  }
  std::set<std::string> known = augmentation_keys();
  for (CLI::App* a : {&app, &sub}) {
    for (CLI::Option* opt : a->get_options()) {
      const std::string key = config_key(opt);
      if (key == "help" || key == "config") continue;
      known.insert(key);
      if (opt->count() > 0 || !file.contains(key)) continue;
      if (opt == threads_opt && std::getenv("MVDEPTH_THREADS") != nullptr) continue;
      try {
        opt->add_result(*file.get(key));
        opt->run_callback();
      } catch (const CLI::Error& e) {
        throw UsageError("--config: key '" + key + "': " + e.what());
      }
      if (opt == threads_opt) c.threads_source = "config";
    }
  }
  for (const auto& [key, value] : file.values()) {
    if (known.count(key) == 0) throw UsageError("--config: unknown key '" + key + "'");
  }
  try {
    c.augmentation = AugmentationConfig::from_config(file);
  } catch (const Error& e) {
    throw UsageError(std::string("--config: ") + e.what());
  }
  if (!file.contains("seed")) c.augmentation.seed = c.seed;
}

void resolve_threads(RunConfig& c, const CLI::Option* threads_opt) {
  // apply_config fills the option too, so check the config source first.
  if (c.threads_source == "config") return;
  if (threads_opt->count() > 0) {
    c.threads_source = "flag";
    return;
  }
  if (const char* env = std::getenv("MVDEPTH_THREADS")) {
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(env, &used);
      if (used != std::string(env).size()) v = 0;
    } catch (const std::exception&) {
      v = 0;
    }
    if (v < 1) throw UsageError("MVDEPTH_THREADS: expected a positive integer");
    c.threads = v;
    c.threads_source = "env";
    return;
  }
  c.threads = resolve_thread_count(0);
}

constexpr const char* kPrecedence =
    "Settings resolve as: command-line flag, then --config file, then built-in default.\n"
    "--threads additionally reads MVDEPTH_THREADS after the flag and before the config file.\n"
    "Exit status: 0 success, 1 usage error, 2 data error.";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Multiview depth estimation toolkit: plane-sweep cost volumes, classical and "
               "learned depth, sequence mapping and evaluation.",
               "mvdepth"};
  app.footer(kPrecedence);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", c.config_path, "Key-value config file (key value per line)");
  app.add_option("--dmin", c.d_min, "Nearest hypothesis depth in meters")->capture_default_str();
  app.add_option("--dmax", c.d_max, "Farthest hypothesis depth in meters")->capture_default_str();
  app.add_option("--nd", c.n_depth, "Number of inverse-depth samples")->capture_default_str();
  app.add_option("--estimator", c.estimator, "classical or network")->capture_default_str();
  app.add_option("--checkpoint", c.checkpoint, "Network checkpoint for --estimator network");
  app.add_option("--angle-deg", c.thresholds.angle_deg, "Keyframe view-angle threshold")
      ->capture_default_str();
  app.add_option("--baseline-m", c.thresholds.baseline_m, "Keyframe baseline threshold")
      ->capture_default_str();
  CLI::Option* threads_opt =
      app.add_option("--threads", c.threads, "Worker threads (default: available cores)");
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();

  auto add_sequence_opts = [&](CLI::App* s) {
    s->add_option("sequence", c.sequence, "TUM-layout sequence directory");
    s->add_option("--tolerance", c.tolerance, "Timestamp association tolerance in seconds")
        ->capture_default_str();
    s->add_option("--depth-scale", c.depth_scale, "Depth PNG units per meter")
        ->capture_default_str();
  };
  auto add_frame_opts = [&](CLI::App* s) {
    s->add_option("--ref", c.ref, "Reference frame index in the sequence");
    s->add_option("--meas", c.meas, "Measurement frame indices, comma separated")
        ->delimiter(',');
  };

  CLI::App* volume = app.add_subcommand("volume", "Build a cost volume and dump it");
  add_sequence_opts(volume);
  add_frame_opts(volume);

  CLI::App* depth = app.add_subcommand("depth", "Estimate the depth of one reference frame");
  add_sequence_opts(depth);
  add_frame_opts(depth);
  depth->add_flag("--no-refine", c.no_refine, "Skip parabolic sub-sample refinement");

  CLI::App* map = app.add_subcommand("map", "Sequence mode with keyframe selection");
  add_sequence_opts(map);
  map->add_flag("--no-refine", c.no_refine, "Skip parabolic sub-sample refinement");

  CLI::App* eval = app.add_subcommand("eval", "Metrics of predicted against ground-truth depth");
  add_sequence_opts(eval);
  eval->add_option("--pred", c.pred, "Predicted depth (.pfm or .png)");
  eval->add_option("--gt", c.gt, "Ground-truth depth (.pfm or .png)");
  eval->add_option("--map", c.map_dir, "Output directory of a map run");

  CLI::App* train = app.add_subcommand("train-toy", "Train the toy network on synthetic pairs");
  train->add_option("--iterations", c.iterations, "Adam iterations")->capture_default_str();
  train->add_option("--lr", c.lr, "Learning rate")->capture_default_str();
  train->add_option("--batch", c.batch, "Batch size")->capture_default_str();
  train->add_option("--samples", c.samples, "Number of synthetic pairs")->capture_default_str();
  train->add_option("--width", c.width, "Sample width (default 64)");
  train->add_option("--height", c.height, "Sample height (default 48)");
  train->add_option("--width-scale", c.width_scale, "Channel width ratio")->capture_default_str();
  train->add_option("--target-l1", c.target_l1, "Stop once training L1-inv is below; 0 never")
      ->capture_default_str();
  train->add_option("--decay-every", c.decay_every, "Step decay period; 0 disables")
      ->capture_default_str();
  train->add_option("--decay-factor", c.decay_factor, "Step decay factor")->capture_default_str();
  train->add_flag("--augment", c.augment, "Apply geometric and photometric augmentation");

  CLI::App* synth = app.add_subcommand("synth", "Render a synthetic TUM-layout sequence");
  synth->add_option("--frames", c.frames, "Number of frames")->capture_default_str();
  synth->add_option("--step", c.step, "Camera translation per frame along x, meters")
      ->capture_default_str();
  synth->add_option("--width", c.width, "Image width (default 320)");
  synth->add_option("--height", c.height, "Image height (default 256)");
  synth->add_option("--plane-depth", c.plane_depth, "Depth of the textured plane")
      ->capture_default_str();
  synth->add_option("--texture", c.texture, "random or repetitive")->capture_default_str();
  synth->add_option("--period", c.period, "Repetition period in texels")->capture_default_str();
  synth->add_option("--max-frequency", c.max_frequency, "Highest texture frequency, cycles per 256 texels")
      ->capture_default_str();

  CLI::App* grad = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  grad->add_option("--width", c.width, "Input width (default 32)");
  grad->add_option("--height", c.height, "Input height (default 32)");
  grad->add_option("--width-scale", c.width_scale, "Channel width ratio")->capture_default_str();
  grad->add_option("--parameters", c.parameters, "Parameter entries to check")
      ->capture_default_str();
  grad->add_option("--fd-step", c.fd_step, "Central difference step")->capture_default_str();

  std::vector<std::string> argv_store{"mvdepth"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  c.subcommand = sub->get_name();
  try {
    apply_config(app, *sub, c, threads_opt);
    resolve_threads(c, threads_opt);
    validate(c);
    fs::create_directories(c.out);
    if (sub == volume) return cmd_volume(c, out);
    if (sub == depth) return cmd_depth(c, out);
    if (sub == map) return cmd_map(c, out);
    if (sub == eval) return cmd_eval(c, out);
    if (sub == train) return cmd_train_toy(c, out);
    if (sub == synth) return cmd_synth(c, out);
    return cmd_gradcheck(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace mvdepth::cli
