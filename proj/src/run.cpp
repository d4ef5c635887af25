#include "vmda/run.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "vmda/errors.hpp"
#include "vmda/formats.hpp"
#include "vmda/params_io.hpp"

namespace vmda {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKnownKeys = {
    "format_version",        "seed",
    "scene.source",          "scene.sequences",       "scene.width",          "scene.height",
    "scene.channels",        "scene.frames",          "scene.target_w",       "scene.target_h",
    "scene.path",            "scene.start_x",         "scene.start_y",        "scene.velocity_x",
    "scene.velocity_y",      "scene.amplitude_x",     "scene.amplitude_y",    "scene.period",
    "scene.phase",           "scene.occlusions",      "scene.noise_rgb",      "scene.noise_aux",
    "encoder.layers",        "encoder.dim",           "encoder.patch",        "encoder.mlp_ratio",
    "adapters.enabled",      "adapters.params",       "adapters.pool_window", "adapters.decomp_kernel",
    "adapters.mfm_kernel",   "memory.short_capacity", "memory.long_capacity",
    "memory.permanent_capacity", "memory.filter_ratio", "memory.long_stride",
    "memory.permanent_stride",   "memory.renormalize",  "tracker.template_size",
    "tracker.max_templates", "output.dir",            "output.snapshot_every"};

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& out) {
  const auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!v) return;
  std::istringstream is(*v);
  T parsed{};
  is >> parsed;
  if (!is || !(is >> std::ws).eof()) throw ArgumentError("config key '" + key + "' has invalid value '" + *v + "'");
  out = parsed;
}

void read_bool(const pt::ptree& tree, const std::string& key, bool& out) {
  const auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!v) return;
  if (*v == "true" || *v == "1" || *v == "yes") {
    out = true;
  } else if (*v == "false" || *v == "0" || *v == "no") {
    out = false;
  } else {
    throw ArgumentError("config key '" + key + "' expects true/false, got '" + *v + "'");
  }
}

std::vector<synth::OcclusionWindow> parse_occlusions(const std::string& text) {
  std::vector<synth::OcclusionWindow> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        const auto t = std::stoul(item);
        out.push_back({t, t});
      } else {
        out.push_back({std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1))});
      }
    } catch (const std::logic_error&) {
      throw ArgumentError("invalid occlusion window '" + item + "'");
    }
  }
  return out;
}

void check_keys(const pt::ptree& tree, const std::string& prefix) {
  for (const auto& [key, child] : tree) {
    const auto full = prefix.empty() ? key : prefix + "." + key;
    if (!child.empty()) {
      check_keys(child, full);
    } else if (!kKnownKeys.contains(full)) {
      throw ArgumentError("unknown config key '" + full + "'");
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (sequences < 1) throw ArgumentError("scene.sequences must be positive");
  if (snapshot_every < 1) throw ArgumentError("output.snapshot_every must be positive");
  if (tracker.memory.dim != tracker.encoder.dim) {
    throw ArgumentError("memory width must match encoder.dim");
  }
  tracker.validate();
  if (scene_source == "synthetic") {
    scene.validate();
    tracker.validate_frame(scene.height, scene.width);
    if (scene.channels != tracker.encoder.in_channels) {
      throw ArgumentError("scene channels must match the encoder input channels");
    }
  }
}

synth::SceneConfig RunConfig::scene_for(std::size_t i) const {
  auto s = scene;
  s.seed = seed + i;
  return s;
}

RunConfig parse_run_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ArgumentError(std::string("config parse error: ") + e.what());
  }
  check_keys(tree, "");
  int version = kConfigVersion;
  read(tree, "format_version", version);
  if (version != kConfigVersion) {
    throw ArgumentError("unsupported config format_version " + std::to_string(version));
  }
  RunConfig cfg;
  read(tree, "seed", cfg.seed);

  read(tree, "scene.source", cfg.scene_source);
  read(tree, "scene.sequences", cfg.sequences);
  auto& s = cfg.scene;
  read(tree, "scene.width", s.width);
  read(tree, "scene.height", s.height);
  read(tree, "scene.channels", s.channels);
  read(tree, "scene.frames", s.frames);
  read(tree, "scene.target_w", s.target_w);
  read(tree, "scene.target_h", s.target_h);
  std::string path_kind = "linear";
  read(tree, "scene.path", path_kind);
  if (path_kind == "linear") {
    s.path.kind = synth::PathKind::kLinear;
  } else if (path_kind == "sinusoidal") {
    s.path.kind = synth::PathKind::kSinusoidal;
  } else {
    throw ArgumentError("scene.path must be linear or sinusoidal");
  }
  read(tree, "scene.start_x", s.path.start_x);
  read(tree, "scene.start_y", s.path.start_y);
  read(tree, "scene.velocity_x", s.path.velocity_x);
  read(tree, "scene.velocity_y", s.path.velocity_y);
  read(tree, "scene.amplitude_x", s.path.amplitude_x);
  read(tree, "scene.amplitude_y", s.path.amplitude_y);
  read(tree, "scene.period", s.path.period);
  read(tree, "scene.phase", s.path.phase);
  if (auto occ = tree.get_optional<std::string>("scene.occlusions")) s.occlusions = parse_occlusions(*occ);
  read(tree, "scene.noise_rgb", s.noise_rgb);
  read(tree, "scene.noise_aux", s.noise_aux);

  auto& t = cfg.tracker;
  read(tree, "encoder.layers", t.encoder.layers);
  read(tree, "encoder.dim", t.encoder.dim);
  read(tree, "encoder.patch", t.encoder.patch);
  read(tree, "encoder.mlp_ratio", t.encoder.mlp_ratio);
  t.encoder.in_channels = s.channels;
  t.memory.dim = t.encoder.dim;

  read_bool(tree, "adapters.enabled", t.adapters);
  read(tree, "adapters.params", cfg.params_source);
  read(tree, "adapters.pool_window", t.pool_window);
  read(tree, "adapters.decomp_kernel", t.decomp_kernel);
  read(tree, "adapters.mfm_kernel", t.mfm_kernel);

  read(tree, "memory.short_capacity", t.memory.short_capacity);
  read(tree, "memory.long_capacity", t.memory.long_capacity);
  read(tree, "memory.permanent_capacity", t.memory.permanent_capacity);
  read(tree, "memory.filter_ratio", t.filter_ratio);
  read(tree, "memory.long_stride", t.memory.long_stride);
  read(tree, "memory.permanent_stride", t.memory.permanent_stride);
  read_bool(tree, "memory.renormalize", t.memory.renormalize);

  read(tree, "tracker.template_size", t.template_size);
  read(tree, "tracker.max_templates", t.max_templates);

  std::string out_dir = cfg.output_dir.string();
  read(tree, "output.dir", out_dir);
  cfg.output_dir = out_dir;
  read(tree, "output.snapshot_every", cfg.snapshot_every);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  auto cfg = parse_run_config(ss.str());
  // relative paths in the config resolve against the config's directory
  const auto base = path.parent_path();
  if (cfg.output_dir.is_relative()) cfg.output_dir = base / cfg.output_dir;
  if (cfg.scene_source != "synthetic" && fs::path(cfg.scene_source).is_relative()) {
    cfg.scene_source = (base / cfg.scene_source).string();
  }
  if (cfg.params_source != "random" && cfg.params_source != "zero" &&
      fs::path(cfg.params_source).is_relative()) {
    cfg.params_source = (base / cfg.params_source).string();
  }
  return cfg;
}

std::string default_config_text() {
  return R"(format_version = 1
seed = 7

[scene]
source = synthetic
sequences = 1
width = 64
height = 64
channels = 2
frames = 64
target_w = 12
target_h = 12
path = sinusoidal
start_x = 26
start_y = 26
amplitude_x = 14
amplitude_y = 10
period = 40
phase = 0.5
occlusions = 30-33
noise_rgb = 0.05
noise_aux = 0.02

[encoder]
layers = 4
dim = 64
patch = 8
mlp_ratio = 2

[adapters]
enabled = true
params = random
pool_window = 2
decomp_kernel = 3
mfm_kernel = 1

[memory]
short_capacity = 8
long_capacity = 8
permanent_capacity = 3
filter_ratio = 4
long_stride = 1
permanent_stride = 1
renormalize = false

[tracker]
template_size = 32
max_templates = 1

[output]
dir = vmda_out
snapshot_every = 16
)";
}

TrackerParams build_params(const RunConfig& cfg) {
  if (cfg.params_source == "random") return random_params(cfg.tracker, cfg.seed);
  if (cfg.params_source == "zero") return zero_params(cfg.tracker);
  return io::load_params(cfg.params_source, cfg.tracker);
}

namespace {

std::string snapshot_name(std::size_t t) {
  std::ostringstream os;
  os << "frame_" << std::setw(6) << std::setfill('0') << t << ".mem";
  return os.str();
}

std::string sequence_name(std::size_t i) {
  std::ostringstream os;
  os << "seq_" << std::setw(3) << std::setfill('0') << i;
  return os.str();
}

nlohmann::json report_record(const metrics::Report& r) {
  return {{"frames", r.frames},
          {"pr_threshold", r.pr_threshold},
          {"sr_threshold", r.sr_threshold},
          {"precision_rate", r.precision_rate},
          {"success_rate", r.success_rate},
          {"success_auc", r.success_auc},
          {"precision", r.long_term.precision},
          {"recall", r.long_term.recall},
          {"f_score", r.long_term.f_score},
          {"degenerate", r.long_term.degenerate}};
}

}  // namespace

SequenceResult track_one(const RunConfig& cfg, const synth::Sequence& seq, const std::string& name,
                         const fs::path& snapshot_dir) {
  if (seq.frames.empty() || !seq.ground_truth.front()) {
    throw ArgumentError("sequence " + name + " needs a visible target in its first frame");
  }
  Tracker tracker(cfg.tracker, build_params(cfg));
  const auto last = seq.frames.size() - 1;
  const auto boxes = track_sequence(
      tracker, seq.frames, *seq.ground_truth.front(), [&](std::size_t t, const Tracker& tr) {
        if (snapshot_dir.empty()) return;
        if ((t > 0 && t % cfg.snapshot_every == 0) || t == last) {
          io::save_snapshot(snapshot_dir / snapshot_name(t), tr.memory());
        }
      });
  SequenceResult r;
  r.name = name;
  r.ground_truth = seq.ground_truth;
  for (const auto& b : boxes) r.predictions.emplace_back(b);
  r.report = metrics::evaluate(r.predictions, r.ground_truth);
  r.final_memory_sizes = tracker.memory().sizes();
  return r;
}

std::string report_json(const std::vector<SequenceResult>& results) {
  nlohmann::json seqs = nlohmann::json::array();
  double pr = 0, sr = 0, auc = 0, pre = 0, re = 0, f = 0;
  for (const auto& r : results) {
    auto rec = report_record(r.report);
    rec["name"] = r.name;
    rec["memory_sizes"] = r.final_memory_sizes;
    seqs.push_back(rec);
    pr += r.report.precision_rate;
    sr += r.report.success_rate;
    auc += r.report.success_auc;
    pre += r.report.long_term.precision;
    re += r.report.long_term.recall;
    f += r.report.long_term.f_score;
  }
  const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
  nlohmann::json doc = {{"sequences", seqs},
                        {"aggregate",
                         {{"count", results.size()},
                          {"precision_rate", pr / n},
                          {"success_rate", sr / n},
                          {"success_auc", auc / n},
                          {"precision", pre / n},
                          {"recall", re / n},
                          {"f_score", f / n}}}};
  return doc.dump(2) + "\n";
}

std::vector<SequenceResult> execute_run(const RunConfig& cfg, std::size_t jobs) {
  cfg.validate();
  const bool synthetic = cfg.scene_source == "synthetic";
  const std::size_t count = synthetic ? cfg.sequences : 1;
  std::vector<SequenceResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        const auto name = sequence_name(i);
        const auto seq = synthetic ? synth::generate(cfg.scene_for(i))
                                   : io::load_sequence(cfg.scene_source);
        const auto dir = cfg.output_dir / name;
        results[i] = track_one(cfg, seq, name, dir / "snapshots");
        io::save_boxes(dir / "boxes.txt", results[i].predictions);
        io::save_boxes(dir / "groundtruth.txt", results[i].ground_truth);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::clamp<std::size_t>(jobs, 1, count);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  fs::create_directories(cfg.output_dir);
  std::ofstream os(cfg.output_dir / "report.json", std::ios::binary);
  os << report_json(results);
  if (!os) throw std::runtime_error("cannot write report");
  return results;
}

void generate_sequences(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  for (std::size_t i = 0; i < cfg.sequences; ++i) {
    io::save_sequence(out_dir / sequence_name(i), synth::generate(cfg.scene_for(i)));
  }
}

}  // namespace vmda
