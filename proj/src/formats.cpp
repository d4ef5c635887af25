#include "vmda/formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "vmda/errors.hpp"

namespace vmda::io {

namespace fs = std::filesystem;

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ParseError("malformed number '" + tok + "'", line);
  }
  return v;
}

std::size_t parse_size(const std::string& tok, std::size_t line) {
  std::size_t v = 0;
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError("malformed integer '" + tok + "'", line);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace

void write_boxes(std::ostream& os, const metrics::BoxSequence& boxes) {
  for (std::size_t t = 0; t < boxes.size(); ++t) {
    os << t;
    if (boxes[t]) {
      const auto& b = *boxes[t];
      os << ' ' << format_double(b.x) << ' ' << format_double(b.y) << ' ' << format_double(b.w)
         << ' ' << format_double(b.h);
    } else {
      os << " absent";
    }
    os << '\n';
  }
}

metrics::BoxSequence read_boxes(std::istream& is) {
  metrics::BoxSequence out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto tok = split(line);
    if (parse_size(tok[0], lineno) != out.size()) {
      throw ParseError("frame index " + tok[0] + " out of sequence, expected " +
                       std::to_string(out.size()), lineno);
    }
    if (tok.size() == 2 && tok[1] == "absent") {
      out.emplace_back();
      continue;
    }
    if (tok.size() != 5) throw ParseError("expected 'index x y w h' or 'index absent'", lineno);
    BoundingBox b{parse_double(tok[1], lineno), parse_double(tok[2], lineno),
                  parse_double(tok[3], lineno), parse_double(tok[4], lineno)};
    if (!(b.w > 0.0) || !(b.h > 0.0)) throw ParseError("box must have positive size", lineno);
    out.emplace_back(b);
  }
  return out;
}

void save_boxes(const fs::path& path, const metrics::BoxSequence& boxes) {
  auto os = open_out(path);
  write_boxes(os, boxes);
}

metrics::BoxSequence load_boxes(const fs::path& path) {
  auto is = open_in(path);
  return read_boxes(is);
}

void write_tensor(std::ostream& os, const Tensor& t) {
  os << t.rank();
  for (auto d : t.shape()) os << ' ' << d;
  os << '\n';
  const auto run = t.shape().back();
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << format_double(t[i]) << ((i + 1) % run == 0 ? '\n' : ' ');
  }
}

Tensor read_tensor(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("missing tensor header", 1);
  const auto header = split(line);
  if (header.empty()) throw ParseError("empty tensor header", 1);
  const auto rank = parse_size(header[0], 1);
  if (rank == 0 || header.size() != rank + 1) throw ParseError("tensor header rank mismatch", 1);
  Shape shape;
  for (std::size_t i = 0; i < rank; ++i) shape.push_back(parse_size(header[i + 1], 1));
  std::vector<double> data;
  data.reserve(shape_numel(shape));
  std::size_t lineno = 1;
  while (data.size() < shape_numel(shape) && std::getline(is, line)) {
    ++lineno;
    for (const auto& tok : split(line)) data.push_back(parse_double(tok, lineno));
  }
  if (data.size() != shape_numel(shape)) throw ParseError("tensor value count mismatch", lineno);
  return Tensor(std::move(shape), std::move(data));
}

void write_snapshot(std::ostream& os, const MemoryPool& pool) {
  const auto sizes = pool.sizes();
  os << pool.dim() << ' ' << sizes[0] << ' ' << sizes[1] << ' ' << sizes[2] << '\n';
  for (auto tier : {Tier::kShort, Tier::kLong, Tier::kPermanent}) {
    for (const auto& tok : pool.bank(tier).tokens()) {
      for (std::size_t j = 0; j < tok.size(); ++j) os << (j ? " " : "") << format_double(tok[j]);
      os << '\n';
    }
  }
  const auto& c = pool.config();
  os << "capacity " << c.short_capacity << ' ' << c.long_capacity << ' ' << c.permanent_capacity
     << '\n';
}

void save_snapshot(const fs::path& path, const MemoryPool& pool) {
  auto os = open_out(path);
  write_snapshot(os, pool);
}

Snapshot read_snapshot(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!blank(line)) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("empty snapshot", 0);
  const auto header = split(line);
  if (header.size() != 4) throw ParseError("snapshot header must be 'H N_s N_l N_p'", lineno);
  Snapshot snap;
  snap.dim = parse_size(header[0], lineno);
  for (std::size_t tier = 0; tier < 3; ++tier) {
    const auto count = parse_size(header[tier + 1], lineno);
    for (std::size_t i = 0; i < count; ++i) {
      if (!next_line()) throw ParseError("snapshot ends before all tokens were read", lineno);
      const auto tok = split(line);
      if (tok.size() != snap.dim) {
        throw ParseError("token has " + std::to_string(tok.size()) + " values, expected " +
                         std::to_string(snap.dim), lineno);
      }
      std::vector<double> v;
      for (const auto& s : tok) v.push_back(parse_double(s, lineno));
      snap.tiers[tier].emplace_back(std::move(v));
    }
  }
  if (next_line()) {
    const auto tok = split(line);
    if (tok.size() != 4 || tok[0] != "capacity") throw ParseError("unexpected trailing content", lineno);
    for (std::size_t i = 0; i < 3; ++i) snap.capacities[i] = parse_size(tok[i + 1], lineno);
  }
  return snap;
}

Snapshot load_snapshot(const fs::path& path) {
  auto is = open_in(path);
  return read_snapshot(is);
}

MemoryPool restore_pool(const Snapshot& snap, MemoryConfig config, FilterParams filter) {
  config.dim = snap.dim;
  config.short_capacity = snap.capacities[0];
  config.long_capacity = snap.capacities[1];
  config.permanent_capacity = snap.capacities[2];
  return MemoryPool::restore(config, std::move(filter), snap.tiers);
}

namespace {
std::string frame_name(std::size_t t) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << t << ".tns";
  return os.str();
}
}  // namespace

void save_sequence(const fs::path& dir, const synth::Sequence& seq) {
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "aux");
  save_boxes(dir / "groundtruth.txt", seq.ground_truth);
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    auto rgb = open_out(dir / "rgb" / frame_name(t));
    write_tensor(rgb, seq.frames[t].rgb);
    auto aux = open_out(dir / "aux" / frame_name(t));
    write_tensor(aux, seq.frames[t].aux);
  }
}

synth::Sequence load_sequence(const fs::path& dir) {
  synth::Sequence seq;
  seq.ground_truth = load_boxes(dir / "groundtruth.txt");
  for (std::size_t t = 0; t < seq.ground_truth.size(); ++t) {
    auto rgb = open_in(dir / "rgb" / frame_name(t));
    auto aux = open_in(dir / "aux" / frame_name(t));
    Frame f{read_tensor(rgb), read_tensor(aux), t};
    f.validate();
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace vmda::io
