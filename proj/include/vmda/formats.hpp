#pragma once

// Plain-text file formats.
//
// Box file: one line per frame, `frame_index x y w h`, or `frame_index absent`.
// Tensor file (.tns): first line `rank d0 d1 ...`, then the values with one
//   innermost-axis run per line.
// Memory snapshot: header `H N_s N_l N_p`, then N_s + N_l + N_p lines of H
//   values (short tier oldest first, then long, then permanent), then an
//   optional trailer `capacity C_s C_l C_p`.
// Sequence directory: groundtruth.txt (box file), rgb/NNNNNN.tns, aux/NNNNNN.tns.
//
// All numbers are written in shortest round-trip form.

#include <filesystem>
#include <array>
#include <iosfwd>
#include <stdexcept>
#include <vector>
#include <string>

#include "vmda/memory.hpp"
#include "vmda/metrics.hpp"
#include "vmda/synthgen.hpp"

namespace vmda::io {

// Thrown for malformed input; `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string format_double(double v);

void write_boxes(std::ostream& os, const metrics::BoxSequence& boxes);
metrics::BoxSequence read_boxes(std::istream& is);
void save_boxes(const std::filesystem::path& path, const metrics::BoxSequence& boxes);
metrics::BoxSequence load_boxes(const std::filesystem::path& path);

void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void write_snapshot(std::ostream& os, const MemoryPool& pool);
void save_snapshot(const std::filesystem::path& path, const MemoryPool& pool);

struct Snapshot {
  std::size_t dim = 0;
  std::array<std::vector<Tensor>, 3> tiers;
  std::array<std::size_t, 3> capacities{8, 8, 3};
};

Snapshot read_snapshot(std::istream& is);
Snapshot load_snapshot(const std::filesystem::path& path);
// Rebuilds a pool from a snapshot; the filter is not part of the snapshot.
MemoryPool restore_pool(const Snapshot& snap, MemoryConfig config, FilterParams filter);

void save_sequence(const std::filesystem::path& dir, const synth::Sequence& seq);
synth::Sequence load_sequence(const std::filesystem::path& dir);

}  // namespace vmda::io
