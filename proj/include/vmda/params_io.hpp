#pragma once

// Parameter files are JSON documents:
//   {"format": "vmda-params", "version": 1,
//    "tensors": {"<dotted name>": {"shape": [...], "data": [...]}, ...}}
// Names follow for_each_tensor(); every tensor the config needs must be present.

#include <filesystem>
#include <string>

#include "vmda/tracker.hpp"

namespace vmda::io {

inline constexpr int kParamsVersion = 1;

std::string params_to_json(const TrackerParams& params);
TrackerParams params_from_json(const std::string& text, const TrackerConfig& cfg);

void save_params(const std::filesystem::path& path, const TrackerParams& params);
TrackerParams load_params(const std::filesystem::path& path, const TrackerConfig& cfg);

}  // namespace vmda::io
