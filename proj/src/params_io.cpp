#include "vmda/params_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vmda/errors.hpp"
#include "vmda/formats.hpp"

namespace vmda::io {

using nlohmann::json;

std::string params_to_json(const TrackerParams& params) {
  auto copy = params;
  json tensors = json::object();
  for_each_tensor(copy, [&](const std::string& name, Tensor& t) {
    tensors[name] = {{"shape", t.shape()}, {"data", t.vec()}};
  });
  json doc = {{"format", "vmda-params"}, {"version", kParamsVersion}, {"tensors", tensors}};
  return doc.dump(1);
}

TrackerParams params_from_json(const std::string& text, const TrackerConfig& cfg) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("parameter file is not valid JSON: ") + e.what(), 0);
  }
  if (doc.value("format", "") != "vmda-params") throw ParseError("not a vmda parameter file", 0);
  if (doc.value("version", 0) != kParamsVersion) {
    throw ParseError("unsupported parameter file version", 0);
  }
  const auto& tensors = doc.at("tensors");
  auto params = zero_params(cfg);
  for_each_tensor(params, [&](const std::string& name, Tensor& t) {
    if (!tensors.contains(name)) throw ParseError("parameter '" + name + "' is missing", 0);
    const auto& entry = tensors.at(name);
    auto shape = entry.at("shape").get<Shape>();
    if (shape != t.shape()) {
      throw ParseError("parameter '" + name + "' has shape " + shape_str(shape) + ", expected " +
                       shape_str(t.shape()), 0);
    }
    t = Tensor(std::move(shape), entry.at("data").get<std::vector<double>>());
  });
  return params;
}

void save_params(const std::filesystem::path& path, const TrackerParams& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << params_to_json(params) << '\n';
}

TrackerParams load_params(const std::filesystem::path& path, const TrackerConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return params_from_json(ss.str(), cfg);
}

}  // namespace vmda::io
