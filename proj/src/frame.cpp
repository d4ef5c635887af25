#include "vmda/frame.hpp"

#include <algorithm>
#include <cmath>

#include "vmda/errors.hpp"

namespace vmda {

void Frame::validate() const {
  if (rgb.rank() != 3) throw ArgumentError("frame maps must be (C, H, W)");
  if (rgb.shape() != aux.shape()) {
    throw ArgumentError("frame modalities differ in shape: " + shape_str(rgb.shape()) + " vs " +
                        shape_str(aux.shape()));
  }
}

namespace {
Tensor crop(const Tensor& map, std::size_t top, std::size_t left, std::size_t size) {
  const auto c = map.dim(0);
  std::vector<double> out(c * size * size);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        out[(ch * size + y) * size + x] = map.at(ch, top + y, left + x);
      }
    }
  }
  return Tensor({c, size, size}, std::move(out));
}

std::size_t clamped_origin(double center, std::size_t size, std::size_t extent) {
  const double start = std::floor(center - 0.5 * static_cast<double>(size));
  const double max_start = static_cast<double>(extent - size);
  return static_cast<std::size_t>(std::clamp(start, 0.0, max_start));
}
}  // namespace

Template make_template(const Frame& frame, const BoundingBox& box, std::size_t size) {
  frame.validate();
  require_positive_area(box, "template");
  const auto h = frame.rgb.dim(1), w = frame.rgb.dim(2);
  if (size == 0 || size > h || size > w) {
    throw ArgumentError("template size " + std::to_string(size) + " does not fit the frame");
  }
  const auto top = clamped_origin(box.center_y(), size, h);
  const auto left = clamped_origin(box.center_x(), size, w);
  return {crop(frame.rgb, top, left, size), crop(frame.aux, top, left, size), box};
}

}  // namespace vmda
