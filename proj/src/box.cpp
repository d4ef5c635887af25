#include "vmda/box.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vmda/errors.hpp"

namespace vmda {

void require_positive_area(const BoundingBox& b, const char* what) {
  if (!(b.w > 0.0) || !(b.h > 0.0) || !std::isfinite(b.x) || !std::isfinite(b.y) ||
      !std::isfinite(b.w) || !std::isfinite(b.h)) {
    throw ArgumentError(std::string(what) + ": box must be finite with positive width and height");
  }
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return std::max(0.0, iw) * std::max(0.0, ih);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  require_positive_area(a, "iou");
  require_positive_area(b, "iou");
  const double inter = intersection_area(a, b);
  return inter / (a.area() + b.area() - inter);
}

double giou(const BoundingBox& a, const BoundingBox& b) {
  require_positive_area(a, "giou");
  require_positive_area(b, "giou");
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double cw = std::max(a.right(), b.right()) - std::min(a.x, b.x);
  const double ch = std::max(a.bottom(), b.bottom()) - std::min(a.y, b.y);
  const double enclosing = cw * ch;
  return inter / uni - (enclosing - uni) / enclosing;
}

}  // namespace vmda
