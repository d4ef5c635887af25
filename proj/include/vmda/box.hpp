#pragma once

namespace vmda {

// Axis-aligned box in pixels; (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  double area() const { return w * h; }

  bool operator==(const BoundingBox&) const = default;
};

// Throws ArgumentError when the box has non-positive width or height.
void require_positive_area(const BoundingBox& b, const char* what);

double intersection_area(const BoundingBox& a, const BoundingBox& b);
double iou(const BoundingBox& a, const BoundingBox& b);
// IoU minus the fraction of the enclosing box not covered by the union.
double giou(const BoundingBox& a, const BoundingBox& b);

}  // namespace vmda
