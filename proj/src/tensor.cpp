#include "vmda/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "vmda/errors.hpp"

namespace vmda {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw ArgumentError("tensor shape must have at least one axis");
  if (shape_numel(shape_) != data_.size()) {
    throw ArgumentError("tensor shape " + shape_str(shape_) + " does not match " +
                        std::to_string(data_.size()) + " values");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ArgumentError("tensor values must be finite");
  }
}

Tensor::Tensor(std::vector<double> vec) {
  // Delegating with Shape{vec.size()} and std::move(vec) would leave the
  // argument evaluation order to the compiler.
  shape_ = Shape{vec.size()};
  data_ = std::move(vec);
  for (double v : data_) {
    if (!std::isfinite(v)) throw ArgumentError("tensor values must be finite");
  }
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ArgumentError("axis out of range");
  return shape_[axis];
}

double Tensor::at(std::size_t i) const { return data_.at(i); }

double Tensor::at(std::size_t i, std::size_t j) const {
  return data_.at(i * shape_.at(1) + j);
}

double Tensor::at(std::size_t c, std::size_t y, std::size_t x) const {
  return data_.at((c * shape_.at(1) + y) * shape_.at(2) + x);
}

double Tensor::at(std::size_t o, std::size_t i, std::size_t y, std::size_t x) const {
  return data_.at(((o * shape_.at(1) + i) * shape_.at(2) + y) * shape_.at(3) + x);
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ArgumentError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::row(std::size_t r) const {
  if (rank() != 2 || r >= shape_[0]) throw ArgumentError("row index out of range");
  const auto cols = shape_[1];
  return Tensor(std::vector<double>(data_.begin() + r * cols, data_.begin() + (r + 1) * cols));
}

bool Tensor::operator==(const Tensor& other) const {
  if (shape_ != other.shape_) return false;
  // memcmp so that -0.0 and +0.0 are told apart
  return data_.empty() ||
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ArgumentError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace vmda
