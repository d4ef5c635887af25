#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace vmda {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major double tensor. Values are validated finite on construction
// and never change afterwards.
class Tensor {
 public:
  Tensor() : shape_{0} {}
  Tensor(Shape shape, std::vector<double> data);
  explicit Tensor(std::vector<double> vec);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> values() const { return data_; }
  const std::vector<double>& vec() const { return data_; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;
  double at(std::size_t c, std::size_t y, std::size_t x) const;
  double at(std::size_t o, std::size_t i, std::size_t y, std::size_t x) const;

  Tensor reshaped(Shape shape) const;

  // Row r of a rank-2 tensor as a vector.
  Tensor row(std::size_t r) const;

  // Bitwise value equality (including shape).
  bool operator==(const Tensor& other) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace vmda
