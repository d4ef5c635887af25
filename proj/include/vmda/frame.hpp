#pragma once

#include <cstddef>

#include "vmda/box.hpp"
#include "vmda/tensor.hpp"

namespace vmda {

// One time step of a dual-modality sequence. Both maps are (C, H, W).
struct Frame {
  Tensor rgb;
  Tensor aux;
  std::size_t index = 0;

  void validate() const;
};

// Square template crops of both modalities around the source box.
struct Template {
  Tensor rgb;
  Tensor aux;
  BoundingBox source;
};

// Crops a size x size window centred on the box, shifted to stay inside the frame.
Template make_template(const Frame& frame, const BoundingBox& box, std::size_t size);

}  // namespace vmda
