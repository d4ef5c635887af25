#include "vmda/tokens.hpp"

#include <cmath>

#include "vmda/errors.hpp"

namespace vmda {

bool is_perfect_square(std::size_t n) {
  const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return s * s == n;
}

TokenSequence::TokenSequence(Tensor tokens, std::vector<RegionSpan> regions)
    : tokens_(std::move(tokens)), regions_(std::move(regions)) {
  if (tokens_.rank() != 2) throw ArgumentError("token sequence must be an (n, H) matrix");
  std::size_t next = 0;
  for (const auto& r : regions_) {
    if (r.offset != next || r.count == 0) {
      throw ArgumentError("token regions must be a contiguous non-empty partition");
    }
    next += r.count;
  }
  if (next != tokens_.dim(0)) throw ArgumentError("token regions do not cover the sequence");
  if (cue_slot_count() != 1) throw InvariantError("token sequence must hold exactly one cue slot");
}

TokenSequence TokenSequence::assemble(const Tensor& search, const std::vector<Tensor>& templates,
                                      const Tensor& cue) {
  if (search.rank() != 2) throw ArgumentError("search tokens must be a matrix");
  const auto h = search.dim(1);
  if (cue.rank() != 1 || cue.size() != h) throw ArgumentError("cue token width mismatch");
  std::vector<double> data(search.vec());
  std::vector<RegionSpan> regions{{Region::kSearch, 0, search.dim(0)}};
  for (const auto& t : templates) {
    if (t.rank() != 2 || t.dim(1) != h) throw ArgumentError("template token width mismatch");
    regions.push_back({Region::kTemplate, data.size() / h, t.dim(0)});
    data.insert(data.end(), t.vec().begin(), t.vec().end());
  }
  regions.push_back({Region::kCue, data.size() / h, 1});
  data.insert(data.end(), cue.vec().begin(), cue.vec().end());
  const auto n = data.size() / h;
  return TokenSequence(Tensor({n, h}, std::move(data)), std::move(regions));
}

Tensor TokenSequence::region_tokens(std::size_t region) const {
  const auto& r = regions_.at(region);
  const auto h = width();
  const auto first = tokens_.vec().begin() + static_cast<std::ptrdiff_t>(r.offset * h);
  return Tensor({r.count, h}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(r.count * h)));
}

TokenSequence TokenSequence::with_region(std::size_t region, const Tensor& tokens) const {
  const auto& r = regions_.at(region);
  if (tokens.shape() != Shape{r.count, width()}) {
    throw ArgumentError("region replacement has shape " + shape_str(tokens.shape()) +
                        ", expected " + shape_str({r.count, width()}));
  }
  std::vector<double> data(tokens_.vec());
  std::copy(tokens.vec().begin(), tokens.vec().end(),
            data.begin() + static_cast<std::ptrdiff_t>(r.offset * width()));
  return TokenSequence(Tensor(tokens_.shape(), std::move(data)), regions_);
}

TokenSequence TokenSequence::with_tokens(Tensor tokens) const {
  if (tokens.shape() != tokens_.shape()) throw ArgumentError("token matrix shape changed");
  return TokenSequence(std::move(tokens), regions_);
}

std::size_t TokenSequence::cue_region() const {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].kind == Region::kCue) return i;
  }
  throw InvariantError("token sequence has no cue slot");
}

std::size_t TokenSequence::cue_slot_count() const {
  std::size_t n = 0;
  for (const auto& r : regions_) {
    if (r.kind == Region::kCue) n += r.count;
  }
  return n;
}

Tensor TokenSequence::cue() const { return region_tokens(cue_region()).reshaped({width()}); }

TokenSequence TokenSequence::with_cue(const Tensor& cue) const {
  return with_region(cue_region(), cue.reshaped({1, width()}));
}

Tensor tokens_to_map(const Tensor& tokens) {
  if (tokens.rank() != 2 || !is_perfect_square(tokens.dim(0))) {
    throw ArgumentError("token count must be a perfect square to form a map, got " +
                        shape_str(tokens.shape()));
  }
  const auto n = tokens.dim(0), h = tokens.dim(1);
  const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  std::vector<double> out(n * h);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < h; ++c) out[c * n + t] = tokens[t * h + c];
  }
  return Tensor({h, s, s}, std::move(out));
}

Tensor map_to_tokens(const Tensor& map) {
  if (map.rank() != 3) throw ArgumentError("map_to_tokens: expected a (C, H, W) map");
  const auto h = map.dim(0), n = map.dim(1) * map.dim(2);
  std::vector<double> out(n * h);
  for (std::size_t c = 0; c < h; ++c) {
    for (std::size_t t = 0; t < n; ++t) out[t * h + c] = map[c * n + t];
  }
  return Tensor({n, h}, std::move(out));
}

}  // namespace vmda
