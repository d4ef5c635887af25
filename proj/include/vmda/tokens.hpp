#pragma once

#include <cstddef>
#include <vector>

#include "vmda/tensor.hpp"

namespace vmda {

enum class Region { kSearch, kTemplate, kCue };

struct RegionSpan {
  Region kind;
  std::size_t offset;
  std::size_t count;
};

// Encoder input: an (n_tok, H) matrix partitioned into labelled regions.
// The partition is contiguous, covers every row, and holds exactly one
// single-token cue region.
class TokenSequence {
 public:
  TokenSequence(Tensor tokens, std::vector<RegionSpan> regions);

  // Layout [search, template_0, ..., template_k, cue].
  static TokenSequence assemble(const Tensor& search, const std::vector<Tensor>& templates,
                                const Tensor& cue);

  const Tensor& tokens() const { return tokens_; }
  const std::vector<RegionSpan>& regions() const { return regions_; }
  std::size_t width() const { return tokens_.dim(1); }
  std::size_t length() const { return tokens_.dim(0); }

  Tensor region_tokens(std::size_t region) const;
  TokenSequence with_region(std::size_t region, const Tensor& tokens) const;
  TokenSequence with_tokens(Tensor tokens) const;

  std::size_t cue_region() const;
  std::size_t cue_slot_count() const;
  Tensor cue() const;
  TokenSequence with_cue(const Tensor& cue) const;

 private:
  Tensor tokens_;
  std::vector<RegionSpan> regions_;
};

// (n, H) tokens with n a perfect square  <->  (H, s, s) map, token index y*s+x.
Tensor tokens_to_map(const Tensor& tokens);
Tensor map_to_tokens(const Tensor& map);

bool is_perfect_square(std::size_t n);

}  // namespace vmda
