#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

#include "vmda/ops.hpp"

namespace vmda {

// Bottleneck applied to the cue token: up(gelu(down(c))), H -> H/ratio -> H.
struct FilterParams {
  LinearParams down;
  LinearParams up;
  std::size_t ratio = 4;

  void validate(std::size_t dim) const;
};

FilterParams identity_filter(std::size_t dim);
FilterParams zero_filter(std::size_t dim, std::size_t ratio);

// Capacity-bounded ordered store of cue tokens, oldest first.
class MemoryBank {
 public:
  MemoryBank(std::size_t capacity, std::size_t dim);

  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const Tensor& token(std::size_t i) const { return tokens_.at(i); }
  const std::deque<Tensor>& tokens() const { return tokens_; }

  // Appends, evicting the oldest token once capacity is exceeded.
  void push(const Tensor& token);
  void replace(std::size_t i, Tensor token);
  // Stacked (size, dim) matrix.
  Tensor matrix() const;

  bool operator==(const MemoryBank& other) const;

 private:
  void check_dim(const Tensor& token) const;

  std::size_t capacity_;
  std::size_t dim_;
  std::deque<Tensor> tokens_;
};

// softmax(Q K^T / sqrt(d_k)) V with d_k the key width.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v);

// target_i <- target_i + (softmax(T S^T / sqrt(H)) S)_i, queries from target,
// keys and values from source.
void attn_update(MemoryBank& target, const MemoryBank& source);

struct MemoryConfig {
  std::size_t dim = 768;
  std::size_t short_capacity = 8;
  std::size_t long_capacity = 8;
  std::size_t permanent_capacity = 3;
  std::size_t long_stride = 1;
  std::size_t permanent_stride = 1;
  bool renormalize = false;

  void validate() const;
};

enum class Tier { kShort = 0, kLong = 1, kPermanent = 2 };

struct Retrieval {
  std::array<Tensor, 3> weights;  // softmax(q M_i^T), one distribution per tier
  std::array<Tensor, 3> reads;    // W_i M_i
  Tensor combined;                // sum of the three reads
};

// Three-tier cue memory. Mutable per-sequence state with a single writer.
class MemoryPool {
 public:
  MemoryPool(MemoryConfig config, FilterParams filter);

  // Rebuilds a pool from stored tier contents (snapshot replay).
  static MemoryPool restore(MemoryConfig config, FilterParams filter,
                            const std::array<std::vector<Tensor>, 3>& tiers);

  const MemoryConfig& config() const { return config_; }
  const FilterParams& filter_params() const { return filter_; }
  std::size_t dim() const { return config_.dim; }
  bool initialized() const { return !short_.empty(); }
  std::size_t update_count() const { return updates_; }

  const MemoryBank& bank(Tier tier) const;
  std::array<std::size_t, 3> sizes() const;

  void init(const Tensor& c0);
  void push_short(const Tensor& c);
  // push_short, then long <- short, then permanent <- long (subject to strides).
  void update(const Tensor& c_prev);

  Retrieval retrieve_detail(const Tensor& query) const;
  Tensor retrieve(const Tensor& query) const;
  Tensor filter(const Tensor& c) const;

  bool operator==(const MemoryPool& other) const;

 private:
  void require_initialized() const;
  void renormalize(MemoryBank& bank) const;

  MemoryConfig config_;
  FilterParams filter_;
  MemoryBank short_;
  MemoryBank long_;
  MemoryBank permanent_;
  std::size_t updates_ = 0;
  double norm_sum_ = 0.0;
  std::size_t norm_count_ = 0;
};

}  // namespace vmda
