#include "vmda/memory.hpp"

#include <cmath>

#include "vmda/errors.hpp"

namespace vmda {

namespace {
double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return std::sqrt(s);
}
}  // namespace

void FilterParams::validate(std::size_t dim) const {
  down.validate();
  up.validate();
  if (ratio < 1 || dim % ratio != 0) {
    throw ArgumentError("memory filter ratio " + std::to_string(ratio) + " must divide H = " +
                        std::to_string(dim));
  }
  const auto inner = dim / ratio;
  if (down.in_features() != dim || down.out_features() != inner || up.in_features() != inner ||
      up.out_features() != dim) {
    throw ArgumentError("memory filter layers must map H -> H/r -> H");
  }
}

FilterParams identity_filter(std::size_t dim) {
  return {identity_linear(dim), identity_linear(dim), 1};
}

FilterParams zero_filter(std::size_t dim, std::size_t ratio) {
  if (ratio < 1 || dim % ratio != 0) throw ArgumentError("filter ratio must divide H");
  return {zero_linear(dim / ratio, dim), zero_linear(dim, dim / ratio), ratio};
}

MemoryBank::MemoryBank(std::size_t capacity, std::size_t dim) : capacity_(capacity), dim_(dim) {
  if (capacity_ < 1) throw ArgumentError("memory bank capacity must be positive");
  if (dim_ < 1) throw ArgumentError("memory bank token dimension must be positive");
}

void MemoryBank::check_dim(const Tensor& token) const {
  if (token.rank() != 1 || token.size() != dim_) {
    throw ArgumentError("cue token has shape " + shape_str(token.shape()) + ", expected (" +
                        std::to_string(dim_) + ")");
  }
}

void MemoryBank::push(const Tensor& token) {
  check_dim(token);
  tokens_.push_back(token);
  while (tokens_.size() > capacity_) tokens_.pop_front();
}

void MemoryBank::replace(std::size_t i, Tensor token) {
  check_dim(token);
  tokens_.at(i) = std::move(token);
}

Tensor MemoryBank::matrix() const {
  std::vector<double> data;
  data.reserve(tokens_.size() * dim_);
  for (const auto& t : tokens_) data.insert(data.end(), t.vec().begin(), t.vec().end());
  return Tensor({tokens_.size(), dim_}, std::move(data));
}

bool MemoryBank::operator==(const MemoryBank& other) const {
  return capacity_ == other.capacity_ && dim_ == other.dim_ && tokens_ == other.tokens_;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (q.rank() != 2 || k.rank() != 2 || q.dim(1) != k.dim(1)) {
    throw ArgumentError("attention: query/key width mismatch");
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(k.dim(1)));
  const auto scores = ops::scale(ops::matmul(q, ops::transpose(k)), inv);
  return ops::matmul(ops::softmax(scores, 1), v);
}

void attn_update(MemoryBank& target, const MemoryBank& source) {
  if (source.empty()) throw StateError("attn_update: source bank is empty");
  if (target.empty()) throw StateError("attn_update: target bank is empty");
  if (target.dim() != source.dim()) throw ArgumentError("attn_update: token dimension mismatch");
  const auto keys = source.matrix();
  const auto delta = scaled_dot_attention(target.matrix(), keys, keys);
  for (std::size_t i = 0; i < target.size(); ++i) {
    target.replace(i, ops::add(target.token(i), delta.row(i)));
  }
}

void MemoryConfig::validate() const {
  if (dim < 1) throw ArgumentError("memory: H must be positive");
  if (short_capacity < 1 || long_capacity < 1 || permanent_capacity < 1) {
    throw ArgumentError("memory: tier capacities must be positive");
  }
  if (long_stride < 1 || permanent_stride < 1) {
    throw ArgumentError("memory: update strides must be positive");
  }
}

MemoryPool::MemoryPool(MemoryConfig config, FilterParams filter)
    : config_(config),
      filter_(std::move(filter)),
      short_(config.short_capacity, config.dim),
      long_(config.long_capacity, config.dim),
      permanent_(config.permanent_capacity, config.dim) {
  config_.validate();
  filter_.validate(config_.dim);
}

MemoryPool MemoryPool::restore(MemoryConfig config, FilterParams filter,
                               const std::array<std::vector<Tensor>, 3>& tiers) {
  MemoryPool pool(config, std::move(filter));
  MemoryBank* banks[] = {&pool.short_, &pool.long_, &pool.permanent_};
  for (std::size_t i = 0; i < 3; ++i) {
    if (tiers[i].empty()) throw ArgumentError("memory restore: every tier needs a token");
    if (tiers[i].size() > banks[i]->capacity()) {
      throw ArgumentError("memory restore: tier holds more tokens than its capacity");
    }
    for (const auto& t : tiers[i]) banks[i]->push(t);
  }
  return pool;
}

const MemoryBank& MemoryPool::bank(Tier tier) const {
  switch (tier) {
    case Tier::kShort: return short_;
    case Tier::kLong: return long_;
    case Tier::kPermanent: return permanent_;
  }
  throw ArgumentError("unknown memory tier");
}

std::array<std::size_t, 3> MemoryPool::sizes() const {
  return {short_.size(), long_.size(), permanent_.size()};
}

void MemoryPool::require_initialized() const {
  if (!initialized()) throw StateError("memory pool used before init");
}

void MemoryPool::init(const Tensor& c0) {
  if (initialized() || !long_.empty() || !permanent_.empty()) {
    throw StateError("memory pool is already initialized");
  }
  short_.push(c0);
  long_.push(c0);
  permanent_.push(c0);
  norm_sum_ = l2_norm(c0);
  norm_count_ = 1;
}

void MemoryPool::push_short(const Tensor& c) {
  require_initialized();
  short_.push(c);
  norm_sum_ += l2_norm(c);
  ++norm_count_;
}

void MemoryPool::renormalize(MemoryBank& bank) const {
  const double target = norm_sum_ / static_cast<double>(norm_count_);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const double n = l2_norm(bank.token(i));
    if (n > 0.0) bank.replace(i, ops::scale(bank.token(i), target / n));
  }
}

void MemoryPool::update(const Tensor& c_prev) {
  push_short(c_prev);
  ++updates_;
  if (updates_ % config_.long_stride == 0) {
    attn_update(long_, short_);
    if (config_.renormalize) renormalize(long_);
  }
  if (updates_ % config_.permanent_stride == 0) {
    attn_update(permanent_, long_);
    if (config_.renormalize) renormalize(permanent_);
  }
}

Retrieval MemoryPool::retrieve_detail(const Tensor& query) const {
  require_initialized();
  if (query.rank() != 1 || query.size() != config_.dim) {
    throw ArgumentError("retrieve: query has shape " + shape_str(query.shape()) + ", expected (" +
                        std::to_string(config_.dim) + ")");
  }
  Retrieval out;
  const auto q = query.reshaped({1, config_.dim});
  const MemoryBank* banks[] = {&short_, &long_, &permanent_};
  std::vector<double> combined(config_.dim, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto m = banks[i]->matrix();
    const auto w = ops::softmax(ops::matmul(q, ops::transpose(m)), 1);
    const auto read = ops::matmul(w, m);
    for (std::size_t j = 0; j < config_.dim; ++j) combined[j] += read[j];
    out.weights[i] = w.reshaped({m.dim(0)});
    out.reads[i] = read.reshaped({config_.dim});
  }
  out.combined = Tensor(std::move(combined));
  return out;
}

Tensor MemoryPool::retrieve(const Tensor& query) const { return retrieve_detail(query).combined; }

Tensor MemoryPool::filter(const Tensor& c) const {
  if (c.rank() != 1 || c.size() != config_.dim) {
    throw ArgumentError("memory filter: expected a length-" + std::to_string(config_.dim) +
                        " cue token");
  }
  return ops::linear(ops::gelu(ops::linear(c, filter_.down)), filter_.up);
}

bool MemoryPool::operator==(const MemoryPool& other) const {
  return short_ == other.short_ && long_ == other.long_ && permanent_ == other.permanent_ &&
         updates_ == other.updates_;
}

}  // namespace vmda
