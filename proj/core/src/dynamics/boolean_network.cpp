#include "gridt/dynamics/boolean_network.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

#include "gridt/rng.hpp"

namespace gridt::dynamics {

std::size_t BitState::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::size_t BitState::hamming(const BitState& other) const noexcept {
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    c += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  }
  return c;
}

std::uint64_t BitState::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ n_;
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return h ^ (h >> 33);
}

BooleanNetwork::BooleanNetwork(int k, std::vector<std::vector<std::uint32_t>> inputs,
                               std::vector<std::vector<bool>> tables, double bias)
    : k_(k), bias_(bias), inputs_(std::move(inputs)) {
  if (k < 1 || k > kMaxBooleanK) throw std::invalid_argument("BooleanNetwork: K out of range");
  const std::size_t n = inputs_.size();
  if (n < static_cast<std::size_t>(k) + 1) throw std::invalid_argument("BooleanNetwork: N < K + 1");
  if (tables.size() != n) throw std::invalid_argument("BooleanNetwork: one table per node");
  const std::size_t entries = std::size_t{1} << k;
  table_words_ = (entries + 63) / 64;
  tables_.assign(n * table_words_, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& in = inputs_[i];
    if (in.size() != static_cast<std::size_t>(k)) {
      throw std::invalid_argument("BooleanNetwork: node " + std::to_string(i) + " needs K inputs");
    }
    auto sorted = in;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
        std::find(in.begin(), in.end(), i) != in.end() || sorted.back() >= n) {
      throw std::invalid_argument("BooleanNetwork: inputs must be distinct, valid, non-self");
    }
    if (tables[i].size() != entries) {
      throw std::invalid_argument("BooleanNetwork: truth table must have 2^K entries");
    }
    for (std::size_t e = 0; e < entries; ++e) {
      if (tables[i][e]) tables_[i * table_words_ + (e >> 6)] |= std::uint64_t{1} << (e & 63);
    }
  }
}

void BooleanNetwork::step(const BitState& state, BitState& next) const {
  if (next.size() != n()) next = BitState(n());
  for (std::size_t i = 0; i < n(); ++i) {
    std::uint32_t index = 0;
    const auto& in = inputs_[i];
    for (int j = 0; j < k_; ++j) index |= static_cast<std::uint32_t>(state.get(in[j])) << j;
    next.set(i, output(i, index));
  }
}

BitState BooleanNetwork::step(const BitState& state) const {
  BitState next(n());
  step(state, next);
  return next;
}

BooleanNetwork random_boolean_network(std::size_t n, int k, double p, std::uint64_t seed) {
  if (k < 1 || k > kMaxBooleanK) throw std::invalid_argument("random_boolean_network: K out of range");
  if (n < static_cast<std::size_t>(k) + 1) throw std::invalid_argument("random_boolean_network: N < K + 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("random_boolean_network: p must be in [0, 1]");
  Rng rng(seed);
  std::vector<std::vector<std::uint32_t>> inputs(n);
  std::vector<std::vector<bool>> tables(n);
  const std::size_t entries = std::size_t{1} << k;
  for (std::size_t i = 0; i < n; ++i) {
    auto& in = inputs[i];
    while (in.size() < static_cast<std::size_t>(k)) {
      // Draw from the n - 1 other nodes by skipping self.
      auto c = static_cast<std::uint32_t>(rng.below(n - 1));
      if (c >= i) ++c;
      if (std::find(in.begin(), in.end(), c) == in.end()) in.push_back(c);
    }
    tables[i].resize(entries);
    for (std::size_t e = 0; e < entries; ++e) tables[i][e] = rng.bernoulli(p);
  }
  return BooleanNetwork(k, std::move(inputs), std::move(tables), p);
}

BooleanNetwork copy_ring(std::size_t n) {
  std::vector<std::vector<std::uint32_t>> inputs(n);
  std::vector<std::vector<bool>> tables(n, std::vector<bool>{false, true});
  for (std::size_t i = 0; i < n; ++i) inputs[i] = {static_cast<std::uint32_t>((i + n - 1) % n)};
  return BooleanNetwork(1, std::move(inputs), std::move(tables));
}

BitState random_state(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  BitState s(n);
  for (std::size_t i = 0; i < n; ++i) s.set(i, rng() & 1u);
  return s;
}

}  // namespace gridt::dynamics
