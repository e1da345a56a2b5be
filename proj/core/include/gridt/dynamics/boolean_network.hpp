#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gridt::dynamics {

inline constexpr int kMaxBooleanK = 16;

/// N-bit state packed into 64-bit words, bit i of word i / 64 is node i.
class BitState {
 public:
  BitState() = default;
  explicit BitState(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t count() const noexcept;
  std::size_t hamming(const BitState& other) const noexcept;
  std::uint64_t hash() const noexcept;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const BitState&, const BitState&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Kauffman automaton: node i reads inputs[i] (K distinct, non-self nodes)
/// and outputs bit `index` of its truth table, where bit j of `index` is the
/// value of inputs[i][j].
class BooleanNetwork {
 public:
  /// Throws std::invalid_argument unless every node has exactly K distinct
  /// non-self inputs and a 2^K-entry table.
  BooleanNetwork(int k, std::vector<std::vector<std::uint32_t>> inputs,
                 std::vector<std::vector<bool>> tables, double bias = 0.5);

  std::size_t n() const noexcept { return inputs_.size(); }
  int k() const noexcept { return k_; }
  double bias() const noexcept { return bias_; }
  const std::vector<std::uint32_t>& inputs(std::size_t node) const { return inputs_[node]; }
  bool output(std::size_t node, std::uint32_t index) const {
    return (tables_[node * table_words_ + (index >> 6)] >> (index & 63)) & 1u;
  }
  std::size_t table_size() const noexcept { return std::size_t{1} << k_; }

  /// Synchronous update of every node.
  BitState step(const BitState& state) const;
  void step(const BitState& state, BitState& next) const;

  friend bool operator==(const BooleanNetwork&, const BooleanNetwork&) = default;

 private:
  int k_;
  double bias_;
  std::size_t table_words_;
  std::vector<std::vector<std::uint32_t>> inputs_;
  std::vector<std::uint64_t> tables_;  // n * table_words_
};

/// Uniform wiring and i.i.d. table entries equal to 1 with probability p.
BooleanNetwork random_boolean_network(std::size_t n, int k, double p, std::uint64_t seed);

/// Each node copies its predecessor on a ring of length n (K = 1).
BooleanNetwork copy_ring(std::size_t n);

BitState random_state(std::size_t n, std::uint64_t seed);

}  // namespace gridt::dynamics
