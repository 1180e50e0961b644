#pragma once

// Deterministic pairwise reduction.
//
// A range [begin, end) is split at the largest power of two strictly below
// its length, so every left operand is a power-of-two block and every leaf
// starts at a multiple of kLeafSize relative to the range start. The tree
// depends only on the range length, never on how work is scheduled.

#include <bit>
#include <complex>
#include <cstddef>
#include <span>

namespace ww::detail {

inline constexpr std::size_t kLeafSize = 32;

template <class T, class Leaf>
T pairwise_reduce(std::size_t begin, std::size_t end, Leaf&& leaf) {
  const std::size_t n = end - begin;
  if (n <= kLeafSize) return leaf(begin, end);
  const std::size_t half = std::bit_floor(n - 1);
  T left = pairwise_reduce<T>(begin, begin + half, leaf);
  T right = pairwise_reduce<T>(begin + half, end, leaf);
  return left + right;
}

template <class T>
T pairwise_sum(std::span<const T> values) {
  return pairwise_reduce<T>(0, values.size(), [&](std::size_t b, std::size_t e) {
    T acc{};
    for (std::size_t i = b; i < e; ++i) acc += values[i];
    return acc;
  });
}

}  // namespace ww::detail
