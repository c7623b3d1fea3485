#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pae/error.hpp"
#include "pae/random.hpp"

namespace pae {

// Assignment of samples (by position) to k partitions.
struct FoldPlan {
  std::uint64_t seed = 0;
  int k = 5;
  std::vector<int> assignment;

  std::vector<std::size_t> test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
    for (int a : assignment) ++out[static_cast<std::size_t>(a)];
    return out;
  }
};

// Seeded shuffle, then round-robin assignment, so partition sizes differ by at
// most one.
inline FoldPlan make_folds(std::size_t count, int k, std::uint64_t seed) {
  if (k < 2) fail_config("fold count must be at least 2");
  if (count < static_cast<std::size_t>(k)) fail_data("fewer samples than folds");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  FoldPlan plan{seed, k, std::vector<int>(count, 0)};
  for (std::size_t pos = 0; pos < count; ++pos) plan.assignment[order[pos]] = static_cast<int>(pos % k);
  return plan;
}

inline FoldPlan make_folds(const std::vector<std::string>& ids, int k, std::uint64_t seed) {
  return make_folds(ids.size(), k, seed);
}

}  // namespace pae
