// lattice.hpp
// Truncated site lattice: tangential sites A, normal sites L_S = {s ∉ A,
// |s| ≤ S_max}, and the partition of L_S into blocks [s] of equal frequency.
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <vector>

#include "kamwave/core.hpp"

namespace kamwave {

class SiteLattice {
 public:
  // Blocks are classes of equal lambda (tolerance tol); with the wave
  // frequencies these are exactly the pairs {s,-s} plus singletons.
  SiteLattice(std::vector<int> tangential, int s_max,
              const std::map<int, Real>& lambdas, Real tol = 1e-12)
      : tangential_(std::move(tangential)), s_max_(s_max) {
    std::sort(tangential_.begin(), tangential_.end());
    for (int s = -s_max; s <= s_max; ++s) {
      if (std::binary_search(tangential_.begin(), tangential_.end(), s))
        continue;
      sites_.push_back(s);
    }
    index_.resize(2 * s_max + 1, -1);
    for (int i = 0; i < static_cast<int>(sites_.size()); ++i)
      index_[sites_[i] + s_max] = i;

    // group by lambda
    std::vector<char> used(sites_.size(), 0);
    for (int i = 0; i < static_cast<int>(sites_.size()); ++i) {
      if (used[i]) continue;
      std::vector<int> blk{i};
      used[i] = 1;
      const Real li = lambdas.at(sites_[i]);
      for (int j = i + 1; j < static_cast<int>(sites_.size()); ++j) {
        if (!used[j] && std::abs(lambdas.at(sites_[j]) - li) <= tol) {
          blk.push_back(j);
          used[j] = 1;
        }
      }
      for (int j : blk) block_of_[j] = static_cast<int>(blocks_.size());
      blocks_.push_back(std::move(blk));
    }
  }

  int n_sites() const { return static_cast<int>(sites_.size()); }
  int dim() const { return 2 * n_sites(); }  // two components per site
  int s_max() const { return s_max_; }
  const std::vector<int>& sites() const { return sites_; }
  const std::vector<int>& tangential() const { return tangential_; }
  int site(int idx) const { return sites_[idx]; }
  bool has_site(int s) const {
    return std::abs(s) <= s_max_ && index_[s + s_max_] >= 0;
  }
  int site_index(int s) const { return index_[s + s_max_]; }

  int n_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<int>& block(int b) const { return blocks_[b]; }
  int block_of(int site_idx) const { return block_of_.at(site_idx); }
  int max_block_size() const {
    int d = 0;
    for (const auto& b : blocks_) d = std::max<int>(d, b.size());
    return d;
  }

 private:
  std::vector<int> tangential_;
  int s_max_;
  std::vector<int> sites_;
  std::vector<int> index_;
  std::vector<std::vector<int>> blocks_;
  std::map<int, int> block_of_;
};

using LatticePtr = std::shared_ptr<const SiteLattice>;

}  // namespace kamwave
