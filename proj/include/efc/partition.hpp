#pragma once

// Set partitions of [n] = {1, ..., n} and the split / merge moves between
// them.  Blocks are kept in canonical order: each block sorted increasingly,
// blocks ordered by their least element.  Canonical form gives every state of
// the restricted chain a unique key, and the enumeration order produced by
// enumerate_set_partitions is deterministic (restricted growth strings in
// lexicographic order), so independently built enumerations always agree.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace efc {

// Largest n for which the state space P_[n] may be enumerated.
// Bell(10) = 115975 states keeps generator construction tractable.
inline constexpr int kEnumerationCap = 10;

class SetPartition {
 public:
  // Validates that `blocks` partition {1, ..., n} and canonicalizes.
  SetPartition(int n, std::vector<std::vector<int>> blocks) : n_(n), blocks_(std::move(blocks)) {
    if (n_ < 1) throw std::domain_error("SetPartition: ground set must be non-empty");
    std::vector<char> seen(static_cast<std::size_t>(n_) + 1, 0);
    std::size_t count = 0;
    for (auto& block : blocks_) {
      if (block.empty()) throw std::domain_error("SetPartition: empty block");
      for (int e : block) {
        if (e < 1 || e > n_ || seen[static_cast<std::size_t>(e)])
          throw std::domain_error("SetPartition: blocks must partition [n]");
        seen[static_cast<std::size_t>(e)] = 1;
        ++count;
      }
      std::sort(block.begin(), block.end());
    }
    if (count != static_cast<std::size_t>(n_))
      throw std::domain_error("SetPartition: blocks must cover [n]");
    std::sort(blocks_.begin(), blocks_.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a[0] < b[0]; });
  }

  static SetPartition single_block(int n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 1);
    return SetPartition(n, {std::move(all)});
  }

  static SetPartition singletons(int n) {
    std::vector<std::vector<int>> blocks;
    blocks.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) blocks.push_back({i});
    return SetPartition(n, std::move(blocks));
  }

  int ground_size() const { return n_; }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<int>& block(std::size_t i) const { return blocks_.at(i); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }

  // Textual form "1 3|2" for {{1,3},{2}}.
  std::string str() const {
    std::string out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (b) out += '|';
      for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(blocks_[b][i]);
      }
    }
    return out;
  }

  friend bool operator==(const SetPartition& a, const SetPartition& b) {
    return a.n_ == b.n_ && a.blocks_ == b.blocks_;
  }
  friend bool operator!=(const SetPartition& a, const SetPartition& b) { return !(a == b); }
  friend bool operator<(const SetPartition& a, const SetPartition& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    return a.blocks_ < b.blocks_;
  }

 private:
  int n_;
  std::vector<std::vector<int>> blocks_;
};

// Multiset of block sizes, stored sorted decreasing.
class PartitionShape {
 public:
  explicit PartitionShape(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::domain_error("PartitionShape: needs at least one part");
    for (int s : sizes_)
      if (s < 1) throw std::domain_error("PartitionShape: parts must be >= 1");
    std::sort(sizes_.begin(), sizes_.end(), std::greater<int>());
  }

  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t part_count() const { return sizes_.size(); }
  int total() const { return std::accumulate(sizes_.begin(), sizes_.end(), 0); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(sizes_[i]);
    }
    return out;
  }

  friend bool operator==(const PartitionShape& a, const PartitionShape& b) {
    return a.sizes_ == b.sizes_;
  }
  friend bool operator!=(const PartitionShape& a, const PartitionShape& b) { return !(a == b); }
  friend bool operator<(const PartitionShape& a, const PartitionShape& b) {
    return a.sizes_ < b.sizes_;
  }

 private:
  std::vector<int> sizes_;
};

inline PartitionShape shape_of(const SetPartition& p) {
  std::vector<int> sizes;
  sizes.reserve(p.block_count());
  for (const auto& block : p.blocks()) sizes.push_back(static_cast<int>(block.size()));
  return PartitionShape(std::move(sizes));
}

// All partitions of [n] via restricted growth strings: element i joins block
// a_i with a_i <= 1 + max(a_1..a_{i-1}).  Lexicographic order of the strings;
// block order is automatically canonical.
inline std::vector<SetPartition> enumerate_set_partitions(int n, int cap = kEnumerationCap) {
  if (n < 1) throw std::domain_error("enumerate_set_partitions: n must be >= 1");
  if (n > cap) throw std::domain_error("enumerate_set_partitions: n exceeds enumeration cap");
  std::vector<SetPartition> result;
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> blocks;
  auto recurse = [&](auto&& self, int element, int used) -> void {
    if (element > n) {
      result.emplace_back(n, blocks);
      return;
    }
    for (int b = 0; b <= used; ++b) {
      if (b == used) {
        blocks.emplace_back();
      }
      blocks[static_cast<std::size_t>(b)].push_back(element);
      self(self, element + 1, used + (b == used ? 1 : 0));
      blocks[static_cast<std::size_t>(b)].pop_back();
      if (b == used) blocks.pop_back();
    }
  };
  recurse(recurse, 1, 0);
  return result;
}

// Projection of a partition of [n] onto [m]: intersect blocks with [m] and
// drop what becomes empty.
inline SetPartition restrict_to(const SetPartition& p, int m) {
  if (m < 1 || m > p.ground_size())
    throw std::domain_error("restrict_to: m out of range");
  std::vector<std::vector<int>> blocks;
  for (const auto& block : p.blocks()) {
    std::vector<int> kept;
    for (int e : block)
      if (e <= m) kept.push_back(e);
    if (!kept.empty()) blocks.push_back(std::move(kept));
  }
  return SetPartition(m, std::move(blocks));
}

// Replaces the selected blocks (at least two) by their union.
inline SetPartition merge_blocks(const SetPartition& p, const std::vector<std::size_t>& indices) {
  if (indices.size() < 2) throw std::domain_error("merge_blocks: need at least two blocks");
  std::vector<char> selected(p.block_count(), 0);
  for (std::size_t i : indices) {
    if (i >= p.block_count()) throw std::domain_error("merge_blocks: block index out of range");
    if (selected[i]) throw std::domain_error("merge_blocks: duplicate block index");
    selected[i] = 1;
  }
  std::vector<std::vector<int>> blocks;
  std::vector<int> merged;
  for (std::size_t b = 0; b < p.block_count(); ++b) {
    if (selected[b]) {
      merged.insert(merged.end(), p.block(b).begin(), p.block(b).end());
    } else {
      blocks.push_back(p.block(b));
    }
  }
  blocks.push_back(std::move(merged));
  return SetPartition(p.ground_size(), std::move(blocks));
}

// Splits block `block_index` (elements i_1 < ... < i_k) according to eta, a
// non-trivial partition of [k]: each block C of eta becomes {i_j : j in C}.
inline SetPartition split_block(const SetPartition& p, std::size_t block_index,
                                const SetPartition& eta) {
  if (block_index >= p.block_count())
    throw std::domain_error("split_block: block index out of range");
  const std::vector<int>& target = p.block(block_index);
  int k = static_cast<int>(target.size());
  if (k < 2) throw std::domain_error("split_block: cannot split a singleton block");
  if (eta.ground_size() != k)
    throw std::domain_error("split_block: eta must partition [k] for k = block size");
  if (eta.block_count() < 2) throw std::domain_error("split_block: eta must be non-trivial");
  std::vector<std::vector<int>> blocks;
  for (std::size_t b = 0; b < p.block_count(); ++b)
    if (b != block_index) blocks.push_back(p.block(b));
  for (const auto& piece : eta.blocks()) {
    std::vector<int> image;
    image.reserve(piece.size());
    for (int j : piece) image.push_back(target[static_cast<std::size_t>(j - 1)]);
    blocks.push_back(std::move(image));
  }
  return SetPartition(p.ground_size(), std::move(blocks));
}

struct CoagTransition {
  SetPartition target;
  std::vector<std::size_t> merged;  // indices of the blocks that fused
};

struct SplitTransition {
  SetPartition target;
  std::size_t block_index;
  SetPartition eta;
};

// One transition per subset of size >= 2 of the blocks (simple coagulations
// are the only merge moves with nonzero rate).  Empty when there is a single
// block.
inline std::vector<CoagTransition> coag_transitions(const SetPartition& p) {
  std::vector<CoagTransition> out;
  std::size_t ell = p.block_count();
  if (ell < 2) return out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << ell); ++mask) {
    std::vector<std::size_t> indices;
    for (std::size_t b = 0; b < ell; ++b)
      if (mask & (std::size_t{1} << b)) indices.push_back(b);
    if (indices.size() < 2) continue;
    out.push_back({merge_blocks(p, indices), std::move(indices)});
  }
  return out;
}

// One transition per block of size k >= 2 and per non-trivial eta in P_[k].
inline std::vector<SplitTransition> split_transitions(const SetPartition& p,
                                                      int cap = kEnumerationCap) {
  std::vector<SplitTransition> out;
  for (std::size_t b = 0; b < p.block_count(); ++b) {
    int k = static_cast<int>(p.block(b).size());
    if (k < 2) continue;
    for (auto& eta : enumerate_set_partitions(k, cap)) {
      if (eta.block_count() < 2) continue;
      out.push_back({split_block(p, b, eta), b, eta});
    }
  }
  return out;
}

// Integer partitions of m, parts sorted decreasing, in lexicographically
// decreasing order.
inline std::vector<std::vector<int>> integer_partitions(int m) {
  if (m < 1) throw std::domain_error("integer_partitions: m must be >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  auto recurse = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      self(self, remaining - part, part);
      current.pop_back();
    }
  };
  recurse(recurse, m, m);
  return out;
}

}  // namespace efc
