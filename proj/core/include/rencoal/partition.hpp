#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rencoal {

/// Assignment of producers 0..N-1 into K disjoint, nonempty groups.
///
/// Indices are 0-based in the API; the text format uses 1-based indices,
/// one group per line, comma separated.
class Partition {
 public:
  Partition() = default;

  /// Validates disjointness, coverage of 0..n_producers-1 and nonempty groups.
  /// Each group is stored sorted ascending; group order is preserved.
  Partition(std::vector<std::vector<std::size_t>> groups, std::size_t n_producers);

  /// K groups of n/K consecutive producers. Requires K | n.
  static Partition equal_blocks(std::size_t n_producers, std::size_t n_groups);

  /// K groups of consecutive producers whose sizes differ by at most one.
  static Partition near_equal_blocks(std::size_t n_producers, std::size_t n_groups);

  static Partition singletons(std::size_t n_producers);

  /// Parses the 1-based text format. N is the largest index seen.
  static Partition parse(std::string_view text);

  std::size_t n_groups() const { return groups_.size(); }
  std::size_t n_producers() const { return n_producers_; }
  const std::vector<std::size_t>& group(std::size_t k) const { return groups_.at(k); }
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
  std::size_t group_size(std::size_t k) const { return groups_.at(k).size(); }
  std::size_t group_of(std::size_t producer) const;

  /// True when all groups have the same size.
  bool is_equal_sized() const;

  std::string to_text() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> owner_;
  std::size_t n_producers_ = 0;
};

}  // namespace rencoal
