#include "rencoal/partition.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

#include "rencoal/errors.hpp"

namespace rencoal {

namespace {
constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
}

Partition::Partition(std::vector<std::vector<std::size_t>> groups, std::size_t n_producers)
    : groups_(std::move(groups)), owner_(n_producers, kUnassigned), n_producers_(n_producers) {
  if (n_producers == 0) detail::throw_invalid("partition: no producers");
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    auto& g = groups_[k];
    if (g.empty()) detail::throw_invalid("partition: group " + std::to_string(k + 1) + " is empty");
    std::sort(g.begin(), g.end());
    for (std::size_t i : g) {
      if (i >= n_producers) {
        detail::throw_invalid("partition: producer index " + std::to_string(i + 1) +
                              " out of range 1.." + std::to_string(n_producers));
      }
      if (owner_[i] != kUnassigned) {
        detail::throw_invalid("partition: producer " + std::to_string(i + 1) +
                              " appears in more than one group");
      }
      owner_[i] = k;
    }
  }
  for (std::size_t i = 0; i < n_producers; ++i) {
    if (owner_[i] == kUnassigned) {
      detail::throw_invalid("partition: producer " + std::to_string(i + 1) + " is not assigned");
    }
  }
}

Partition Partition::equal_blocks(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) detail::throw_invalid("partition: group count must be in [1, N]");
  if (n % k != 0) {
    detail::throw_invalid("partition: N=" + std::to_string(n) + " is not divisible by K=" +
                          std::to_string(k));
  }
  return near_equal_blocks(n, k);
}

Partition Partition::near_equal_blocks(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) detail::throw_invalid("partition: group count must be in [1, N]");
  std::vector<std::vector<std::size_t>> groups(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t next = 0;
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) groups[g].push_back(next++);
  }
  return Partition(std::move(groups), n);
}

Partition Partition::singletons(std::size_t n) { return near_equal_blocks(n, n); }

Partition Partition::parse(std::string_view text) {
  std::vector<std::vector<std::size_t>> groups;
  std::size_t max_index = 0;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::size_t> group;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto first = field.find_first_not_of(" \t");
      const auto last = field.find_last_not_of(" \t");
      if (first == std::string::npos) {
        detail::throw_data("partition text line " + std::to_string(line_no) + ": empty field");
      }
      const std::string_view token(field.data() + first, last - first + 1);
      std::size_t value = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
        detail::throw_data("partition text line " + std::to_string(line_no) +
                           ": invalid producer index '" + std::string(token) + "'");
      }
      max_index = std::max(max_index, value);
      group.push_back(value - 1);
    }
    groups.push_back(std::move(group));
  }
  if (groups.empty()) detail::throw_data("partition text: no groups");
  try {
    return Partition(std::move(groups), max_index);
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
}

std::size_t Partition::group_of(std::size_t producer) const { return owner_.at(producer); }

bool Partition::is_equal_sized() const {
  return std::all_of(groups_.begin(), groups_.end(),
                     [&](const auto& g) { return g.size() == groups_.front().size(); });
}

std::string Partition::to_text() const {
  std::string out;
  for (const auto& g : groups_) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j > 0) out += ',';
      out += std::to_string(g[j] + 1);
    }
    out += '\n';
  }
  return out;
}

}  // namespace rencoal
