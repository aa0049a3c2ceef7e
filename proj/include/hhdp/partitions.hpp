#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hhdp {

/// Partition of {0, …, n−1} into non-empty blocks. Stored canonically:
/// each block sorted, blocks ordered by their smallest element, so two
/// partitions are equal iff their block lists are equal.
class SetPartition {
public:
    SetPartition() = default;

    /// Validates disjointness and coverage of {0, …, n−1}; canonicalises.
    explicit SetPartition(std::vector<std::vector<std::size_t>> blocks);

    /// Builds the partition induced by arbitrary integer labels.
    static SetPartition from_labels(std::span<const int> labels);

    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
    std::size_t num_blocks() const { return blocks_.size(); }
    std::size_t ground_size() const { return n_; }
    std::vector<std::size_t> block_sizes() const;

    /// Labels 0..R−1 in canonical block order (restricted growth string).
    std::vector<int> labels() const;

    /// 1-based rendering, e.g. {{1,2},{3}}.
    std::string to_string() const;

    friend bool operator==(const SetPartition&, const SetPartition&) = default;
    friend auto operator<=>(const SetPartition&, const SetPartition&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::vector<std::size_t>> blocks_;
};

inline constexpr std::size_t kMaxEnumeratedPartitions = 12;

/// Bell number B(n) via the Bell triangle; exact for n ≤ 25.
std::uint64_t bell_number(std::size_t n);

/// All partitions of {0, …, J−1} in lexicographic restricted-growth order.
std::vector<SetPartition> enumerate_set_partitions(std::size_t J,
                                                   std::size_t cap = kMaxEnumeratedPartitions);

/// Ewens sampling formula: ln[α^R / (α)_J ∏ (m_r − 1)!].
double ewens_log_prob(const SetPartition& p, double alpha);

/// J×D matrix of non-negative frequencies n_{j,d}: rows are populations,
/// columns distinct values (dishes). Every column total must be ≥ 1.
class GroupedCounts {
public:
    GroupedCounts() = default;
    explicit GroupedCounts(std::vector<std::vector<std::uint32_t>> rows);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    std::uint32_t at(std::size_t j, std::size_t d) const { return rows_[j][d]; }
    const std::vector<std::uint32_t>& row(std::size_t j) const { return rows_[j]; }

    std::vector<std::uint64_t> row_totals() const;
    std::vector<std::uint64_t> col_totals() const;
    std::uint64_t total() const;

    friend bool operator==(const GroupedCounts&, const GroupedCounts&) = default;

private:
    std::size_t cols_ = 0;
    std::vector<std::vector<std::uint32_t>> rows_;
};

/// Row r of the result is the column-wise sum of the rows in block r.
GroupedCounts merge_counts(const GroupedCounts& counts, const SetPartition& p);

}  // namespace hhdp
