#include "hhdp/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hhdp/errors.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp {

SetPartition::SetPartition(std::vector<std::vector<std::size_t>> blocks) {
    std::size_t n = 0;
    for (auto& b : blocks) {
        if (b.empty()) throw DomainError("SetPartition: empty block");
        std::sort(b.begin(), b.end());
        n += b.size();
    }
    std::vector<bool> seen(n, false);
    for (const auto& b : blocks) {
        for (std::size_t i : b) {
            if (i >= n || seen[i]) {
                throw DomainError("SetPartition: blocks must be disjoint and cover {1..n}");
            }
            seen[i] = true;
        }
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    n_ = n;
    blocks_ = std::move(blocks);
}

SetPartition SetPartition::from_labels(std::span<const int> labels) {
    std::map<int, std::size_t> index;
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = index.try_emplace(labels[i], blocks.size());
        if (inserted) blocks.emplace_back();
        blocks[it->second].push_back(i);
    }
    SetPartition p;
    p.n_ = labels.size();
    p.blocks_ = std::move(blocks);  // first-occurrence order is already canonical
    return p;
}

std::vector<std::size_t> SetPartition::block_sizes() const {
    std::vector<std::size_t> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_) out.push_back(b.size());
    return out;
}

std::vector<int> SetPartition::labels() const {
    std::vector<int> out(n_, 0);
    for (std::size_t r = 0; r < blocks_.size(); ++r) {
        for (std::size_t i : blocks_[r]) out[i] = static_cast<int>(r);
    }
    return out;
}

std::string SetPartition::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t r = 0; r < blocks_.size(); ++r) {
        if (r) os << ',';
        os << '{';
        for (std::size_t k = 0; k < blocks_[r].size(); ++k) {
            if (k) os << ',';
            os << blocks_[r][k] + 1;
        }
        os << '}';
    }
    os << '}';
    return os.str();
}

std::uint64_t bell_number(std::size_t n) {
    if (n > 25) throw DomainError("bell_number: n > 25 overflows 64 bits");
    std::vector<std::uint64_t> row{1};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint64_t> next{row.back()};
        for (std::uint64_t v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

std::vector<SetPartition> enumerate_set_partitions(std::size_t J, std::size_t cap) {
    if (J == 0) throw DomainError("enumerate_set_partitions: J must be positive");
    if (J > cap) {
        throw ShapeError("enumerate_set_partitions: J=" + std::to_string(J) +
                         " exceeds the enumeration cap " + std::to_string(cap));
    }
    std::vector<SetPartition> out;
    out.reserve(static_cast<std::size_t>(bell_number(J)));
    // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1])
    std::vector<int> a(J, 0);
    std::vector<int> prefix_max(J, 0);
    for (;;) {
        out.push_back(SetPartition::from_labels(a));
        std::size_t i = J - 1;
        while (i > 0 && a[i] == prefix_max[i - 1] + 1) --i;
        if (i == 0) break;
        ++a[i];
        prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
        for (std::size_t k = i + 1; k < J; ++k) {
            a[k] = 0;
            prefix_max[k] = prefix_max[k - 1];
        }
    }
    return out;
}

double ewens_log_prob(const SetPartition& p, double alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw DomainError("ewens_log_prob: alpha must be positive");
    }
    double out = static_cast<double>(p.num_blocks()) * std::log(alpha) -
                 log_pochhammer(alpha, p.ground_size());
    for (std::size_t m : p.block_sizes()) out += log_factorial(m - 1);
    return out;
}

GroupedCounts::GroupedCounts(std::vector<std::vector<std::uint32_t>> rows) {
    if (rows.empty()) throw ShapeError("GroupedCounts: need at least one row");
    cols_ = rows.front().size();
    if (cols_ == 0) throw ShapeError("GroupedCounts: need at least one column");
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("GroupedCounts: ragged rows");
    }
    rows_ = std::move(rows);
    for (std::uint64_t c : col_totals()) {
        if (c == 0) throw DomainError("GroupedCounts: every column total must be >= 1");
    }
}

std::vector<std::uint64_t> GroupedCounts::row_totals() const {
    std::vector<std::uint64_t> out;
    for (const auto& r : rows_) {
        std::uint64_t s = 0;
        for (auto v : r) s += v;
        out.push_back(s);
    }
    return out;
}

std::vector<std::uint64_t> GroupedCounts::col_totals() const {
    std::vector<std::uint64_t> out(cols_, 0);
    for (const auto& r : rows_) {
        for (std::size_t d = 0; d < cols_; ++d) out[d] += r[d];
    }
    return out;
}

std::uint64_t GroupedCounts::total() const {
    std::uint64_t s = 0;
    for (auto v : row_totals()) s += v;
    return s;
}

GroupedCounts merge_counts(const GroupedCounts& counts, const SetPartition& p) {
    if (p.ground_size() != counts.rows()) {
        throw ShapeError("merge_counts: partition covers " + std::to_string(p.ground_size()) +
                         " populations, counts have " + std::to_string(counts.rows()));
    }
    std::vector<std::vector<std::uint32_t>> merged;
    merged.reserve(p.num_blocks());
    for (const auto& block : p.blocks()) {
        std::vector<std::uint32_t> row(counts.cols(), 0);
        for (std::size_t j : block) {
            for (std::size_t d = 0; d < counts.cols(); ++d) row[d] += counts.at(j, d);
        }
        merged.push_back(std::move(row));
    }
    return GroupedCounts(std::move(merged));
}

}  // namespace hhdp
