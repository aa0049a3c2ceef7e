#include "hhdp/peppf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hhdp/errors.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Log-space convolution: out[a + b] = ⊕ lhs[a] + rhs[b].
std::vector<double> log_convolve(std::span<const double> lhs, std::span<const double> rhs) {
    std::vector<double> out(lhs.size() + rhs.size() - 1, kNegInf);
    for (std::size_t a = 0; a < lhs.size(); ++a) {
        if (lhs[a] == kNegInf) continue;
        for (std::size_t b = 0; b < rhs.size(); ++b) {
            if (rhs[b] == kNegInf) continue;
            out[a + b] = log_add_exp(out[a + b], lhs[a] + rhs[b]);
        }
    }
    return out;
}

// prefixes[k][t] = ln Σ_{ℓ_0..ℓ_{k−1} : Σ = t} ∏ |s(n_r, ℓ_r)| over the first k
// non-zero cells of one dish.
std::vector<std::vector<double>> dish_row_prefixes(std::span<const std::uint64_t> cells) {
    std::vector<std::vector<double>> prefixes{{0.0}};
    for (std::uint64_t n : cells) {
        if (n == 0) continue;
        prefixes.push_back(log_convolve(prefixes.back(), stirling_first_log_row(n)));
    }
    return prefixes;
}

// Per-dish weight over its total table count t:
// β^t (t − 1)! Σ_{ℓ split over rows} ∏_r |s(n_{r,d}, ℓ_{r,d})|.
std::vector<double> dish_weights(const std::vector<double>& row_sum, double log_beta) {
    std::vector<double> w = row_sum;
    w[0] = kNegInf;  // a dish with customers is served at one table at least
    for (std::size_t t = 1; t < w.size(); ++t) {
        if (w[t] != kNegInf) w[t] += static_cast<double>(t) * log_beta + log_factorial(t - 1);
    }
    return w;
}

std::vector<std::uint64_t> column(const GroupedCounts& counts, std::size_t d) {
    std::vector<std::uint64_t> cells(counts.rows());
    for (std::size_t r = 0; r < counts.rows(); ++r) cells[r] = counts.at(r, d);
    return cells;
}

// Forward pass over dishes. prefix[d][T] is the log weight of total table
// count T over dishes [0, d); the dishes couple only through (β₀)_{|ℓ|}.
struct TableTotalDp {
    std::vector<std::vector<double>> prefix;
    std::vector<std::vector<double>> weights;

    double contract(double beta0) const {
        const auto& last = prefix.back();
        double out = kNegInf;
        for (std::size_t t = 1; t < last.size(); ++t) {
            if (last[t] == kNegInf) continue;
            out = log_add_exp(out, last[t] - log_pochhammer(beta0, t));
        }
        return out;
    }
};

TableTotalDp table_total_dp(const GroupedCounts& counts, double log_beta) {
    TableTotalDp dp;
    dp.prefix.push_back({0.0});
    for (std::size_t d = 0; d < counts.cols(); ++d) {
        const auto cells = column(counts, d);
        dp.weights.push_back(dish_weights(dish_row_prefixes(cells).back(), log_beta));
        dp.prefix.push_back(log_convolve(dp.prefix.back(), dp.weights.back()));
    }
    return dp;
}

double log_prefactor(const GroupedCounts& counts, const HdpParams& params) {
    double out = static_cast<double>(counts.cols()) * std::log(params.beta0);
    for (std::uint64_t size : counts.row_totals()) out -= log_pochhammer(params.beta, size);
    return out;
}

}  // namespace

void HdpParams::validate() const {
    if (!positive_finite(beta) || !positive_finite(beta0)) {
        throw DomainError("HDP concentrations must be positive and finite (beta=" +
                          std::to_string(beta) + ", beta0=" + std::to_string(beta0) + ")");
    }
}

void HhdpParams::validate() const {
    if (!positive_finite(alpha)) {
        throw DomainError("alpha must be positive and finite, got " + std::to_string(alpha));
    }
    hdp.validate();
}

double hdp_log_eppf_single(std::span<const std::uint64_t> col_counts, const HdpParams& params) {
    if (col_counts.empty()) throw DomainError("hdp_log_eppf_single: empty frequency vector");
    std::vector<std::uint32_t> row;
    row.reserve(col_counts.size());
    for (std::uint64_t n : col_counts) {
        if (n == 0) throw DomainError("hdp_log_eppf_single: zero frequency");
        row.push_back(static_cast<std::uint32_t>(n));
    }
    return hdp_log_peppf_multi(GroupedCounts({std::move(row)}), params);
}

double hdp_log_peppf_multi(const GroupedCounts& counts, const HdpParams& params) {
    params.validate();
    const TableTotalDp dp = table_total_dp(counts, std::log(params.beta));
    return log_prefactor(counts, params) + dp.contract(params.beta0);
}

double hhdp_log_peppf(const GroupedCounts& counts, const HhdpParams& params) {
    params.validate();
    const auto partitions = enumerate_set_partitions(counts.rows());
    std::vector<double> terms;
    terms.reserve(partitions.size());
    for (const auto& p : partitions) {
        terms.push_back(ewens_log_prob(p, params.alpha) +
                        hdp_log_peppf_multi(merge_counts(counts, p), params.hdp));
    }
    return log_sum_exp(terms);
}

double posterior_degeneracy_prob(const GroupedCounts& counts, const HhdpParams& params) {
    if (counts.rows() != 2) {
        throw ShapeError("posterior_degeneracy_prob: needs exactly two populations, got " +
                         std::to_string(counts.rows()));
    }
    params.validate();
    const double merged = hdp_log_peppf_multi(merge_counts(counts, SetPartition({{0, 1}})),
                                              params.hdp);
    const double split = hdp_log_peppf_multi(counts, params.hdp);
    // 1 / (1 + α Φ₂/Φ₁)
    const double log_odds_against = std::log(params.alpha) + split - merged;
    if (log_odds_against > 0.0) {
        const double e = std::exp(-log_odds_against);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(log_odds_against));
}

std::vector<std::vector<std::uint32_t>> sample_table_counts(const GroupedCounts& counts,
                                                            const HdpParams& params, Rng& rng) {
    params.validate();
    const TableTotalDp dp = table_total_dp(counts, std::log(params.beta));
    const std::size_t D = counts.cols();

    // total |ℓ|
    const auto& last = dp.prefix.back();
    std::vector<double> total_w(last.size(), kNegInf);
    for (std::size_t t = 1; t < last.size(); ++t) {
        if (last[t] != kNegInf) total_w[t] = last[t] - log_pochhammer(params.beta0, t);
    }
    std::size_t remaining = sample_log_categorical(rng, total_w);

    std::vector<std::vector<std::uint32_t>> ell(counts.rows(),
                                                std::vector<std::uint32_t>(D, 0));
    std::vector<double> choice;
    for (std::size_t d = D; d-- > 0;) {
        // per-dish total t_d given the remaining budget
        const auto& prev = dp.prefix[d];
        const auto& w = dp.weights[d];
        choice.assign(w.size(), kNegInf);
        for (std::size_t t = 1; t < w.size(); ++t) {
            if (t <= remaining && remaining - t < prev.size() && w[t] != kNegInf &&
                prev[remaining - t] != kNegInf) {
                choice[t] = w[t] + prev[remaining - t];
            }
        }
        std::size_t t_dish = sample_log_categorical(rng, choice);
        remaining -= t_dish;

        // split t_dish across the non-zero cells of this dish, last cell first
        const auto cells = column(counts, d);
        const auto prefixes = dish_row_prefixes(cells);
        std::vector<std::size_t> rows_with_data;
        for (std::size_t r = 0; r < cells.size(); ++r) {
            if (cells[r] > 0) rows_with_data.push_back(r);
        }
        for (std::size_t k = rows_with_data.size(); k-- > 0;) {
            const std::size_t r = rows_with_data[k];
            const auto srow = stirling_first_log_row(cells[r]);
            const auto& before = prefixes[k];
            choice.assign(srow.size(), kNegInf);
            for (std::size_t l = 1; l < srow.size(); ++l) {
                if (l <= t_dish && t_dish - l < before.size() && before[t_dish - l] != kNegInf) {
                    choice[l] = srow[l] + before[t_dish - l];
                }
            }
            const std::size_t l = sample_log_categorical(rng, choice);
            ell[r][d] = static_cast<std::uint32_t>(l);
            t_dish -= l;
        }
    }
    return ell;
}

std::vector<std::uint32_t> sample_seating(std::uint32_t n, std::uint32_t tables, Rng& rng) {
    if (tables < 1 || tables > n) {
        throw DomainError("sample_seating: need 1 <= tables <= customers");
    }
    // Backward pass: customer m opens its own table with probability
    // |s(m−1, k−1)| / |s(m, k)| given k tables among customers 1..m.
    std::vector<bool> opener(n, false);
    std::uint32_t k = tables;
    for (std::uint32_t m = n; m >= 1; --m) {
        if (k == 0) break;
        if (m == k) {
            for (std::uint32_t i = 0; i < m; ++i) opener[i] = true;
            break;
        }
        const double log_total = stirling_first_log_row(m)[k];
        const double log_new = k >= 1 ? stirling_first_log_row(m - 1)[k - 1] : kNegInf;
        if (std::log(uniform_open(rng)) < log_new - log_total) {
            opener[m - 1] = true;
            --k;
        }
    }
    // Forward pass: non-openers join an existing table with probability
    // proportional to its size.
    std::vector<std::uint32_t> label(n, 0);
    std::vector<std::uint32_t> sizes;
    std::uint32_t seated = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (opener[i]) {
            label[i] = static_cast<std::uint32_t>(sizes.size());
            sizes.push_back(1);
        } else {
            double u = uniform_open(rng) * static_cast<double>(seated);
            std::uint32_t t = 0;
            for (; t + 1 < sizes.size(); ++t) {
                u -= sizes[t];
                if (u <= 0.0) break;
            }
            label[i] = t;
            ++sizes[t];
        }
        ++seated;
    }
    return label;
}

}  // namespace hhdp
