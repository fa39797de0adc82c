#include "swarm/stats/mann_whitney.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace swarm::stats {

std::vector<double> pooled_ranks(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size() + b.size();
    std::vector<double> values;
    values.reserve(n);
    values.insert(values.end(), a.begin(), a.end());
    values.insert(values.end(), b.begin(), b.end());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // average of ranks i+1 .. j+1
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

namespace {

double u_from_rank_sum(double rank_sum, std::size_t n_a) {
    return rank_sum - 0.5 * static_cast<double>(n_a) * static_cast<double>(n_a + 1);
}

/// Walks every size-`n_a` subset of the pooled ranks and counts assignments
/// whose U statistic is at most `u_observed`.
double exact_p(const std::vector<double>& ranks, std::size_t n_a, double u_observed) {
    const std::size_t n = ranks.size();
    std::vector<std::size_t> pick(n_a);
    std::iota(pick.begin(), pick.end(), 0);
    std::uint64_t total = 0;
    std::uint64_t at_most = 0;
    while (true) {
        double rank_sum = 0.0;
        for (const std::size_t idx : pick) rank_sum += ranks[idx];
        ++total;
        if (u_from_rank_sum(rank_sum, n_a) <= u_observed + 1e-12) ++at_most;

        // next combination in lexicographic order
        std::size_t slot = n_a;
        while (slot > 0 && pick[slot - 1] == n - n_a + slot - 1) --slot;
        if (slot == 0) break;
        --slot;
        ++pick[slot];
        for (std::size_t k = slot + 1; k < n_a; ++k) pick[k] = pick[k - 1] + 1;
    }
    return static_cast<double>(at_most) / static_cast<double>(total);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double approximate_p(const std::vector<double>& ranks, std::size_t n_a, std::size_t n_b,
                     double u_observed) {
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    const double n = na + nb;
    const double mean_u = 0.5 * na * nb;

    // tie correction: subtract sum(t^3 - t) over tie groups
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double var_u = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var_u <= 0.0) return u_observed < mean_u ? 0.0 : 1.0;
    const double z = (u_observed - mean_u + 0.5) / std::sqrt(var_u);
    return normal_cdf(z);
}

}  // namespace

UTestResult mann_whitney_one_tailed(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error("mann-whitney needs two non-empty samples");
    const std::vector<double> ranks = pooled_ranks(a, b);
    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];

    UTestResult result;
    result.u_statistic = u_from_rank_sum(rank_sum_a, a.size());
    if (a.size() + b.size() <= 16) {
        result.method = UTestMethod::ExactEnumeration;
        result.p_value = exact_p(ranks, a.size(), result.u_statistic);
    } else {
        result.method = UTestMethod::NormalApproximation;
        result.p_value = approximate_p(ranks, a.size(), b.size(), result.u_statistic);
    }
    return result;
}

}  // namespace swarm::stats
