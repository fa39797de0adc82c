#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swarm/errors.hpp"

namespace swarm::stats {

enum class UTestMethod : std::uint8_t { ExactEnumeration = 0, NormalApproximation = 1 };

struct UTestResult {
    double u_statistic = 0.0;  // U of the first sample
    double p_value = 1.0;
    UTestMethod method = UTestMethod::ExactEnumeration;
};

/// One-tailed Mann-Whitney U test of H1: values in `a` tend to be smaller
/// than values in `b`. Ranks are averaged over ties. With a pooled size of
/// at most 16 the p value enumerates every assignment of pooled values to
/// the first group; larger samples use the normal approximation with tie
/// correction and continuity correction.
UTestResult mann_whitney_one_tailed(std::span<const double> a, std::span<const double> b);

/// Tie-averaged ranks of the pooled sample (1-based).
std::vector<double> pooled_ranks(std::span<const double> a, std::span<const double> b);

}  // namespace swarm::stats
