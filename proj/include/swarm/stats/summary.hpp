#pragma once

#include <string>
#include <vector>

#include "swarm/stats/mann_whitney.hpp"

namespace swarm::stats {

/// One evaluated cell of the experiment matrix: a scheme's test MSE on one
/// dataset under one fold and seed. `trained_on` distinguishes per-device
/// models (local learning); collaborative schemes leave it empty.
struct MseCell {
    std::string kind;
    int fold = 0;
    int seed = 0;
    std::string scheme;      // "LL", "CL" or "SL"
    std::string trained_on;  // device label for LL rows
    std::string dataset;     // evaluated dataset label
    bool external = false;   // held-out (P_ex) vs participating (P_in)
    double test_mse = 0.0;
};

/// Aggregate of one baseline-vs-SL comparison on one side of the
/// internal/external divide.
struct ComparisonSummary {
    std::string kind;
    bool external = false;
    std::string baseline;       // "LL" or "CL"
    int cells = 0;              // paired comparisons counted
    double sl_best_fraction = 0.0;  // share of cells where SL is strictly lower
    double p_value = 1.0;           // one-tailed, SL smaller
    double sl_mean = 0.0;
    double baseline_mean = 0.0;
    std::string mean_better;  // scheme with the lower mean MSE
};

/// Pairs every SL cell with each baseline cell sharing (kind, fold, seed,
/// dataset, external) and reduces to the percentage-best / p-value /
/// mean-better view, per kind and per internal/external side.
std::vector<ComparisonSummary> summarize_results(const std::vector<MseCell>& cells);

/// CSV with p values printed to three decimals.
std::string summaries_to_csv(const std::vector<ComparisonSummary>& summaries);
std::string cells_to_csv(const std::vector<MseCell>& cells);

}  // namespace swarm::stats
