#include "swarm/stats/summary.hpp"

#include <map>
#include <sstream>
#include <tuple>

namespace swarm::stats {

namespace {

using PairKey = std::tuple<std::string, int, int, std::string, bool>;  // kind, fold, seed, dataset, external

PairKey key_of(const MseCell& c) { return {c.kind, c.fold, c.seed, c.dataset, c.external}; }

}  // namespace

std::vector<ComparisonSummary> summarize_results(const std::vector<MseCell>& cells) {
    std::map<PairKey, std::vector<double>> sl;
    for (const MseCell& c : cells)
        if (c.scheme == "SL") sl[key_of(c)].push_back(c.test_mse);

    // (kind, external, baseline) -> paired (sl, baseline) values
    std::map<std::tuple<std::string, bool, std::string>, std::pair<std::vector<double>, std::vector<double>>>
        buckets;
    for (const MseCell& c : cells) {
        if (c.scheme == "SL") continue;
        const auto it = sl.find(key_of(c));
        if (it == sl.end()) continue;
        auto& [sl_values, base_values] = buckets[{c.kind, c.external, c.scheme}];
        for (const double s : it->second) {
            sl_values.push_back(s);
            base_values.push_back(c.test_mse);
        }
    }

    std::vector<ComparisonSummary> out;
    for (const auto& [key, samples] : buckets) {
        const auto& [sl_values, base_values] = samples;
        ComparisonSummary s;
        s.kind = std::get<0>(key);
        s.external = std::get<1>(key);
        s.baseline = std::get<2>(key);
        s.cells = static_cast<int>(sl_values.size());
        int best = 0;
        double sl_sum = 0.0, base_sum = 0.0;
        for (std::size_t i = 0; i < sl_values.size(); ++i) {
            if (sl_values[i] < base_values[i]) ++best;
            sl_sum += sl_values[i];
            base_sum += base_values[i];
        }
        s.sl_best_fraction = sl_values.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(sl_values.size());
        s.sl_mean = sl_values.empty() ? 0.0 : sl_sum / static_cast<double>(sl_values.size());
        s.baseline_mean = base_values.empty() ? 0.0 : base_sum / static_cast<double>(base_values.size());
        s.mean_better = s.sl_mean < s.baseline_mean ? "SL" : s.baseline;
        s.p_value = sl_values.empty() ? 1.0 : mann_whitney_one_tailed(sl_values, base_values).p_value;
        out.push_back(std::move(s));
    }
    return out;
}

std::string summaries_to_csv(const std::vector<ComparisonSummary>& summaries) {
    std::ostringstream out;
    out << "kind,split,comparison,cells,sl_best_pct,p_value,sl_mean,baseline_mean,mean_better\n";
    for (const ComparisonSummary& s : summaries) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%s,%s vs. SL,%d,%.2f,%.3f,%.8g,%.8g,%s\n", s.kind.c_str(),
                      s.external ? "P_ex" : "P_in", s.baseline.c_str(), s.cells,
                      100.0 * s.sl_best_fraction, s.p_value, s.sl_mean, s.baseline_mean,
                      s.mean_better.c_str());
        out << line;
    }
    return out.str();
}

std::string cells_to_csv(const std::vector<MseCell>& cells) {
    std::ostringstream out;
    out << "kind,fold,seed,scheme,trained_on,dataset,split,test_mse\n";
    for (const MseCell& c : cells) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%d,%d,%s,%s,%s,%s,%.12g\n", c.kind.c_str(), c.fold, c.seed,
                      c.scheme.c_str(), c.trained_on.c_str(), c.dataset.c_str(),
                      c.external ? "P_ex" : "P_in", c.test_mse);
        out << line;
    }
    return out.str();
}

}  // namespace swarm::stats
