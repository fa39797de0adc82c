#include "swarm/stats/timing.hpp"

#include <algorithm>
#include <sstream>

namespace swarm::stats {

TimingTotals timing_report(const TimingLedger& ledger) {
    if (ledger.rounds.size() != ledger.agg_seconds.size())
        throw Error("timing ledger rounds and aggregation entries differ");
    TimingTotals totals;
    totals.init = ledger.init_seconds;
    std::map<std::string, double> per_device_training;
    for (const auto& round : ledger.rounds) {
        double slowest = 0.0;
        for (const auto& [device, t] : round) {
            slowest = std::max(slowest, t.download + t.training + t.upload);
            per_device_training[device] += t.training;
        }
        totals.local_update += slowest;
    }
    for (const double agg : ledger.agg_seconds) totals.aggregate += agg;
    for (const auto& [device, seconds] : per_device_training)
        totals.max_device_training = std::max(totals.max_device_training, seconds);
    totals.total = totals.init + totals.local_update + totals.aggregate;
    return totals;
}

TimingLedger merge_ledgers(const TimingLedger& a, const TimingLedger& b) {
    TimingLedger out = a;
    out.init_seconds += b.init_seconds;
    out.rounds.insert(out.rounds.end(), b.rounds.begin(), b.rounds.end());
    out.agg_seconds.insert(out.agg_seconds.end(), b.agg_seconds.begin(), b.agg_seconds.end());
    return out;
}

std::string timing_to_csv(const TimingTotals& totals) {
    std::ostringstream out;
    out << "metric,seconds\n";
    char line[128];
    std::snprintf(line, sizeof(line), "t_ini,%.6f\n", totals.init);
    out << line;
    std::snprintf(line, sizeof(line), "t_locupdate,%.6f\n", totals.local_update);
    out << line;
    std::snprintf(line, sizeof(line), "t_agg,%.6f\n", totals.aggregate);
    out << line;
    std::snprintf(line, sizeof(line), "t_locupdate_plus_t_agg,%.6f\n", totals.local_update + totals.aggregate);
    out << line;
    std::snprintf(line, sizeof(line), "total,%.6f\n", totals.total);
    out << line;
    std::snprintf(line, sizeof(line), "max_device_training,%.6f\n", totals.max_device_training);
    out << line;
    return out.str();
}

}  // namespace swarm::stats
