#pragma once

#include <map>
#include <string>
#include <vector>

#include "swarm/errors.hpp"

namespace swarm::stats {

/// Wall-clock phases of one device within one round, in seconds.
struct DeviceRoundTiming {
    double download = 0.0;
    double training = 0.0;
    double upload = 0.0;
};

/// Phase timings of a whole run: setup, per-round device work, per-round
/// consensus-plus-aggregation cost.
struct TimingLedger {
    double init_seconds = 0.0;
    std::vector<std::map<std::string, DeviceRoundTiming>> rounds;
    std::vector<double> agg_seconds;  // one entry per round
};

struct TimingTotals {
    double init = 0.0;
    double local_update = 0.0;  // sum over rounds of the slowest device's phase total
    double aggregate = 0.0;
    double total = 0.0;
    double max_device_training = 0.0;  // max over devices of their summed training time
};

/// Round-by-round reduction: each round contributes the slowest device's
/// download+training+upload; the total adds setup and aggregation time.
TimingTotals timing_report(const TimingLedger& ledger);

/// Concatenates two runs' ledgers; totals add.
TimingLedger merge_ledgers(const TimingLedger& a, const TimingLedger& b);

std::string timing_to_csv(const TimingTotals& totals);

}  // namespace swarm::stats
