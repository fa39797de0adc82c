#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "swarm/contract/fixed_point.hpp"

namespace swarm::contract {

struct BadConfig : Error {
    explicit BadConfig(const std::string& what) : Error(what) {}
};

struct AlreadyRegistered : Error {
    explicit AlreadyRegistered(const std::string& id) : Error("device already registered: " + id) {}
};

struct Unauthorized : Error {
    explicit Unauthorized(const std::string& id) : Error("caller is not a registered device: " + id) {}
};

struct BadPayload : Error {
    explicit BadPayload(const std::string& what) : Error(what) {}
};

struct SamplingNotMet : Error {
    explicit SamplingNotMet(double fraction)
        : Error("participation " + std::to_string(fraction) + " below the sampling rate"),
          fraction(fraction) {}
    double fraction;
};

/// Per-device registry entry: declared sample count, last uploaded
/// parameters, the 0/1 update flag and the last reported losses.
struct DeviceRecord {
    std::string id;
    std::int64_t data_count = 0;
    FixedPointVector params;
    bool updated = false;
    std::pair<double, double> losses{0.0, 0.0};

    bool operator==(const DeviceRecord&) const = default;
};

/// State of the collaborative-learning contract. Mutated only by applying
/// committed messages in block order; reads return immutable snapshots.
struct ContractState {
    Eigen::Index param_len = 0;
    std::int64_t scale = 0;
    double sampling_rate = 1.0;  // minimum participating fraction p
    double lambda = 1.0;         // aggregation weight
    bool strict_total_count_weights = false;
    std::map<std::string, DeviceRecord> devices;
    FixedPointVector aggregated;
    std::uint64_t round = 0;
    std::int64_t total_count = 0;

    bool operator==(const ContractState&) const = default;
};

/// Deploys the contract. `scale` must be a power of ten in [1e3, 1e9], or 0
/// for the exact (unquantized) encoding.
ContractState init_contract(Eigen::Index param_len, std::int64_t scale, double sampling_rate,
                            double lambda, const Eigen::VectorXd& initial_params);

void register_device(ContractState& state, const std::string& account_id, std::int64_t data_count);

void update_parameter(ContractState& state, const std::string& caller, FixedPointVector params,
                      std::pair<double, double> losses);

/// Weighted aggregation over devices with updated == 1. Weights are each
/// device's data count over the participating total (or over the full
/// registered total when `strict_total_count_weights` is set, in which case
/// absent devices dilute the result). Resets all update flags and advances
/// the round. Throws SamplingNotMet below the sampling-rate gate.
void aggregate_parameters(ContractState& state, const std::string& caller);

struct AggregatedView {
    const FixedPointVector& params;
    std::uint64_t round;
};

AggregatedView query_aggregated(const ContractState& state);

/// Cosine similarity between a candidate upload and the current aggregate,
/// in [-1, 1]; zero-norm inputs score 0. Enforcement policy lives with the
/// caller.
double screen_update(const ContractState& state, const FixedPointVector& candidate);

/// JSON snapshot for inspection tools: configuration, device registry with
/// update flags, round counter and the aggregated integer vector.
std::string state_to_json(const ContractState& state);

}  // namespace swarm::contract
