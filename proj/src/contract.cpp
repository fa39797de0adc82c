#include "swarm/contract/contract.hpp"

#include <cmath>
#include <json.hpp>

namespace swarm::contract {

static bool valid_scale(std::int64_t scale) {
    if (scale == 0) return true;
    for (std::int64_t s = 1000; s <= 1000000000; s *= 10)
        if (scale == s) return true;
    return false;
}

ContractState init_contract(Eigen::Index param_len, std::int64_t scale, double sampling_rate,
                            double lambda, const Eigen::VectorXd& initial_params) {
    if (param_len < 1) throw BadConfig("param_len must be at least 1");
    if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) throw BadConfig("sampling rate must lie in (0, 1]");
    if (!valid_scale(scale)) throw BadConfig("scale must be a power of ten in [1e3, 1e9], or 0 for exact");
    if (initial_params.size() != param_len) throw BadConfig("initial parameters have the wrong length");
    ContractState state;
    state.param_len = param_len;
    state.scale = scale;
    state.sampling_rate = sampling_rate;
    state.lambda = lambda;
    state.aggregated = quantize(initial_params, scale);
    return state;
}

void register_device(ContractState& state, const std::string& account_id, std::int64_t data_count) {
    if (state.devices.contains(account_id)) throw AlreadyRegistered(account_id);
    if (data_count < 1) throw BadConfig("data count must be at least 1");
    DeviceRecord rec;
    rec.id = account_id;
    rec.data_count = data_count;
    state.devices.emplace(account_id, std::move(rec));
    state.total_count += data_count;
}

void update_parameter(ContractState& state, const std::string& caller, FixedPointVector params,
                      std::pair<double, double> losses) {
    const auto it = state.devices.find(caller);
    if (it == state.devices.end()) throw Unauthorized(caller);
    if (params.size() != state.param_len) throw BadPayload("parameter length mismatch");
    if (params.scale != state.scale) throw BadPayload("parameter scale mismatch");
    it->second.params = std::move(params);
    it->second.updated = true;  // re-upload in the same round overwrites
    it->second.losses = losses;
}

void aggregate_parameters(ContractState& state, const std::string& caller) {
    if (!state.devices.contains(caller)) throw Unauthorized(caller);
    std::int64_t participating_count = 0;
    std::size_t participating = 0;
    for (const auto& [id, rec] : state.devices) {
        if (rec.updated) {
            participating += 1;
            participating_count += rec.data_count;
        }
    }
    const double fraction =
        state.devices.empty() ? 0.0 : static_cast<double>(participating) / static_cast<double>(state.devices.size());
    if (participating == 0 || fraction + 1e-12 < state.sampling_rate) throw SamplingNotMet(fraction);

    const double denom =
        static_cast<double>(state.strict_total_count_weights ? state.total_count : participating_count);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(state.param_len);
    for (auto& [id, rec] : state.devices) {
        if (!rec.updated) continue;
        sum += (static_cast<double>(rec.data_count) / denom) * dequantize(rec.params);
        rec.updated = false;
    }
    state.aggregated = quantize(state.lambda * sum, state.scale);
    state.round += 1;
}

AggregatedView query_aggregated(const ContractState& state) {
    return {state.aggregated, state.round};
}

std::string state_to_json(const ContractState& state) {
    nlohmann::json j;
    j["param_len"] = state.param_len;
    j["scale"] = state.scale;
    j["sampling_rate"] = state.sampling_rate;
    j["lambda"] = state.lambda;
    j["round"] = state.round;
    j["total_count"] = state.total_count;
    nlohmann::json devices = nlohmann::json::array();
    for (const auto& [id, rec] : state.devices) {
        devices.push_back({{"id", id},
                           {"data_count", rec.data_count},
                           {"updated", rec.updated ? 1 : 0},
                           {"train_loss", rec.losses.first},
                           {"val_loss", rec.losses.second}});
    }
    j["devices"] = std::move(devices);
    j["aggregated"] = {{"scale", state.aggregated.scale}, {"values", state.aggregated.values}};
    return j.dump(2);
}

double screen_update(const ContractState& state, const FixedPointVector& candidate) {
    const Eigen::VectorXd a = dequantize(candidate);
    const Eigen::VectorXd b = dequantize(state.aggregated);
    if (a.size() != b.size()) throw BadPayload("candidate length mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

}  // namespace swarm::contract
