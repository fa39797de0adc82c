#pragma once

#include <memory>

#include "swarm/sl/experiment.hpp"

namespace swarm::sl {

/// Device-to-datasets assignment; the primary experiment gives every
/// internal dataset its own device.
using Assignment = std::vector<std::pair<std::string, std::vector<std::string>>>;

Assignment one_device_per_label(const std::vector<std::string>& labels);

/// A site's generated series with feature columns and its local moments.
struct SitePrep {
    std::string label;
    data::SeriesDataset prepared;
    data::NormStats stats;
};

SitePrep load_site(const ExperimentConfig& config, const std::string& label);

/// Pooled per-column moments combined from the sites' local summaries.
data::NormStats pooled_over(const std::vector<SitePrep>& sites);

/// Site scaling as each pipeline prescribes: per-site min-max for forecast
/// kinds, pooled standardization for well logs. Well logs fall back to the
/// site's own moments when no pooled stats are supplied (isolated devices).
data::SeriesDataset normalize_for(const ExperimentConfig& config, const SitePrep& site,
                                  const data::NormStats* pooled);

struct SiteWindows {
    nn::TrainBatch train;
    nn::TrainBatch val;
    nn::TrainBatch test;
};

/// Chronological split then windows per part, so no window crosses a
/// split boundary.
SiteWindows window_site(const ExperimentConfig& config, const data::SeriesDataset& normalized);

nn::GruDims model_dims(const ExperimentConfig& config);
data::WindowSpec window_spec(const ExperimentConfig& config);

std::vector<DeviceData> build_devices(const ExperimentConfig& config, const Assignment& assignment,
                                      const data::NormStats* pooled);

/// Test windows of the held-out sites, normalized the way the evaluating
/// party would: own local stats for forecast kinds, `pooled` for well logs.
std::map<std::string, nn::TrainBatch> external_eval_sets(const ExperimentConfig& config,
                                                         const std::vector<std::string>& external,
                                                         const data::NormStats* pooled);

struct RoundOutcome {
    consensus::CommitResult commit;
    double train_loss = 0.0;  // data-count-weighted means over devices
    double val_loss = 0.0;
    bool aggregated = false;
};

/// One live collaborative run: devices, their shards, the consortium
/// network and the shared stopping controller.
class SwarmSession {
public:
    static SwarmSession create(const ExperimentConfig& config, int fold, int seed);
    static SwarmSession create_with_assignment(const ExperimentConfig& config, int fold, int seed,
                                               const Assignment& assignment);

    /// Executes one global epoch: every device pulls the aggregated
    /// weights through its org's node, trains locally, and broadcasts its
    /// signed upload and aggregate messages; the consortium then commits
    /// the block and the contract aggregates once the sampling gate
    /// passes. Throws on a stalled round.
    RoundOutcome run_round(int epoch);

    Eigen::VectorXd aggregated_weights() const;

    consensus::Network& network() { return *network_; }
    const consensus::Network& network() const { return *network_; }
    const std::vector<DeviceData>& devices() const { return devices_; }
    const nn::GruDims& dims() const { return dims_; }
    StoppingState& controller() { return controller_; }
    stats::TimingLedger& timing() { return timing_; }
    const ExperimentConfig& config() const { return config_; }
    int fold() const { return fold_; }
    int seed() const { return seed_; }
    const std::vector<std::string>& external_labels() const { return external_; }
    const data::NormStats* pooled() const { return pooled_ ? &*pooled_ : nullptr; }

private:
    SwarmSession() = default;

    ExperimentConfig config_;
    int fold_ = 0;
    int seed_ = 0;
    nn::GruDims dims_;
    std::vector<DeviceData> devices_;
    std::vector<chain::Account> accounts_;
    std::vector<std::string> external_;
    std::optional<data::NormStats> pooled_;
    std::unique_ptr<consensus::Network> network_;
    StoppingState controller_;
    stats::TimingLedger timing_;
    std::uint64_t block_slot_ = 0;
};

}  // namespace swarm::sl
