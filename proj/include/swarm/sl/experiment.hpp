#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarm/consensus/network.hpp"
#include "swarm/data/preprocess.hpp"
#include "swarm/nn/training.hpp"
#include "swarm/sl/stopping.hpp"
#include "swarm/stats/summary.hpp"
#include "swarm/stats/timing.hpp"

namespace swarm::sl {

enum class Scheme : std::uint8_t { Local = 0, Centralized = 1, Swarm = 2 };
std::string scheme_name(Scheme scheme);

/// Everything one experiment run needs, serializable to and from JSON so a
/// manifest can reproduce it byte for byte.
struct ExperimentConfig {
    data::SeriesKind kind = data::SeriesKind::Gas;

    // consortium topology
    int orgs = 2;
    int nodes_per_org = 2;
    double quorum_fraction = 2.0 / 3.0;

    // dataset pool and cross-validation folds over it
    std::vector<std::string> labels;
    int external_per_fold = 2;
    int folds = 3;
    Eigen::Index series_length = 480;  // 0 = full profile length

    // windowing and chronological splits
    Eigen::Index history = 7;
    Eigen::Index horizon = 1;
    Eigen::Index stride = 1;
    data::WindowMode window_mode = data::WindowMode::Forecast;
    double train_fraction = 0.7;
    double val_fraction = 0.2;
    Eigen::Index trailing_block = 0;  // >0: trailing 2+2 block split (PV)

    // model
    Eigen::Index hidden_dim = 12;
    bool bidirectional = false;
    nn::OutputActivation output_activation = nn::OutputActivation::Identity;

    // local training and the stopping controller
    nn::LocalUpdateConfig local{.local_epochs = 1, .batch_size = 32, .learning_rate = 0.08};
    int e_max = 48;
    StoppingConstants stopping{.e_pre = 8, .switch_criterion = 4, .tolerance = 2, .max_switches = 3,
                               .max_no_effect = 2};

    // on-chain parameters
    std::int64_t scale = 1000000;
    bool disable_quantization = false;
    bool strict_total_count_weights = false;
    double sampling_rate = 1.0;
    double lambda = 1.0;
    double screen_threshold = 0.5;

    // seeds
    std::uint64_t data_seed = 0;
    std::vector<int> model_seeds{0, 1, 2};
    std::vector<int> selseeds{0, 1, 2, 3, 4};

    // data-volume sweep axes
    std::vector<int> device_counts{2, 4, 6};
    std::vector<int> sets_per_device{1, 2, 3};
    int fixed_devices = 2;

    // local-epoch sweep: e_local values with e_local * e_max held constant
    std::vector<int> local_epoch_values{1, 2, 5, 10};
    int epoch_budget = 40;
    int sweep_fold = 1;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Kind-appropriate desk-scale defaults; full-size runs override via JSON.
ExperimentConfig default_config(data::SeriesKind kind);

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

/// Internal/external label split of one fold: external datasets are chosen
/// contiguously by label index.
struct FoldSplit {
    std::vector<std::string> internal;
    std::vector<std::string> external;
};
FoldSplit fold_split(const ExperimentConfig& config, int fold);

/// One device's prepared shard: merged train/val windows over its sites
/// plus per-site test windows for evaluation.
struct DeviceData {
    std::string device_id;
    std::vector<std::string> site_labels;
    nn::TrainBatch train;
    nn::TrainBatch val;
    std::map<std::string, nn::TrainBatch> site_test;  // per owned site
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double learning_rate = 0.0;
};

struct SwarmRunReport {
    int fold = 0;
    int seed = 0;
    std::vector<EpochRecord> epochs;
    int final_epoch = 0;
    double best_val = 0.0;
    Eigen::VectorXd best_weights;
    std::map<std::string, double> internal_test_mse;
    std::map<std::string, double> external_test_mse;
    std::string chain_jsonl;
    std::string contract_state_json;
    std::vector<consensus::CommitLogRow> commit_log;
    stats::TimingLedger timing;
    int stalled_rounds = 0;
    int reselections = 0;
};

struct CentralRunReport {
    int fold = 0;
    int seed = 0;
    std::vector<EpochRecord> epochs;
    int final_epoch = 0;
    Eigen::VectorXd best_weights;
    std::map<std::string, double> internal_test_mse;
    std::map<std::string, double> external_test_mse;
};

struct LocalDeviceReport {
    std::string device_id;
    std::vector<EpochRecord> epochs;
    int final_epoch = 0;
    Eigen::VectorXd best_weights;
    std::map<std::string, double> own_test_mse;       // per owned site
    std::map<std::string, double> external_test_mse;  // per external site
};

/// Executes the ledger-mediated collaborative run: every round the devices
/// pull the aggregated weights through their org's node, train locally,
/// sign upload and aggregate messages, and the consortium commits them.
/// The shared controller halves the learning rate and stops on the
/// data-count-weighted validation loss carried in the committed uploads.
SwarmRunReport run_swarm_learning(const ExperimentConfig& config, int fold, int seed);

/// Same data, controller, seeds and epoch budget with the union of all
/// internal shards trained as one model.
CentralRunReport run_centralized_learning(const ExperimentConfig& config, int fold, int seed);

/// Same again with one isolated model per device.
std::vector<LocalDeviceReport> run_local_learning(const ExperimentConfig& config, int fold, int seed);

struct PrimaryResult {
    std::vector<stats::MseCell> cells;
    std::vector<stats::ComparisonSummary> summaries;
    std::string chain_jsonl;  // fold 0, first seed
    std::vector<consensus::CommitLogRow> commit_log;
    std::string contract_state_json;  // final replica snapshot of that run
    std::string best_weights_csv;     // flat best weight vector, one per line
    stats::TimingTotals sl_timing;
    std::string epochs_csv;
};

/// Folds x seeds x {LL, CL, SL} comparison matrix.
PrimaryResult run_primary_experiment(const ExperimentConfig& config);

struct SweepPoint {
    std::string axis;  // "devices" or "sets_per_device"
    int point = 0;
    int selseed = 0;
    int seed = 0;
    std::string dataset;
    bool external = false;
    double test_mse = 0.0;
};

/// Deletion schedule for the fixed-device axis: step 0 partitions the
/// shuffled pool into `device_count` groups of `max_sets` datasets; each
/// later step deletes one dataset from every group, dropping groups that
/// empty. Steps hold max_sets, max_sets-1, .., 1 datasets per device.
std::vector<std::vector<std::vector<std::string>>> fixed_devices_deletion_path(
    const std::vector<std::string>& labels, int device_count, int max_sets, int selseed);

/// Deletion schedule for the fixed-dataset axis: singleton groups whose
/// count walks down `device_counts` (descending), deleting randomly chosen
/// whole groups between steps.
std::vector<std::vector<std::string>> fixed_sets_deletion_path(const std::vector<std::string>& labels,
                                                               std::vector<int> device_counts,
                                                               int selseed);

struct SweepResult {
    std::vector<SweepPoint> points;
    std::string points_csv;
    std::string summary_csv;  // mean/std per axis point
};

SweepResult run_volume_sweep(const ExperimentConfig& config, int selseed);
SweepResult run_local_epoch_sweep(const ExperimentConfig& config);

struct ScenarioResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Deterministic adversary scenarios: tampering leader, minority and
/// majority dishonest voters, and a client upload screened by cosine
/// similarity against the current aggregate.
std::vector<ScenarioResult> run_fault_scenarios(const ExperimentConfig& config);
std::string scenarios_to_csv(const std::vector<ScenarioResult>& results);

struct ScriptedFaultResult {
    int rounds_committed = 0;
    int rounds_stalled = 0;
    std::vector<consensus::CommitLogRow> commit_log;
};

/// Runs a short collaborative session applying the scripted per-round
/// fault injections. Stalled rounds are recorded and retried as the next
/// block rather than aborting the run.
ScriptedFaultResult run_scripted_faults(const ExperimentConfig& config,
                                        const std::vector<consensus::FaultEvent>& events, int rounds);

}  // namespace swarm::sl
