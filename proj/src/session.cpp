#include "swarm/sl/session.hpp"

#include <chrono>

#include "swarm/rng.hpp"

namespace swarm::sl {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Assignment one_device_per_label(const std::vector<std::string>& labels) {
    Assignment out;
    for (const std::string& label : labels) out.push_back({"dev-" + label, {label}});
    return out;
}

SitePrep load_site(const ExperimentConfig& config, const std::string& label) {
    SitePrep site;
    site.label = label;
    const data::SeriesDataset raw =
        data::gen_series(config.kind, label, config.data_seed, config.series_length);
    site.prepared = data::prepare_features(raw);
    site.stats = data::compute_stats(site.prepared);
    return site;
}

data::NormStats pooled_over(const std::vector<SitePrep>& sites) {
    if (sites.empty()) throw Error("pooled stats over zero sites");
    data::NormStats out = sites.front().stats;
    out.pooled_mean.clear();
    out.pooled_std.clear();
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
        std::vector<data::GroupStats> groups;
        for (const SitePrep& site : sites) {
            const data::ColumnStats& s = site.stats.column(out.columns[c]);
            groups.push_back({site.prepared.rows(), s.mean, s.stddev});
        }
        const auto [mean, stddev] = data::pooled_stats(groups);
        out.pooled_mean.push_back(mean);
        out.pooled_std.push_back(stddev);
    }
    return out;
}

data::SeriesDataset normalize_for(const ExperimentConfig& config, const SitePrep& site,
                                  const data::NormStats* pooled) {
    if (config.kind == data::SeriesKind::WellLog) {
        if (pooled) return data::normalize_standard(site.prepared, *pooled);
        data::NormStats own = site.stats;
        for (const data::ColumnStats& s : site.stats.per_column) {
            own.pooled_mean.push_back(s.mean);
            own.pooled_std.push_back(s.stddev);
        }
        return data::normalize_standard(site.prepared, own);
    }
    return data::normalize_minmax(site.prepared, site.stats);
}

data::WindowSpec window_spec(const ExperimentConfig& config) {
    return {.history = config.history,
            .horizon = config.horizon,
            .stride = config.stride,
            .mode = config.window_mode};
}

SiteWindows window_site(const ExperimentConfig& config, const data::SeriesDataset& normalized) {
    const data::SplitDataset split =
        config.trailing_block > 0
            ? data::split_trailing(normalized, config.trailing_block, 2, 2)
            : data::split_dataset(normalized, config.train_fraction, config.val_fraction);
    const data::WindowSpec spec = window_spec(config);
    return {data::make_windows(split.train, spec), data::make_windows(split.val, spec),
            data::make_windows(split.test, spec)};
}

nn::GruDims model_dims(const ExperimentConfig& config) {
    // derive the feature width from a short generated sample
    ExperimentConfig probe_cfg = config;
    probe_cfg.series_length = std::max<Eigen::Index>(16, config.history + config.horizon + 2);
    const SitePrep probe = load_site(probe_cfg, probe_cfg.labels.at(0));
    nn::GruDims dims;
    dims.input_dim = static_cast<Eigen::Index>(data::model_feature_columns(probe.prepared).size());
    dims.hidden_dim = config.hidden_dim;
    dims.output_dim = config.window_mode == data::WindowMode::Forecast ? config.horizon : config.history;
    dims.bidirectional = config.bidirectional;
    dims.output_activation = config.output_activation;
    return dims;
}

std::vector<DeviceData> build_devices(const ExperimentConfig& config, const Assignment& assignment,
                                      const data::NormStats* pooled) {
    std::vector<DeviceData> devices;
    for (const auto& [device_id, labels] : assignment) {
        DeviceData dev;
        dev.device_id = device_id;
        dev.site_labels = labels;
        std::vector<nn::TrainBatch> trains, vals;
        for (const std::string& label : labels) {
            const SitePrep site = load_site(config, label);
            const SiteWindows windows = window_site(config, normalize_for(config, site, pooled));
            trains.push_back(windows.train);
            vals.push_back(windows.val);
            dev.site_test[label] = windows.test;
        }
        dev.train = nn::merge_batches(trains);
        dev.val = nn::merge_batches(vals);
        if (dev.train.empty()) throw Error("device " + device_id + " has no training windows");
        devices.push_back(std::move(dev));
    }
    return devices;
}

std::map<std::string, nn::TrainBatch> external_eval_sets(const ExperimentConfig& config,
                                                         const std::vector<std::string>& external,
                                                         const data::NormStats* pooled) {
    std::map<std::string, nn::TrainBatch> out;
    for (const std::string& label : external) {
        const SitePrep site = load_site(config, label);
        const SiteWindows windows = window_site(config, normalize_for(config, site, pooled));
        out[label] = windows.test;
    }
    return out;
}

FoldSplit fold_split(const ExperimentConfig& config, int fold) {
    if (fold < 0 || fold >= config.folds) throw Error("fold index out of range");
    const std::size_t per_fold = static_cast<std::size_t>(config.external_per_fold);
    const std::size_t begin = static_cast<std::size_t>(fold) * per_fold;
    if (begin + per_fold > config.labels.size())
        throw Error("fold " + std::to_string(fold) + " exceeds the label pool");
    FoldSplit split;
    for (std::size_t i = 0; i < config.labels.size(); ++i) {
        if (i >= begin && i < begin + per_fold) {
            split.external.push_back(config.labels[i]);
        } else {
            split.internal.push_back(config.labels[i]);
        }
    }
    return split;
}

SwarmSession SwarmSession::create(const ExperimentConfig& config, int fold, int seed) {
    return create_with_assignment(config, fold, seed,
                                  one_device_per_label(fold_split(config, fold).internal));
}

SwarmSession SwarmSession::create_with_assignment(const ExperimentConfig& config, int fold, int seed,
                                                  const Assignment& assignment) {
    const auto setup_start = std::chrono::steady_clock::now();
    SwarmSession s;
    s.config_ = config;
    s.fold_ = fold;
    s.seed_ = seed;
    s.external_ = fold_split(config, fold).external;
    s.dims_ = model_dims(config);

    if (config.kind == data::SeriesKind::WellLog) {
        std::vector<SitePrep> sites;
        for (const auto& [device_id, labels] : assignment)
            for (const std::string& label : labels) sites.push_back(load_site(config, label));
        s.pooled_ = pooled_over(sites);
    }
    s.devices_ = build_devices(config, assignment, s.pooled());

    chain::KeyStore keys;
    for (const DeviceData& dev : s.devices_) {
        s.accounts_.push_back(
            chain::Account::derive(dev.device_id, derive_seed(config.data_seed, "account:" + dev.device_id)));
        keys[dev.device_id] = s.accounts_.back().verify_key;
    }

    const nn::GruModel w0 =
        nn::init_model(s.dims_, derive_seed(static_cast<std::uint64_t>(seed), "model-init"));
    const std::int64_t scale = config.disable_quantization ? 0 : config.scale;
    contract::ContractState deployed = contract::init_contract(
        s.dims_.param_count(), scale, config.sampling_rate, config.lambda, nn::flatten(w0));
    deployed.strict_total_count_weights = config.strict_total_count_weights;

    consensus::NetworkConfig net_cfg;
    net_cfg.orgs = config.orgs;
    net_cfg.nodes_per_org = config.nodes_per_org;
    net_cfg.devices_per_org =
        static_cast<int>((s.devices_.size() + static_cast<std::size_t>(config.orgs) - 1) /
                         static_cast<std::size_t>(config.orgs));
    net_cfg.quorum_fraction = config.quorum_fraction;
    net_cfg.leader_seed = derive_seed(static_cast<std::uint64_t>(seed), "leader-schedule");
    s.network_ = std::make_unique<consensus::Network>(net_cfg, deployed, "sl-contract", keys);
    s.network_->provision([&](contract::ContractState& c) {
        for (const DeviceData& dev : s.devices_)
            contract::register_device(c, dev.device_id, dev.train.size());
    });

    s.controller_.learning_rate = config.local.learning_rate;
    s.timing_.init_seconds = seconds_since(setup_start);
    return s;
}

Eigen::VectorXd SwarmSession::aggregated_weights() const {
    return contract::dequantize(contract::query_aggregated(network_->contract_view()).params);
}

RoundOutcome SwarmSession::run_round(int epoch) {
    const std::int64_t scale = config_.disable_quantization ? 0 : config_.scale;
    nn::LocalUpdateConfig local = config_.local;
    local.learning_rate = controller_.learning_rate;

    std::vector<chain::SignedMessage> uploads, commands;
    std::map<std::string, stats::DeviceRoundTiming> round_timing;
    double weighted_train = 0.0, weighted_val = 0.0, total_count = 0.0;

    for (std::size_t d = 0; d < devices_.size(); ++d) {
        const DeviceData& dev = devices_[d];
        // devices read through the canonical honest replica; committed
        // state is byte-identical across honest nodes
        auto phase = std::chrono::steady_clock::now();
        const auto view = contract::query_aggregated(network_->contract_view());
        const nn::GruModel model = nn::unflatten(contract::dequantize(view.params), dims_);
        const chain::Digest tip = network_->chain_view().tip().block_hash;
        stats::DeviceRoundTiming t;
        t.download = seconds_since(phase);

        phase = std::chrono::steady_clock::now();
        const nn::LocalUpdateResult update =
            nn::local_update(model, dev.train, dev.val, local,
                             derive_seed(static_cast<std::uint64_t>(seed_),
                                         "local:" + dev.device_id + ":" + std::to_string(epoch)));
        t.training = seconds_since(phase);

        phase = std::chrono::steady_clock::now();
        chain::SignedMessage up;
        up.prev_hash = tip;
        up.owner = dev.device_id;
        up.receiver = network_->contract_account();
        up.func = chain::MsgFunc::Upload;
        up.payload = contract::quantize(update.weights, scale);
        up.losses = {update.train_loss, update.val_loss};
        up.timestamp = static_cast<std::uint64_t>(epoch);
        uploads.push_back(chain::sign_message(up, accounts_[d]));

        chain::SignedMessage agg;
        agg.prev_hash = tip;
        agg.owner = dev.device_id;
        agg.receiver = network_->contract_account();
        agg.func = chain::MsgFunc::Aggregate;
        agg.timestamp = static_cast<std::uint64_t>(epoch);
        commands.push_back(chain::sign_message(agg, accounts_[d]));
        t.upload = seconds_since(phase);

        const double count = static_cast<double>(dev.train.size());
        weighted_train += count * update.train_loss;
        weighted_val += count * update.val_loss;
        total_count += count;
        round_timing[dev.device_id] = t;
    }

    std::vector<chain::SignedMessage> pending = std::move(uploads);
    pending.insert(pending.end(), commands.begin(), commands.end());

    const auto agg_start = std::chrono::steady_clock::now();
    const std::uint64_t round_before = network_->contract_view().round;
    RoundOutcome outcome;
    outcome.commit = network_->propose_and_commit(block_slot_++, pending);
    timing_.rounds.push_back(std::move(round_timing));
    timing_.agg_seconds.push_back(seconds_since(agg_start));

    if (outcome.commit.status != consensus::CommitResult::Status::Committed)
        throw Error("consensus stalled at epoch " + std::to_string(epoch));
    outcome.aggregated = network_->contract_view().round > round_before;
    outcome.train_loss = weighted_train / total_count;
    outcome.val_loss = weighted_val / total_count;
    return outcome;
}

}  // namespace swarm::sl
