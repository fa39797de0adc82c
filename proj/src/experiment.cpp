#include "swarm/sl/experiment.hpp"

#include <json.hpp>
#include <sstream>

#include "swarm/rng.hpp"
#include "swarm/sl/session.hpp"

namespace swarm::sl {

using nlohmann::json;

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::Local: return "LL";
        case Scheme::Centralized: return "CL";
        case Scheme::Swarm: return "SL";
    }
    throw Error("unknown scheme");
}

ExperimentConfig default_config(data::SeriesKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    const std::vector<std::string> all = data::site_labels(kind);
    cfg.labels.assign(all.begin(), all.begin() + 8);
    switch (kind) {
        case data::SeriesKind::Gas:
            break;  // header defaults are the gas defaults
        case data::SeriesKind::PV:
            cfg.series_length = 1080;  // 18 blocks of 60 daylight samples
            cfg.trailing_block = 60;
            cfg.history = 48;
            cfg.horizon = 12;
            cfg.hidden_dim = 16;
            cfg.output_activation = nn::OutputActivation::Swish;
            cfg.local.learning_rate = 0.05;
            cfg.e_max = 40;
            break;
        case data::SeriesKind::WellLog:
            cfg.series_length = 600;
            cfg.history = 16;
            cfg.horizon = 1;
            cfg.stride = 1;
            cfg.window_mode = data::WindowMode::Aligned;
            cfg.hidden_dim = 10;
            cfg.bidirectional = true;
            cfg.local.learning_rate = 0.05;
            cfg.e_max = 40;
            break;
    }
    return cfg;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["kind"] = data::kind_name(c.kind);
    j["orgs"] = c.orgs;
    j["nodes_per_org"] = c.nodes_per_org;
    j["quorum_fraction"] = c.quorum_fraction;
    j["labels"] = c.labels;
    j["external_per_fold"] = c.external_per_fold;
    j["folds"] = c.folds;
    j["series_length"] = c.series_length;
    j["history"] = c.history;
    j["horizon"] = c.horizon;
    j["stride"] = c.stride;
    j["window_mode"] = c.window_mode == data::WindowMode::Forecast ? "forecast" : "aligned";
    j["train_fraction"] = c.train_fraction;
    j["val_fraction"] = c.val_fraction;
    j["trailing_block"] = c.trailing_block;
    j["hidden_dim"] = c.hidden_dim;
    j["bidirectional"] = c.bidirectional;
    j["output_activation"] = c.output_activation == nn::OutputActivation::Swish ? "swish" : "identity";
    j["local_epochs"] = c.local.local_epochs;
    j["batch_size"] = c.local.batch_size;
    j["learning_rate"] = c.local.learning_rate;
    j["e_max"] = c.e_max;
    j["stopping"] = {{"e_pre", c.stopping.e_pre},
                     {"switch_criterion", c.stopping.switch_criterion},
                     {"tolerance", c.stopping.tolerance},
                     {"max_switches", c.stopping.max_switches},
                     {"max_no_effect", c.stopping.max_no_effect}};
    j["scale"] = c.scale;
    j["disable_quantization"] = c.disable_quantization;
    j["strict_total_count_weights"] = c.strict_total_count_weights;
    j["sampling_rate"] = c.sampling_rate;
    j["lambda"] = c.lambda;
    j["screen_threshold"] = c.screen_threshold;
    j["data_seed"] = c.data_seed;
    j["model_seeds"] = c.model_seeds;
    j["selseeds"] = c.selseeds;
    j["device_counts"] = c.device_counts;
    j["sets_per_device"] = c.sets_per_device;
    j["fixed_devices"] = c.fixed_devices;
    j["local_epoch_values"] = c.local_epoch_values;
    j["epoch_budget"] = c.epoch_budget;
    j["sweep_fold"] = c.sweep_fold;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig base = default_config(data::kind_from_name(j.at("kind").get<std::string>()));
    ExperimentConfig c = base;
    c.orgs = j.value("orgs", base.orgs);
    c.nodes_per_org = j.value("nodes_per_org", base.nodes_per_org);
    c.quorum_fraction = j.value("quorum_fraction", base.quorum_fraction);
    if (j.contains("labels")) c.labels = j.at("labels").get<std::vector<std::string>>();
    c.external_per_fold = j.value("external_per_fold", base.external_per_fold);
    c.folds = j.value("folds", base.folds);
    c.series_length = j.value("series_length", base.series_length);
    c.history = j.value("history", base.history);
    c.horizon = j.value("horizon", base.horizon);
    c.stride = j.value("stride", base.stride);
    if (j.contains("window_mode"))
        c.window_mode = j.at("window_mode").get<std::string>() == "aligned" ? data::WindowMode::Aligned
                                                                            : data::WindowMode::Forecast;
    c.train_fraction = j.value("train_fraction", base.train_fraction);
    c.val_fraction = j.value("val_fraction", base.val_fraction);
    c.trailing_block = j.value("trailing_block", base.trailing_block);
    c.hidden_dim = j.value("hidden_dim", base.hidden_dim);
    c.bidirectional = j.value("bidirectional", base.bidirectional);
    if (j.contains("output_activation"))
        c.output_activation = j.at("output_activation").get<std::string>() == "swish"
                                  ? nn::OutputActivation::Swish
                                  : nn::OutputActivation::Identity;
    c.local.local_epochs = j.value("local_epochs", base.local.local_epochs);
    c.local.batch_size = j.value("batch_size", base.local.batch_size);
    c.local.learning_rate = j.value("learning_rate", base.local.learning_rate);
    c.e_max = j.value("e_max", base.e_max);
    if (j.contains("stopping")) {
        const json& s = j.at("stopping");
        c.stopping.e_pre = s.value("e_pre", base.stopping.e_pre);
        c.stopping.switch_criterion = s.value("switch_criterion", base.stopping.switch_criterion);
        c.stopping.tolerance = s.value("tolerance", base.stopping.tolerance);
        c.stopping.max_switches = s.value("max_switches", base.stopping.max_switches);
        c.stopping.max_no_effect = s.value("max_no_effect", base.stopping.max_no_effect);
    }
    c.scale = j.value("scale", base.scale);
    c.disable_quantization = j.value("disable_quantization", base.disable_quantization);
    c.strict_total_count_weights = j.value("strict_total_count_weights", base.strict_total_count_weights);
    c.sampling_rate = j.value("sampling_rate", base.sampling_rate);
    c.lambda = j.value("lambda", base.lambda);
    c.screen_threshold = j.value("screen_threshold", base.screen_threshold);
    c.data_seed = j.value("data_seed", base.data_seed);
    if (j.contains("model_seeds")) c.model_seeds = j.at("model_seeds").get<std::vector<int>>();
    if (j.contains("selseeds")) c.selseeds = j.at("selseeds").get<std::vector<int>>();
    if (j.contains("device_counts")) c.device_counts = j.at("device_counts").get<std::vector<int>>();
    if (j.contains("sets_per_device")) c.sets_per_device = j.at("sets_per_device").get<std::vector<int>>();
    c.fixed_devices = j.value("fixed_devices", base.fixed_devices);
    if (j.contains("local_epoch_values"))
        c.local_epoch_values = j.at("local_epoch_values").get<std::vector<int>>();
    c.epoch_budget = j.value("epoch_budget", base.epoch_budget);
    c.sweep_fold = j.value("sweep_fold", base.sweep_fold);
    return c;
}

namespace {

std::map<std::string, double> evaluate_on(const nn::GruModel& model,
                                          const std::map<std::string, nn::TrainBatch>& sets) {
    std::map<std::string, double> out;
    for (const auto& [label, batch] : sets) {
        if (batch.empty()) throw Error("no evaluation windows for " + label);
        out[label] = nn::evaluate(model, batch);
    }
    return out;
}

/// Weighted validation loss of isolated (non-chain) schemes, mirroring the
/// collaborative controller input.
struct IsolatedTrainer {
    const ExperimentConfig& cfg;
    nn::GruDims dims;
    StoppingState state;
    std::vector<EpochRecord> epochs;
    int final_epoch = 0;

    explicit IsolatedTrainer(const ExperimentConfig& config, const nn::GruDims& model_dims, int seed)
        : cfg(config), dims(model_dims) {
        state.learning_rate = config.local.learning_rate;
        weights_ = nn::flatten(nn::init_model(dims, derive_seed(static_cast<std::uint64_t>(seed), "model-init")));
        seed_ = seed;
    }

    /// One controller-supervised run over a fixed train/val pair.
    void run(const nn::TrainBatch& train, const nn::TrainBatch& val, const std::string& stream_tag) {
        for (int epoch = 1; epoch <= cfg.e_max; ++epoch) {
            nn::LocalUpdateConfig local = cfg.local;
            local.learning_rate = state.learning_rate;
            const nn::LocalUpdateResult update = nn::local_update(
                nn::unflatten(weights_, dims), train, val, local,
                derive_seed(static_cast<std::uint64_t>(seed_), stream_tag + ":" + std::to_string(epoch)));
            weights_ = update.weights;
            epochs.push_back({epoch, update.train_loss, update.val_loss, state.learning_rate});
            final_epoch = epoch;
            if (stopping_step(state, update.val_loss, weights_, epoch, cfg.stopping) == StopDecision::Stop)
                break;
        }
    }

    Eigen::VectorXd best() const { return state.best_weights; }

private:
    Eigen::VectorXd weights_;
    int seed_ = 0;
};

}  // namespace

SwarmRunReport run_swarm_learning(const ExperimentConfig& config, int fold, int seed) {
    SwarmSession session = SwarmSession::create(config, fold, seed);
    SwarmRunReport report;
    report.fold = fold;
    report.seed = seed;

    for (int epoch = 1; epoch <= config.e_max; ++epoch) {
        const RoundOutcome outcome = session.run_round(epoch);
        report.reselections += outcome.commit.reselections;
        report.epochs.push_back(
            {epoch, outcome.train_loss, outcome.val_loss, session.controller().learning_rate});
        report.final_epoch = epoch;
        const StopDecision decision =
            stopping_step(session.controller(), outcome.val_loss, session.aggregated_weights(), epoch,
                          config.stopping);
        if (decision == StopDecision::Stop) break;
    }

    report.best_val = session.controller().best_val;
    report.best_weights = session.controller().best_weights;
    const nn::GruModel best = nn::unflatten(report.best_weights, session.dims());

    std::map<std::string, nn::TrainBatch> internal_sets;
    for (const DeviceData& dev : session.devices())
        for (const auto& [label, batch] : dev.site_test) internal_sets[label] = batch;
    report.internal_test_mse = evaluate_on(best, internal_sets);
    report.external_test_mse = evaluate_on(
        best, external_eval_sets(config, session.external_labels(), session.pooled()));

    report.chain_jsonl = chain::chain_to_jsonl(session.network().chain_view());
    report.contract_state_json = contract::state_to_json(session.network().contract_view());
    report.commit_log = session.network().commit_log();
    report.timing = session.timing();
    return report;
}

CentralRunReport run_centralized_learning(const ExperimentConfig& config, int fold, int seed) {
    const FoldSplit split = fold_split(config, fold);
    const nn::GruDims dims = model_dims(config);

    std::optional<data::NormStats> pooled;
    if (config.kind == data::SeriesKind::WellLog) {
        std::vector<SitePrep> sites;
        for (const std::string& label : split.internal) sites.push_back(load_site(config, label));
        pooled = pooled_over(sites);
    }
    const data::NormStats* pooled_ptr = pooled ? &*pooled : nullptr;
    const std::vector<DeviceData> devices =
        build_devices(config, one_device_per_label(split.internal), pooled_ptr);

    std::vector<nn::TrainBatch> trains, vals;
    std::map<std::string, nn::TrainBatch> internal_sets;
    for (const DeviceData& dev : devices) {
        trains.push_back(dev.train);
        vals.push_back(dev.val);
        for (const auto& [label, batch] : dev.site_test) internal_sets[label] = batch;
    }

    IsolatedTrainer trainer(config, dims, seed);
    trainer.run(nn::merge_batches(trains), nn::merge_batches(vals), "central");

    CentralRunReport report;
    report.fold = fold;
    report.seed = seed;
    report.epochs = trainer.epochs;
    report.final_epoch = trainer.final_epoch;
    report.best_weights = trainer.best();
    const nn::GruModel best = nn::unflatten(report.best_weights, dims);
    report.internal_test_mse = evaluate_on(best, internal_sets);
    report.external_test_mse =
        evaluate_on(best, external_eval_sets(config, split.external, pooled_ptr));
    return report;
}

std::vector<LocalDeviceReport> run_local_learning(const ExperimentConfig& config, int fold, int seed) {
    const FoldSplit split = fold_split(config, fold);
    const nn::GruDims dims = model_dims(config);

    std::vector<LocalDeviceReport> reports;
    for (const std::string& label : split.internal) {
        // an isolated device: its own data, its own normalization statistics
        const Assignment assignment{{"dev-" + label, {label}}};
        const std::vector<DeviceData> devices = build_devices(config, assignment, nullptr);
        const DeviceData& dev = devices.front();

        IsolatedTrainer trainer(config, dims, seed);
        trainer.run(dev.train, dev.val, "local:" + dev.device_id);

        LocalDeviceReport report;
        report.device_id = dev.device_id;
        report.epochs = trainer.epochs;
        report.final_epoch = trainer.final_epoch;
        report.best_weights = trainer.best();
        const nn::GruModel best = nn::unflatten(report.best_weights, dims);
        report.own_test_mse = evaluate_on(best, dev.site_test);

        // the isolated device applies its own scaling to unseen sites (it
        // has no pooled statistics to reach for)
        std::optional<data::NormStats> own;
        if (config.kind == data::SeriesKind::WellLog) {
            own = pooled_over({load_site(config, label)});
        }
        report.external_test_mse =
            evaluate_on(best, external_eval_sets(config, split.external, own ? &*own : nullptr));
        reports.push_back(std::move(report));
    }
    return reports;
}

namespace {

std::string epochs_csv_header() { return "fold,seed,scheme,device,epoch,train_loss,val_loss,learning_rate\n"; }

void append_epochs(std::string& csv, int fold, int seed, const std::string& scheme,
                   const std::string& device, const std::vector<EpochRecord>& epochs) {
    for (const EpochRecord& e : epochs) {
        char line[192];
        std::snprintf(line, sizeof(line), "%d,%d,%s,%s,%d,%.12g,%.12g,%.12g\n", fold, seed, scheme.c_str(),
                      device.c_str(), e.epoch, e.train_loss, e.val_loss, e.learning_rate);
        csv += line;
    }
}

}  // namespace

PrimaryResult run_primary_experiment(const ExperimentConfig& config) {
    PrimaryResult result;
    result.epochs_csv = epochs_csv_header();
    const std::string kind = data::kind_name(config.kind);
    stats::TimingLedger sl_timing;

    for (int fold = 0; fold < config.folds; ++fold) {
        for (const int seed : config.model_seeds) {
            const SwarmRunReport sl = run_swarm_learning(config, fold, seed);
            for (const auto& [label, mse] : sl.internal_test_mse)
                result.cells.push_back({kind, fold, seed, "SL", "", label, false, mse});
            for (const auto& [label, mse] : sl.external_test_mse)
                result.cells.push_back({kind, fold, seed, "SL", "", label, true, mse});
            append_epochs(result.epochs_csv, fold, seed, "SL", "", sl.epochs);
            sl_timing = stats::merge_ledgers(sl_timing, sl.timing);
            if (fold == 0 && seed == config.model_seeds.front()) {
                result.chain_jsonl = sl.chain_jsonl;
                result.commit_log = sl.commit_log;
                result.contract_state_json = sl.contract_state_json;
                std::string weights;
                for (Eigen::Index i = 0; i < sl.best_weights.size(); ++i) {
                    char line[40];
                    std::snprintf(line, sizeof(line), "%.17g\n", sl.best_weights[i]);
                    weights += line;
                }
                result.best_weights_csv = std::move(weights);
            }

            const CentralRunReport cl = run_centralized_learning(config, fold, seed);
            for (const auto& [label, mse] : cl.internal_test_mse)
                result.cells.push_back({kind, fold, seed, "CL", "", label, false, mse});
            for (const auto& [label, mse] : cl.external_test_mse)
                result.cells.push_back({kind, fold, seed, "CL", "", label, true, mse});
            append_epochs(result.epochs_csv, fold, seed, "CL", "", cl.epochs);

            for (const LocalDeviceReport& dev : run_local_learning(config, fold, seed)) {
                for (const auto& [label, mse] : dev.own_test_mse)
                    result.cells.push_back({kind, fold, seed, "LL", dev.device_id, label, false, mse});
                for (const auto& [label, mse] : dev.external_test_mse)
                    result.cells.push_back({kind, fold, seed, "LL", dev.device_id, label, true, mse});
                append_epochs(result.epochs_csv, fold, seed, "LL", dev.device_id, dev.epochs);
            }
        }
    }
    result.summaries = stats::summarize_results(result.cells);
    result.sl_timing = stats::timing_report(sl_timing);
    return result;
}

std::vector<std::vector<std::vector<std::string>>> fixed_devices_deletion_path(
    const std::vector<std::string>& labels, int device_count, int max_sets, int selseed) {
    if (device_count < 1 || max_sets < 1) throw Error("deletion path needs positive sizes");
    if (static_cast<std::size_t>(device_count * max_sets) > labels.size())
        throw Error("label pool too small for the requested grouping");
    std::vector<std::string> pool = labels;
    Rng rng(derive_seed(static_cast<std::uint64_t>(selseed), "volume-fixed-devices"));
    rng.shuffle(pool);

    std::vector<std::vector<std::string>> groups(static_cast<std::size_t>(device_count));
    std::size_t next = 0;
    for (int s = 0; s < max_sets; ++s)
        for (int d = 0; d < device_count; ++d) groups[static_cast<std::size_t>(d)].push_back(pool[next++]);

    std::vector<std::vector<std::vector<std::string>>> steps{groups};
    while (steps.back().front().size() > 1) {
        std::vector<std::vector<std::string>> reduced = steps.back();
        for (auto& group : reduced) group.erase(group.begin() + static_cast<std::ptrdiff_t>(rng.index(group.size())));
        std::erase_if(reduced, [](const auto& g) { return g.empty(); });
        steps.push_back(std::move(reduced));
    }
    return steps;
}

std::vector<std::vector<std::string>> fixed_sets_deletion_path(const std::vector<std::string>& labels,
                                                               std::vector<int> device_counts,
                                                               int selseed) {
    if (device_counts.empty()) throw Error("device_counts must not be empty");
    std::sort(device_counts.rbegin(), device_counts.rend());
    if (static_cast<std::size_t>(device_counts.front()) > labels.size())
        throw Error("label pool too small for the largest device count");

    std::vector<std::string> pool = labels;
    Rng rng(derive_seed(static_cast<std::uint64_t>(selseed), "volume-fixed-sets"));
    rng.shuffle(pool);
    pool.resize(static_cast<std::size_t>(device_counts.front()));

    std::vector<std::vector<std::string>> steps{pool};
    for (std::size_t i = 1; i < device_counts.size(); ++i) {
        std::vector<std::string> current = steps.back();
        while (current.size() > static_cast<std::size_t>(device_counts[i]))
            current.erase(current.begin() + static_cast<std::ptrdiff_t>(rng.index(current.size())));
        steps.push_back(std::move(current));
    }
    return steps;
}

namespace {

struct SweepEval {
    std::map<std::string, double> internal;
    std::map<std::string, double> external;
};

SweepEval run_swarm_assignment(const ExperimentConfig& config, int fold, int seed,
                               const Assignment& assignment) {
    SwarmSession session = SwarmSession::create_with_assignment(config, fold, seed, assignment);
    for (int epoch = 1; epoch <= config.e_max; ++epoch) {
        const RoundOutcome outcome = session.run_round(epoch);
        if (stopping_step(session.controller(), outcome.val_loss, session.aggregated_weights(), epoch,
                          config.stopping) == StopDecision::Stop)
            break;
    }
    const nn::GruModel best = nn::unflatten(session.controller().best_weights, session.dims());
    SweepEval eval;
    for (const DeviceData& dev : session.devices())
        for (const auto& [label, batch] : dev.site_test) eval.internal[label] = nn::evaluate(best, batch);
    for (const auto& [label, batch] :
         external_eval_sets(config, session.external_labels(), session.pooled()))
        eval.external[label] = nn::evaluate(best, batch);
    return eval;
}

void push_points(std::vector<SweepPoint>& out, const std::string& axis, int point, int selseed,
                 int seed, const SweepEval& eval) {
    for (const auto& [label, mse] : eval.internal) out.push_back({axis, point, selseed, seed, label, false, mse});
    for (const auto& [label, mse] : eval.external) out.push_back({axis, point, selseed, seed, label, true, mse});
}

std::string sweep_points_csv(const std::vector<SweepPoint>& points) {
    std::string csv = "axis,point,selseed,seed,dataset,split,test_mse\n";
    for (const SweepPoint& p : points) {
        char line[192];
        std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%s,%s,%.12g\n", p.axis.c_str(), p.point, p.selseed,
                      p.seed, p.dataset.c_str(), p.external ? "P_ex" : "P_in", p.test_mse);
        csv += line;
    }
    return csv;
}

std::string sweep_summary_csv(const std::vector<SweepPoint>& points) {
    std::map<std::tuple<std::string, int, bool>, std::vector<double>> buckets;
    for (const SweepPoint& p : points) buckets[{p.axis, p.point, p.external}].push_back(p.test_mse);
    std::string csv = "axis,point,split,mean_mse,std_mse,cells\n";
    for (const auto& [key, values] : buckets) {
        double mean = 0.0;
        for (const double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (const double v : values) var += (v - mean) * (v - mean);
        const double stddev = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
        char line[192];
        std::snprintf(line, sizeof(line), "%s,%d,%s,%.12g,%.12g,%zu\n", std::get<0>(key).c_str(),
                      std::get<1>(key), std::get<2>(key) ? "P_ex" : "P_in", mean, stddev, values.size());
        csv += line;
    }
    return csv;
}

}  // namespace

SweepResult run_volume_sweep(const ExperimentConfig& config, int selseed) {
    const FoldSplit split = fold_split(config, 0);
    SweepResult result;

    // axis 1: one dataset per device, vary how many devices participate
    const auto singleton_steps = fixed_sets_deletion_path(split.internal, config.device_counts, selseed);
    for (const auto& step : singleton_steps) {
        const int point = static_cast<int>(step.size());
        for (const int seed : config.model_seeds) {
            const SweepEval eval =
                run_swarm_assignment(config, 0, seed, one_device_per_label(step));
            push_points(result.points, "devices", point, selseed, seed, eval);
        }
    }

    // axis 2: fixed devices, vary how many datasets each one holds
    const int max_sets = config.sets_per_device.empty()
                             ? 1
                             : *std::max_element(config.sets_per_device.begin(), config.sets_per_device.end());
    const auto grouped_steps =
        fixed_devices_deletion_path(split.internal, config.fixed_devices, max_sets, selseed);
    for (const auto& step : grouped_steps) {
        const int point = static_cast<int>(step.front().size());
        if (std::find(config.sets_per_device.begin(), config.sets_per_device.end(), point) ==
            config.sets_per_device.end())
            continue;
        Assignment assignment;
        for (std::size_t d = 0; d < step.size(); ++d)
            assignment.push_back({"dev" + std::to_string(d), step[d]});
        for (const int seed : config.model_seeds) {
            const SweepEval eval = run_swarm_assignment(config, 0, seed, assignment);
            push_points(result.points, "sets_per_device", point, selseed, seed, eval);
        }
    }

    result.points_csv = sweep_points_csv(result.points);
    result.summary_csv = sweep_summary_csv(result.points);
    return result;
}

SweepResult run_local_epoch_sweep(const ExperimentConfig& config) {
    SweepResult result;
    for (const int e_local : config.local_epoch_values) {
        ExperimentConfig cfg = config;
        cfg.local.local_epochs = e_local;
        cfg.e_max = std::max(1, config.epoch_budget / e_local);
        for (const int seed : config.model_seeds) {
            const SweepEval eval =
                run_swarm_assignment(cfg, cfg.sweep_fold, seed,
                                     one_device_per_label(fold_split(cfg, cfg.sweep_fold).internal));
            push_points(result.points, "local_epochs", e_local, 0, seed, eval);
        }
    }
    result.points_csv = sweep_points_csv(result.points);
    result.summary_csv = sweep_summary_csv(result.points);
    return result;
}

std::vector<ScenarioResult> run_fault_scenarios(const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    cfg.series_length = std::min<Eigen::Index>(cfg.series_length, 320);
    cfg.e_max = 3;
    const int seed = cfg.model_seeds.empty() ? 0 : cfg.model_seeds.front();
    std::vector<ScenarioResult> results;

    // 1) tampering leader: detected, reselected, and harmless
    {
        SwarmSession clean = SwarmSession::create(cfg, 0, seed);
        SwarmSession faulty = SwarmSession::create(cfg, 0, seed);
        bool reselected = false;
        for (int epoch = 1; epoch <= cfg.e_max; ++epoch) {
            std::string bad_node;
            if (epoch == 2) {
                bad_node = faulty.network().select_packager(1);  // round 2 occupies block slot 1
                faulty.network().inject_fault(bad_node, {consensus::BehaviorKind::BadPackager});
            }
            clean.run_round(epoch);
            const RoundOutcome outcome = faulty.run_round(epoch);
            if (epoch == 2) {
                reselected = outcome.commit.reselections >= 1;
                faulty.network().inject_fault(bad_node, {consensus::BehaviorKind::Honest});
            }
        }
        const bool same_weights =
            contract::quantize(clean.aggregated_weights(), 1000000).values ==
            contract::quantize(faulty.aggregated_weights(), 1000000).values;
        const bool consistent = faulty.network().honest_views_consistent();
        results.push_back({"bad_packager_reselected", reselected && same_weights && consistent,
                           reselected ? "reselected; final weights match the fault-free run"
                                      : "no reselection observed"});
    }

    // 2) one dishonest voter in four: rounds commit and the outcome matches
    //    a fault-free paired run
    {
        SwarmSession clean = SwarmSession::create(cfg, 0, seed);
        SwarmSession session = SwarmSession::create(cfg, 0, seed);
        session.network().inject_fault("o1n1", {consensus::BehaviorKind::BadVoter});
        bool committed = true;
        for (int epoch = 1; epoch <= cfg.e_max; ++epoch) {
            clean.run_round(epoch);
            const RoundOutcome outcome = session.run_round(epoch);
            committed = committed && outcome.commit.status == consensus::CommitResult::Status::Committed;
        }
        const bool same_weights = contract::quantize(clean.aggregated_weights(), 1000000).values ==
                                  contract::quantize(session.aggregated_weights(), 1000000).values;
        results.push_back({"bad_voter_minority",
                           committed && same_weights && session.network().honest_views_consistent(),
                           "minority dishonest voters cannot block or alter commits"});
    }

    // 3) two dishonest voters in four: the round stalls, state unchanged
    {
        SwarmSession session = SwarmSession::create(cfg, 0, seed);
        session.run_round(1);
        const std::uint64_t round_before = session.network().contract_view().round;
        const std::size_t height_before = session.network().chain_view().height();
        session.network().inject_fault("o1n0", {consensus::BehaviorKind::BadVoter});
        session.network().inject_fault("o1n1", {consensus::BehaviorKind::BadVoter});
        bool stalled = false;
        try {
            session.run_round(2);
        } catch (const Error&) {
            stalled = true;
        }
        const bool unchanged = session.network().contract_view().round == round_before &&
                               session.network().chain_view().height() == height_before;
        results.push_back({"bad_voter_majority", stalled && unchanged,
                           stalled ? "stalled with no state change" : "unexpected commit"});
    }

    // 4) malicious client upload flagged by similarity screening
    {
        SwarmSession session = SwarmSession::create(cfg, 0, seed);
        session.run_round(1);
        const contract::ContractState& view = session.network().contract_view();
        const Eigen::VectorXd aggregated = session.aggregated_weights();

        Rng rng(derive_seed(static_cast<std::uint64_t>(seed), "malicious-upload"));
        Eigen::VectorXd hostile = -4.0 * aggregated;
        for (Eigen::Index i = 0; i < hostile.size(); ++i) hostile[i] += 0.01 * rng.normal();
        const double hostile_score =
            contract::screen_update(view, contract::quantize(hostile, view.scale));

        // an honest next-round update stays close to the aggregate
        const DeviceData& dev = session.devices().front();
        const nn::LocalUpdateResult honest = nn::local_update(
            nn::unflatten(aggregated, session.dims()), dev.train, dev.val, cfg.local,
            derive_seed(static_cast<std::uint64_t>(seed), "honest-upload"));
        const double honest_score =
            contract::screen_update(view, contract::quantize(honest.weights, view.scale));

        const bool flagged = hostile_score < cfg.screen_threshold;
        const bool honest_clears = honest_score >= cfg.screen_threshold;
        char detail[160];
        std::snprintf(detail, sizeof(detail), "hostile similarity %.3f, honest similarity %.3f, threshold %.2f",
                      hostile_score, honest_score, cfg.screen_threshold);
        results.push_back({"malicious_client_screened", flagged && honest_clears, detail});
    }

    return results;
}

ScriptedFaultResult run_scripted_faults(const ExperimentConfig& base,
                                        const std::vector<consensus::FaultEvent>& events, int rounds) {
    ExperimentConfig cfg = base;
    cfg.series_length = std::min<Eigen::Index>(cfg.series_length, 320);
    const int seed = cfg.model_seeds.empty() ? 0 : cfg.model_seeds.front();
    SwarmSession session = SwarmSession::create(cfg, 0, seed);

    ScriptedFaultResult result;
    for (int round = 1; round <= rounds; ++round) {
        for (const consensus::FaultEvent& e : events)
            if (e.round == static_cast<std::uint64_t>(round))
                session.network().inject_fault(e.node, e.behavior);
        try {
            session.run_round(round);
            ++result.rounds_committed;
        } catch (const Error&) {
            ++result.rounds_stalled;  // retried as the next block
        }
    }
    result.commit_log = session.network().commit_log();
    return result;
}

std::string scenarios_to_csv(const std::vector<ScenarioResult>& results) {
    std::string csv = "scenario,passed,detail\n";
    for (const ScenarioResult& r : results)
        csv += r.name + "," + (r.passed ? "true" : "false") + ",\"" + r.detail + "\"\n";
    return csv;
}

}  // namespace swarm::sl
