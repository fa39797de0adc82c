// End-to-end acceptance battery. Each criterion prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "swarm/sl/session.hpp"
#include "swarm/stats/mann_whitney.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void run_criterion(int number, const std::string& name, const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool passed = false;
    try {
        detail = body();
        passed = true;
    } catch (const std::exception& e) {
        detail = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", passed ? "PASS" : "FAIL", number, name.c_str(),
                seconds, detail.empty() ? "" : " - ", detail.c_str());
    std::fflush(stdout);
    if (!passed) ++g_failures;
}

struct Failure : std::runtime_error {
    explicit Failure(const std::string& what) : std::runtime_error(what) {}
};

void require(bool condition, const std::string& what) {
    if (!condition) throw Failure(what);
}

// ---------------------------------------------------------------- 1
std::string distributed_step_equivalence() {
    std::ostringstream detail;
    for (const int shards : {2, 3, 5}) {
        sl::ExperimentConfig cfg = sl::default_config(data::SeriesKind::Gas);
        cfg.labels.assign(cfg.labels.begin(), cfg.labels.begin() + shards + 1);
        cfg.external_per_fold = 1;
        cfg.folds = 1;
        cfg.series_length = 200;
        cfg.hidden_dim = 6;
        cfg.sampling_rate = 1.0;
        cfg.lambda = 1.0;
        cfg.local.local_epochs = 1;
        cfg.local.batch_size = 1 << 20;  // full batch
        cfg.disable_quantization = true;

        sl::SwarmSession session = sl::SwarmSession::create(cfg, 0, 0);
        require(static_cast<int>(session.devices().size()) == shards, "unexpected shard count");
        const Eigen::Index count = session.devices().front().train.size();
        for (const auto& dev : session.devices())
            require(dev.train.size() == count, "shards are not equal-sized");

        const Eigen::VectorXd w0 = session.aggregated_weights();
        session.run_round(1);
        const Eigen::VectorXd swarm_step = session.aggregated_weights();

        // centralized full-batch step on the union of the shards
        std::vector<nn::TrainBatch> parts;
        for (const auto& dev : session.devices()) parts.push_back(dev.train);
        const nn::TrainBatch unified = nn::merge_batches(parts);
        const nn::GruModel start = nn::unflatten(w0, session.dims());
        const nn::BackwardResult grad =
            nn::gru_backward(start, unified, nn::gru_forward(start, unified).cache);
        const Eigen::VectorXd central_step = w0 - cfg.local.learning_rate * grad.gradient;

        const double diff = (swarm_step - central_step).cwiseAbs().maxCoeff();
        require(diff <= 1e-10, "K=" + std::to_string(shards) + " diff " + std::to_string(diff));
        detail << "K=" << shards << " max|dw|=" << diff << " ";
    }
    return detail.str();
}

// ---------------------------------------------------------------- 2
std::string gradient_correctness() {
    const nn::GruDims dims{.input_dim = 2, .hidden_dim = 3, .output_dim = 1};
    const nn::GruModel model = nn::init_model(dims, 11);
    Rng rng(7);
    nn::TrainBatch batch;
    batch.targets.resize(2, 1);
    for (int b = 0; b < 2; ++b) {
        Eigen::MatrixXd input(4, 2);
        for (int t = 0; t < 4; ++t)
            for (int j = 0; j < 2; ++j) input(t, j) = rng.uniform(-1, 1);
        batch.inputs.push_back(input);
        batch.targets(b, 0) = rng.uniform(-1, 1);
    }

    const nn::BackwardResult analytic =
        nn::gru_backward(model, batch, nn::gru_forward(model, batch).cache);

    const Eigen::VectorXd base = nn::flatten(model);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        Eigen::VectorXd plus = base, minus = base;
        plus[i] += 1e-5;
        minus[i] -= 1e-5;
        const nn::GruModel mp = nn::unflatten(plus, dims);
        const nn::GruModel mm = nn::unflatten(minus, dims);
        const double lp = nn::mse(batch.targets, nn::gru_forward(mp, batch).predictions);
        const double lm = nn::mse(batch.targets, nn::gru_forward(mm, batch).predictions);
        const double numeric = (lp - lm) / 2e-5;
        const double denom = std::max({std::abs(numeric), std::abs(analytic.gradient[i]), 1e-8});
        worst = std::max(worst, std::abs(numeric - analytic.gradient[i]) / denom);
    }
    require(worst <= 1e-4, "max relative error " + std::to_string(worst));
    return "max rel err " + std::to_string(worst) + " over " + std::to_string(base.size()) + " coords";
}

// ---------------------------------------------------------------- 3
std::string contract_aggregation_oracle() {
    constexpr std::int64_t kScale = 1000000;
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index len = 1 + static_cast<Eigen::Index>(rng.index(32));
        const std::size_t devices = 1 + rng.index(8);
        contract::ContractState state =
            contract::init_contract(len, kScale, 1.0, 1.0, Eigen::VectorXd::Zero(len));
        Eigen::VectorXd oracle = Eigen::VectorXd::Zero(len);
        double total = 0.0;
        std::vector<Eigen::VectorXd> raw;
        std::vector<std::int64_t> counts;
        for (std::size_t d = 0; d < devices; ++d) {
            counts.push_back(1 + static_cast<std::int64_t>(rng.index(40)));
            Eigen::VectorXd v(len);
            for (Eigen::Index i = 0; i < len; ++i) v[i] = rng.uniform(-2.0, 2.0);
            raw.push_back(v);
            contract::register_device(state, "d" + std::to_string(d), counts.back());
            total += static_cast<double>(counts.back());
        }
        for (std::size_t d = 0; d < devices; ++d) {
            contract::update_parameter(state, "d" + std::to_string(d),
                                       contract::quantize(raw[d], kScale), {0, 0});
            oracle += (static_cast<double>(counts[d]) / total) * raw[d];
        }
        contract::aggregate_parameters(state, "d0");
        const double err = (contract::dequantize(state.aggregated) - oracle).cwiseAbs().maxCoeff();
        const double bound = (1.0 + static_cast<double>(devices)) * 0.5 / kScale;
        require(err <= bound, "trial " + std::to_string(trial) + " err " + std::to_string(err));
        worst = std::max(worst, err);
    }
    return "100 cases, worst error " + std::to_string(worst);
}

// ---------------------------------------------------------------- 4
std::string ledger_tamper_evidence() {
    const chain::Account alice = chain::Account::derive("alice", 1);
    const chain::Account bob = chain::Account::derive("bob", 2);
    const chain::KeyStore keys{{alice.id, alice.verify_key}, {bob.id, bob.verify_key}};
    Rng rng(997);

    auto make_message = [&](const chain::Account& owner, std::uint64_t round, const chain::Digest& prev) {
        chain::SignedMessage m;
        m.prev_hash = prev;
        m.owner = owner.id;
        m.receiver = "contract";
        m.func = chain::MsgFunc::Upload;
        contract::FixedPointVector payload;
        payload.scale = 1000000;
        for (int i = 0; i < 4; ++i)
            payload.values.push_back(static_cast<std::int64_t>(rng.index(2000000)) - 1000000);
        m.payload = payload;
        m.losses = {rng.uniform(), rng.uniform()};
        m.timestamp = round;
        return chain::sign_message(m, owner);
    };

    std::vector<chain::Chain> chains;
    for (int c = 0; c < 5; ++c) {
        chain::Chain built;
        for (std::uint64_t round = 1; round <= 4; ++round) {
            std::vector<chain::SignedMessage> msgs{make_message(alice, round, built.tip().block_hash),
                                                   make_message(bob, round, built.tip().block_hash)};
            chain::append_block(built,
                                chain::build_block(built.tip().block_hash, msgs, round,
                                                   static_cast<std::int64_t>(rng.index(1000)),
                                                   "n" + std::to_string(c), keys),
                                keys);
        }
        require(chain::validate_chain(built, keys), "untampered chain must validate");
        require(chain::validate_chain_structure(built), "untampered structure must validate");
        chains.push_back(std::move(built));
    }

    int detected = 0;
    const int trials = 500;
    for (int trial = 0; trial < trials; ++trial) {
        chain::Chain mutated = chains[rng.index(chains.size())];
        chain::Block& b = mutated.blocks[1 + rng.index(mutated.blocks.size() - 1)];
        chain::SignedMessage& m = b.messages[rng.index(b.messages.size())];
        switch (rng.index(10)) {
            case 0: b.prev_hash.bytes[rng.index(32)] ^= static_cast<std::uint8_t>(1u << rng.index(8)); break;
            case 1: b.tx_root.bytes[rng.index(32)] ^= static_cast<std::uint8_t>(1u << rng.index(8)); break;
            case 2: b.timestamp += 1 + rng.index(5); break;
            case 3: b.nonce ^= static_cast<std::int64_t>(1) << rng.index(30); break;
            case 4: b.packager += "z"; break;
            case 5: b.block_hash.bytes[rng.index(32)] ^= static_cast<std::uint8_t>(1u << rng.index(8)); break;
            case 6: m.payload->values[rng.index(m.payload->values.size())] += 1; break;
            case 7: m.signature[rng.index(m.signature.size())] ^= static_cast<std::uint8_t>(1u << rng.index(8)); break;
            case 8: m.timestamp += 1; break;
            default: m.losses->first += 1e-9; break;
        }
        if (!chain::validate_chain(mutated, keys)) ++detected;
    }
    require(detected == trials,
            "detected " + std::to_string(detected) + " of " + std::to_string(trials));
    return "500/500 mutations detected, 5/5 untampered chains validate";
}

// ---------------------------------------------------------------- 5
std::string consensus_fault_matrix() {
    const sl::ExperimentConfig cfg = sl::default_config(data::SeriesKind::Gas);
    const std::vector<sl::ScenarioResult> first = sl::run_fault_scenarios(cfg);
    const std::vector<sl::ScenarioResult> second = sl::run_fault_scenarios(cfg);
    require(first.size() == 4, "expected four scenarios");
    std::ostringstream detail;
    for (std::size_t i = 0; i < first.size(); ++i) {
        require(first[i].passed, first[i].name + ": " + first[i].detail);
        require(second[i].passed == first[i].passed, "scenario outcome not deterministic");
        detail << first[i].name << " ok; ";
    }
    return detail.str();
}

// ---------------------------------------------------------------- 6
std::string directional_comparison() {
    const sl::ExperimentConfig cfg = sl::default_config(data::SeriesKind::Gas);
    require(cfg.folds == 3 && cfg.model_seeds.size() == 3, "desk config must be 3 folds x 3 seeds");
    require(cfg.labels.size() - static_cast<std::size_t>(cfg.external_per_fold) == 6,
            "desk config must leave 6 internal device shards");
    const sl::PrimaryResult result = sl::run_primary_experiment(cfg);
    for (const stats::ComparisonSummary& s : result.summaries) {
        if (s.baseline == "LL" && s.external) {
            std::ostringstream detail;
            detail << "SL best " << 100.0 * s.sl_best_fraction << "% of " << s.cells
                   << " cells, SL mean " << s.sl_mean << " vs LL " << s.baseline_mean;
            require(s.sl_best_fraction >= 0.70, detail.str());
            require(s.sl_mean < s.baseline_mean, detail.str());
            return detail.str();
        }
    }
    throw Failure("missing external LL-vs-SL summary");
}

// ---------------------------------------------------------------- 7
std::string controller_trace_conformance() {
    const sl::StoppingConstants k{.e_pre = 0, .switch_criterion = 2, .tolerance = 1, .max_switches = 1,
                                  .max_no_effect = 99};

    // trace 1: losses 1.0, 1.1, 1.2, 1.3 -> halve at 3, stop at 4
    {
        sl::StoppingState s;
        s.learning_rate = 1.0;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
        require(sl::stopping_step(s, 1.0, w, 1, k) == sl::StopDecision::Continue, "t1 e1");
        require(sl::stopping_step(s, 1.1, w, 2, k) == sl::StopDecision::Continue, "t1 e2");
        require(sl::stopping_step(s, 1.2, w, 3, k) == sl::StopDecision::HalveLearningRate, "t1 e3");
        require(s.learning_rate == 0.5, "t1 lr");
        require(sl::stopping_step(s, 1.3, w, 4, k) == sl::StopDecision::Stop, "t1 e4");
        require(s.best_val == 1.0, "t1 best");
    }

    // trace 2: the -tolerance restart defers the second halving to the
    // third stale epoch after the first one
    {
        sl::StoppingConstants k2 = k;
        k2.max_switches = 99;
        sl::StoppingState s;
        s.learning_rate = 1.0;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
        const double losses[] = {1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
        std::vector<sl::StopDecision> decisions;
        for (int e = 1; e <= 6; ++e) decisions.push_back(sl::stopping_step(s, losses[e - 1], w, e, k2));
        require(decisions[2] == sl::StopDecision::HalveLearningRate, "t2 halve@3");
        require(decisions[3] == sl::StopDecision::Continue, "t2 e4");
        require(decisions[4] == sl::StopDecision::Continue, "t2 e5");
        require(decisions[5] == sl::StopDecision::HalveLearningRate, "t2 halve@6");
        require(s.learning_rate == 0.25, "t2 lr");
    }

    // trace 3: strictly decreasing losses never halve or stop
    {
        sl::StoppingState s;
        s.learning_rate = 1.0;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
        for (int e = 1; e <= 50; ++e)
            require(sl::stopping_step(s, 1.0 - 0.001 * e, w, e, k) == sl::StopDecision::Continue,
                    "t3 must continue");
        require(s.learning_rate == 1.0, "t3 lr untouched");
    }
    return "three hand traces match";
}

// ---------------------------------------------------------------- 8
std::string mann_whitney_exactness() {
    Rng rng(2024);
    auto pair_u = [](const std::vector<double>& a, const std::vector<double>& b) {
        double u = 0.0;
        for (const double x : a)
            for (const double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
        return u;
    };
    auto oracle_p = [&](const std::vector<double>& a, const std::vector<double>& b) {
        const double observed = pair_u(a, b);
        std::vector<double> pooled = a;
        pooled.insert(pooled.end(), b.begin(), b.end());
        std::vector<int> mask(pooled.size(), 1);
        std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(a.size()), 0);
        std::sort(mask.begin(), mask.end());
        std::uint64_t total = 0, at_most = 0;
        do {
            std::vector<double> ga, gb;
            for (std::size_t i = 0; i < pooled.size(); ++i) (mask[i] == 0 ? ga : gb).push_back(pooled[i]);
            ++total;
            if (pair_u(ga, gb) <= observed + 1e-12) ++at_most;
        } while (std::next_permutation(mask.begin(), mask.end()));
        return static_cast<double>(at_most) / static_cast<double>(total);
    };

    int checked = 0;
    int draws_done = 0;
    while (draws_done < 50) {
        for (std::size_t na = 1; na <= 9 && draws_done < 50; ++na) {
            for (std::size_t nb = 1; na + nb <= 10 && draws_done < 50; ++nb) {
                std::vector<double> a(na), b(nb);
                for (auto& x : a) x = rng.uniform(0.0, 1.0);
                for (auto& x : b) x = rng.uniform(0.0, 1.0);
                const stats::UTestResult r = stats::mann_whitney_one_tailed(a, b);
                require(r.method == stats::UTestMethod::ExactEnumeration, "must enumerate");
                require(std::abs(r.p_value - oracle_p(a, b)) <= 1e-12, "p mismatch");
                const stats::UTestResult rev = stats::mann_whitney_one_tailed(b, a);
                require(std::abs(r.u_statistic + rev.u_statistic - static_cast<double>(na * nb)) <= 1e-12,
                        "U_A + U_B identity");
                ++checked;
                ++draws_done;
            }
        }
    }
    return std::to_string(checked) + " sample pairs match the enumeration oracle to 1e-12";
}

// ---------------------------------------------------------------- 9
std::string preprocessing_formulas() {
    // capacity: volume over time on producing days, 0 otherwise
    require(data::gas_capacity(12.0, 3.0) == 4.0, "capacity 12/3");
    require(data::gas_capacity(0.0, 5.0) == 0.0, "shut-in day");
    require(data::gas_capacity(5.0, 0.0) == 0.0, "zero production time");

    // first difference and reconstruction
    Eigen::VectorXd s(3);
    s << 5, 7, 4;
    const Eigen::VectorXd d = data::first_difference(s);
    require(d[0] == 2.0 && d[1] == -3.0, "difference values");
    Rng rng(5);
    Eigen::VectorXd series(30);
    for (Eigen::Index i = 0; i < 30; ++i) series[i] = rng.uniform(-3, 3);
    const Eigen::VectorXd delta = data::first_difference(series);
    double acc = series[0];
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
        acc += delta[i];
        require(std::abs(acc - series[i + 1]) <= 1e-12, "telescoping reconstruction");
    }

    // pooled statistics: formulas, identity case, and the documented
    // difference from the concatenated standard deviation
    {
        const auto [mean, stddev] = data::pooled_stats({{3, 2.0, 1.0}, {3, 2.0, 1.0}});
        require(mean == 2.0 && std::abs(stddev - 1.0) <= 1e-12, "identical groups");
    }
    std::vector<Eigen::VectorXd> raw;
    for (const int n : {6, 10, 15}) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v[i] = rng.uniform(0.0, 2.0) + 3.0 * static_cast<double>(raw.size());  // distinct means
        raw.push_back(v);
    }
    std::vector<data::GroupStats> groups;
    double n_sum = 0, mean_acc = 0, var_acc = 0;
    Eigen::VectorXd all(31);
    Eigen::Index pos = 0;
    for (const auto& v : raw) {
        data::GroupStats g;
        g.count = v.size();
        g.mean = v.mean();
        g.stddev = std::sqrt((v.array() - g.mean).square().sum() / static_cast<double>(v.size() - 1));
        groups.push_back(g);
        n_sum += static_cast<double>(g.count);
        mean_acc += static_cast<double>(g.count) * g.mean;
        var_acc += static_cast<double>(g.count - 1) * g.stddev * g.stddev;
        all.segment(pos, v.size()) = v;
        pos += v.size();
    }
    const auto [pooled_mean, pooled_std] = data::pooled_stats(groups);
    require(std::abs(pooled_mean - mean_acc / n_sum) <= 1e-12, "pooled mean formula");
    require(std::abs(pooled_std - std::sqrt(var_acc / (n_sum - 3.0))) <= 1e-12, "pooled std formula");
    const double all_mean = all.mean();
    const double all_std = std::sqrt((all.array() - all_mean).square().sum() / 30.0);
    require(pooled_std < all_std - 1e-9,
            "pooled std must sit below the concatenated std when group means differ");
    return "capacity, difference, pooled-moment cases all hold";
}

// ---------------------------------------------------------------- 10
std::string run_determinism() {
#ifndef SWARM_CLI_PATH
    throw Failure("SWARM_CLI_PATH not configured");
#else
    const fs::path dir = fs::temp_directory_path() / "swarm_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);

    sl::ExperimentConfig cfg = sl::default_config(data::SeriesKind::Gas);
    cfg.labels = {"W1", "W2", "W3", "W4"};
    cfg.external_per_fold = 1;
    cfg.folds = 1;
    cfg.series_length = 160;
    cfg.hidden_dim = 6;
    cfg.e_max = 4;
    cfg.model_seeds = {0};
    std::ofstream(dir / "config.json") << sl::config_to_json(cfg);

    const std::string cli = SWARM_CLI_PATH;
    auto run = [&](const std::string& config, const std::string& out) {
        const std::string command = cli + " primary --kind gas --config " + config + " --out-dir " +
                                    out + " > " + out + ".log 2>&1";
        return std::system(command.c_str());
    };
    require(run((dir / "config.json").string(), (dir / "a").string()) == 0, "first run failed");
    // the second run starts from the manifest the first produced
    require(run((dir / "a" / "manifest.json").string(), (dir / "b").string()) == 0,
            "manifest rerun failed");

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    for (const std::string name : {"summary.csv", "runs.csv", "epochs.csv", "chain.jsonl"}) {
        const std::string a = slurp(dir / "a" / name);
        const std::string b = slurp(dir / "b" / name);
        require(!a.empty() && a == b, name + " differs between reruns");
    }
    return "summary.csv, runs.csv, epochs.csv and chain.jsonl byte-identical across manifest reruns";
#endif
}

}  // namespace

int main() {
    run_criterion(1, "distributed round equals the centralized step", distributed_step_equivalence);
    run_criterion(2, "analytic gradient matches finite differences", gradient_correctness);
    run_criterion(3, "on-chain aggregation matches the weighted-mean oracle", contract_aggregation_oracle);
    run_criterion(4, "ledger tamper evidence", ledger_tamper_evidence);
    run_criterion(5, "consensus fault matrix", consensus_fault_matrix);
    run_criterion(6, "collaborative runs beat isolated runs on held-out sites", directional_comparison);
    run_criterion(7, "stopping controller trace conformance", controller_trace_conformance);
    run_criterion(8, "exact rank-test enumeration", mann_whitney_exactness);
    run_criterion(9, "preprocessing formula unit cases", preprocessing_formulas);
    run_criterion(10, "byte-identical reruns from a manifest", run_determinism);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
