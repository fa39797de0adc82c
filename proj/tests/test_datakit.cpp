#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swarm/data/preprocess.hpp"

using namespace swarm;
using namespace swarm::data;

TEST_CASE("minmax normalization") {
    CHECK(minmax_normalize(0.0, 0.0, 3817.0) == 0.0);
    CHECK(minmax_normalize(3817.0, 0.0, 3817.0) == 1.0);
    CHECK(minmax_normalize(1065.97, 0.0, 3817.0) == doctest::Approx(0.279269).epsilon(1e-5));
    CHECK_THROWS_AS(minmax_normalize(1.0, 2.0, 2.0), ConstantColumn);

    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(-5.0, 5.0);
        CHECK(minmax_denormalize(minmax_normalize(x, -5.0, 5.0), -5.0, 5.0) ==
              doctest::Approx(x).epsilon(1e-12));
        CHECK(destandardize(standardize(x, 1.5, 2.5), 1.5, 2.5) == doctest::Approx(x).epsilon(1e-12));
    }
    CHECK_THROWS_AS(standardize(1.0, 0.0, 0.0), ConstantColumn);
}

TEST_CASE("gas capacity piecewise rule") {
    CHECK(gas_capacity(12.0, 3.0) == 4.0);
    CHECK(gas_capacity(0.0, 8.0) == 0.0);   // shut-in day
    CHECK(gas_capacity(5.0, 0.0) == 0.0);   // degenerate: no production time reported
}

TEST_CASE("first difference") {
    Eigen::VectorXd s(3);
    s << 5, 7, 4;
    const Eigen::VectorXd d = first_difference(s);
    CHECK(d.size() == 2);
    CHECK(d[0] == 2.0);
    CHECK(d[1] == -3.0);

    CHECK(first_difference(Eigen::VectorXd::Constant(6, 3.5)).isZero());

    Rng rng(2);
    Eigen::VectorXd series(40);
    for (Eigen::Index i = 0; i < series.size(); ++i) series[i] = rng.uniform(-10, 10);
    const Eigen::VectorXd delta = first_difference(series);
    double acc = series[0];
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
        acc += delta[i];
        CHECK(acc == doctest::Approx(series[i + 1]).epsilon(1e-12));
    }
}

namespace {

GroupStats stats_of(const Eigen::VectorXd& v) {
    GroupStats g;
    g.count = v.size();
    g.mean = v.mean();
    g.stddev = std::sqrt((v.array() - g.mean).square().sum() / static_cast<double>(v.size() - 1));
    return g;
}

}  // namespace

TEST_CASE("pooled statistics") {
    SUBCASE("two identical groups") {
        const auto [mean, stddev] = pooled_stats({{3, 2.0, 1.0}, {3, 2.0, 1.0}});
        CHECK(mean == 2.0);
        CHECK(stddev == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("single group is the identity") {
        const auto [mean, stddev] = pooled_stats({{7, -1.25, 0.75}});
        CHECK(mean == -1.25);
        CHECK(stddev == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("degenerate groups rejected") {
        CHECK_THROWS_AS(pooled_stats({}), DegenerateGroup);
        CHECK_THROWS_AS(pooled_stats({{3, 0.0, 1.0}, {1, 0.0, 1.0}}), DegenerateGroup);
    }
    SUBCASE("three unequal groups against a raw-data recomputation") {
        Rng rng(3);
        std::vector<Eigen::VectorXd> raw;
        for (const Eigen::Index n : {5, 9, 14}) {
            Eigen::VectorXd v(n);
            for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(0.0, 4.0) + static_cast<double>(raw.size());
            raw.push_back(v);
        }
        std::vector<GroupStats> groups;
        for (const auto& v : raw) groups.push_back(stats_of(v));
        const auto [mean, stddev] = pooled_stats(groups);

        // independent recomputation of the combining formulas
        double n_sum = 0, mean_acc = 0, var_acc = 0;
        for (const auto& g : groups) {
            n_sum += static_cast<double>(g.count);
            mean_acc += static_cast<double>(g.count) * g.mean;
            var_acc += static_cast<double>(g.count - 1) * g.stddev * g.stddev;
        }
        CHECK(mean == doctest::Approx(mean_acc / n_sum).epsilon(1e-12));
        CHECK(stddev == doctest::Approx(std::sqrt(var_acc / (n_sum - 3.0))).epsilon(1e-12));

        // pooled std deliberately ignores between-group mean spread, so it
        // differs from the standard deviation of the concatenated data when
        // group means differ
        Eigen::VectorXd all(5 + 9 + 14);
        all << raw[0], raw[1], raw[2];
        const GroupStats whole = stats_of(all);
        CHECK(stddev < whole.stddev - 1e-6);
    }
    SUBCASE("permutation invariance") {
        const std::vector<GroupStats> a{{4, 1.0, 0.5}, {6, -2.0, 1.5}, {9, 0.25, 2.0}};
        const std::vector<GroupStats> b{a[2], a[0], a[1]};
        CHECK(pooled_stats(a) == pooled_stats(b));
    }
}

TEST_CASE("window construction") {
    SeriesDataset d;
    d.label = "t";
    d.kind = SeriesKind::Gas;
    d.columns = {"E_gas", "x"};
    d.target_column = "E_gas";
    d.values.resize(10, 2);
    for (Eigen::Index i = 0; i < 10; ++i) {
        d.values(i, 0) = static_cast<double>(i);
        d.values(i, 1) = 100.0 + static_cast<double>(i);
    }

    SUBCASE("counting") {
        const nn::TrainBatch w = make_windows(d, {.history = 7, .horizon = 1, .stride = 1});
        REQUIRE(w.size() == 3);
        CHECK(w.inputs[0](0, 0) == 0.0);
        CHECK(w.inputs[0](6, 0) == 6.0);
        CHECK(w.targets(0, 0) == 7.0);  // first target strictly after the window
        CHECK(w.targets(2, 0) == 9.0);
    }
    SUBCASE("stride equal to the series length") {
        CHECK(make_windows(d, {.history = 7, .horizon = 1, .stride = 10}).size() == 1);
        CHECK(make_windows(d, {.history = 10, .horizon = 1, .stride = 10}).size() == 0);
    }
    SUBCASE("aligned mode pairs same positions") {
        SeriesDataset log = d;
        log.kind = SeriesKind::WellLog;
        log.columns = {"DTSM", "GR"};
        log.target_column = "DTSM";
        const nn::TrainBatch w = make_windows(log, {.history = 4, .stride = 2, .mode = WindowMode::Aligned});
        REQUIRE(w.size() == 4);
        CHECK(w.inputs[0].cols() == 1);  // regressed curve is not a feature
        CHECK(w.inputs[0](0, 0) == 100.0);
        CHECK(w.targets(0, 0) == 0.0);
        CHECK(w.targets(0, 3) == 3.0);
        CHECK(w.targets(1, 0) == 2.0);
    }
}

TEST_CASE("chronological splits") {
    SeriesDataset d;
    d.label = "t";
    d.kind = SeriesKind::Gas;
    d.columns = {"E_gas"};
    d.target_column = "E_gas";

    SUBCASE("exact fractions") {
        d.values.resize(100, 1);
        d.values.col(0).setLinSpaced(100, 0, 99);
        const SplitDataset s = split_dataset(d, 0.7, 0.2);
        CHECK(s.train.rows() == 70);
        CHECK(s.val.rows() == 20);
        CHECK(s.test.rows() == 10);
        CHECK(s.train.values(69, 0) == 69.0);
        CHECK(s.val.values(0, 0) == 70.0);
        CHECK(s.test.values(9, 0) == 99.0);
    }
    SUBCASE("remainder goes to the test set") {
        d.values.resize(101, 1);
        d.values.setZero();
        const SplitDataset s = split_dataset(d, 0.7, 0.2);
        CHECK(s.train.rows() == 70);
        CHECK(s.val.rows() == 20);
        CHECK(s.test.rows() == 11);
    }
    SUBCASE("trailing blocks: an 18-month series keeps the last 2+2 months out of training") {
        const Eigen::Index month = 360;  // 30 days x 12 daylight samples
        d.values.resize(18 * month, 1);
        d.values.setZero();
        const SplitDataset s = split_trailing(d, month, 2, 2);
        CHECK(s.train.rows() == 14 * month);
        CHECK(s.val.rows() == 2 * month);
        CHECK(s.test.rows() == 2 * month);
    }
}

TEST_CASE("generated series reproduce the profile moments") {
    for (const SeriesKind kind : {SeriesKind::PV, SeriesKind::Gas, SeriesKind::WellLog}) {
        for (const std::string& label : site_labels(kind)) {
            const SeriesDataset raw = gen_series(kind, label, 0);
            const SiteProfile& profile = site_profile(kind, label);
            REQUIRE(raw.rows() == profile.count);

            const SeriesDataset prepared = prepare_features(raw);
            const Eigen::VectorXd target = prepared.column(prepared.target_column);
            const double mean = target.mean();
            const double stddev =
                std::sqrt((target.array() - mean).square().sum() / static_cast<double>(target.size() - 1));
            INFO("kind ", kind_name(kind), " label ", label, " mean ", mean, " std ", stddev);
            CHECK(std::abs(mean - profile.mean) <= 0.15 * profile.mean);
            CHECK(std::abs(stddev - profile.stddev) <= 0.15 * profile.stddev);
            CHECK(target.maxCoeff() <= 1.2 * profile.max);
            CHECK(target.minCoeff() >= profile.min - 1e-9);
        }
    }
}

TEST_CASE("generator determinism") {
    const SeriesDataset a = gen_series(SeriesKind::Gas, "W16", 5);
    const SeriesDataset b = gen_series(SeriesKind::Gas, "W16", 5);
    CHECK(a.rows() == 440);  // profile-configured length
    CHECK(a.values == b.values);
    const SeriesDataset c = gen_series(SeriesKind::Gas, "W16", 6);
    CHECK(a.values != c.values);
    const SeriesDataset d = gen_series(SeriesKind::Gas, "W15", 5, 440);
    CHECK(a.values != d.values);  // label feeds the stream
}

TEST_CASE("gas reconstruction: capacity times production time recovers the volume") {
    const SeriesDataset raw = gen_series(SeriesKind::Gas, "W3", 11, 600);
    const SeriesDataset prepared = prepare_gas_features(raw);
    const Eigen::VectorXd volume = raw.column("DHG");
    const Eigen::VectorXd time = raw.column("PT");
    const Eigen::VectorXd capacity = prepared.column("E_gas");
    for (Eigen::Index t = 0; t < raw.rows(); ++t) {
        if (time[t] > 0.0 && volume[t] > 0.0)
            CHECK(capacity[t] * time[t] == doctest::Approx(volume[t]).epsilon(1e-12));
        else
            CHECK(capacity[t] == 0.0);
    }
}

TEST_CASE("pv series stays inside daylight structure") {
    const SeriesDataset pv = gen_series(SeriesKind::PV, "P1", 3, 1200);
    const Eigen::VectorXd load = pv.column("elec_num");
    CHECK(load.minCoeff() >= 0.0);
    for (Eigen::Index day = 0; day < 1200 / 12; ++day) CHECK(load[day * 12] == 0.0);  // 6:00 edge
}

TEST_CASE("normalized pipelines round trip") {
    const SeriesDataset raw = gen_series(SeriesKind::WellLog, "A3", 17, 800);
    const NormStats stats = compute_stats(raw);

    SeriesDataset minmaxed = normalize_minmax(raw, stats);
    for (const std::string& col : raw.columns) {
        CHECK(minmaxed.column(col).minCoeff() >= 0.0);
        CHECK(minmaxed.column(col).maxCoeff() <= 1.0 + 1e-12);
    }

    NormStats pooled = stats;
    for (const ColumnStats& s : stats.per_column) {
        pooled.pooled_mean.push_back(s.mean);
        pooled.pooled_std.push_back(s.stddev);
    }
    const SeriesDataset standardized = normalize_standard(raw, pooled);
    for (std::size_t c = 0; c < raw.columns.size(); ++c) {
        const Eigen::VectorXd back =
            (standardized.values.col(static_cast<Eigen::Index>(c)).array() * pooled.pooled_std[c] +
             pooled.pooled_mean[c])
                .matrix();
        CHECK((back - raw.values.col(static_cast<Eigen::Index>(c))).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("csv round trip") {
    const SeriesDataset raw = gen_series(SeriesKind::Gas, "W16", 5, 50);
    const std::string csv = dataset_to_csv(raw);
    const SeriesDataset back = dataset_from_csv(csv, raw.kind, raw.label, raw.target_column);
    CHECK(back.columns == raw.columns);
    CHECK((back.values - raw.values).cwiseAbs().maxCoeff() <= 1e-12);
}
