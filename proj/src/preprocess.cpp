#include "swarm/data/preprocess.hpp"

#include <cmath>

namespace swarm::data {

const ColumnStats& NormStats::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return per_column[i];
    throw Error("no stats for column " + name);
}

NormStats compute_stats(const SeriesDataset& dataset) {
    NormStats stats;
    stats.columns = dataset.columns;
    stats.per_column.resize(dataset.columns.size());
    const double n = static_cast<double>(dataset.rows());
    for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
        const auto col = dataset.values.col(static_cast<Eigen::Index>(c));
        ColumnStats& s = stats.per_column[c];
        s.min = col.minCoeff();
        s.max = col.maxCoeff();
        s.mean = col.mean();
        s.stddev = n > 1 ? std::sqrt((col.array() - s.mean).square().sum() / (n - 1.0)) : 0.0;
    }
    return stats;
}

double minmax_normalize(double x, double min, double max) {
    if (max == min) throw ConstantColumn("<scalar>");
    return (x - min) / (max - min);
}

double minmax_denormalize(double x, double min, double max) { return min + x * (max - min); }

double standardize(double x, double mean, double stddev) {
    if (stddev == 0.0) throw ConstantColumn("<scalar>");
    return (x - mean) / stddev;
}

double destandardize(double x, double mean, double stddev) { return mean + x * stddev; }

SeriesDataset normalize_minmax(const SeriesDataset& dataset, const NormStats& stats) {
    SeriesDataset out = dataset;
    for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
        const ColumnStats& s = stats.column(dataset.columns[c]);
        if (s.max == s.min) throw ConstantColumn(dataset.columns[c]);
        out.values.col(static_cast<Eigen::Index>(c)) =
            (dataset.values.col(static_cast<Eigen::Index>(c)).array() - s.min) / (s.max - s.min);
    }
    return out;
}

SeriesDataset normalize_standard(const SeriesDataset& dataset, const NormStats& stats) {
    if (stats.pooled_mean.size() != dataset.columns.size() ||
        stats.pooled_std.size() != dataset.columns.size())
        throw Error("pooled statistics missing for standardization");
    SeriesDataset out = dataset;
    for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
        if (stats.pooled_std[c] == 0.0) throw ConstantColumn(dataset.columns[c]);
        out.values.col(static_cast<Eigen::Index>(c)) =
            (dataset.values.col(static_cast<Eigen::Index>(c)).array() - stats.pooled_mean[c]) /
            stats.pooled_std[c];
    }
    return out;
}

double gas_capacity(double daily_volume, double production_time) {
    if (production_time > 0.0 && daily_volume > 0.0) return daily_volume / production_time;
    return 0.0;
}

Eigen::VectorXd first_difference(const Eigen::VectorXd& series) {
    if (series.size() < 2) throw Error("first difference needs at least two samples");
    return series.tail(series.size() - 1) - series.head(series.size() - 1);
}

std::pair<double, double> pooled_stats(const std::vector<GroupStats>& groups) {
    if (groups.empty()) throw DegenerateGroup("pooled statistics over zero groups");
    double count_sum = 0.0;
    double mean_acc = 0.0;
    double var_acc = 0.0;
    for (const GroupStats& g : groups) {
        if (g.count < 2) throw DegenerateGroup("group with fewer than two samples");
        count_sum += static_cast<double>(g.count);
        mean_acc += static_cast<double>(g.count) * g.mean;
        var_acc += static_cast<double>(g.count - 1) * g.stddev * g.stddev;
    }
    const double mean = mean_acc / count_sum;
    const double stddev = std::sqrt(var_acc / (count_sum - static_cast<double>(groups.size())));
    return {mean, stddev};
}

SeriesDataset prepare_gas_features(const SeriesDataset& raw) {
    const Eigen::VectorXd volume = raw.column("DHG");
    const Eigen::VectorXd time = raw.column("PT");
    const Eigen::Index n = raw.rows();
    Eigen::VectorXd capacity(n);
    for (Eigen::Index t = 0; t < n; ++t) capacity[t] = gas_capacity(volume[t], time[t]);
    const Eigen::VectorXd delta = first_difference(capacity);

    SeriesDataset out;
    out.label = raw.label;
    out.kind = raw.kind;
    out.columns = {"E_gas", "dE_gas", "CP", "TP"};
    out.target_column = "E_gas";
    out.values.resize(n, 4);
    out.values.col(0) = capacity;
    out.values(0, 1) = 0.0;
    out.values.col(1).tail(n - 1) = delta;
    out.values.col(2) = raw.column("CP");
    out.values.col(3) = raw.column("TP");
    return out;
}

SeriesDataset prepare_features(const SeriesDataset& raw) {
    if (raw.kind == SeriesKind::Gas) return prepare_gas_features(raw);
    return raw;
}

std::vector<std::string> model_feature_columns(const SeriesDataset& prepared) {
    std::vector<std::string> features;
    for (const std::string& c : prepared.columns)
        if (prepared.kind != SeriesKind::WellLog || c != prepared.target_column) features.push_back(c);
    return features;
}

nn::TrainBatch make_windows(const SeriesDataset& prepared, const WindowSpec& spec) {
    if (spec.history < 1 || spec.stride < 1) throw Error("window history and stride must be positive");
    if (spec.mode == WindowMode::Forecast && spec.horizon < 1)
        throw Error("forecast windows need a positive horizon");

    const std::vector<std::string> features = model_feature_columns(prepared);
    std::vector<Eigen::Index> feature_cols;
    for (const auto& f : features) feature_cols.push_back(prepared.column_index(f));
    const Eigen::Index target_col = prepared.column_index(prepared.target_column);

    const Eigen::Index n = prepared.rows();
    const Eigen::Index horizon = spec.mode == WindowMode::Forecast ? spec.horizon : 0;
    const Eigen::Index span = spec.history + horizon;
    const Eigen::Index target_len = spec.mode == WindowMode::Forecast ? spec.horizon : spec.history;

    nn::TrainBatch batch;
    if (n < span) {
        batch.targets.resize(0, target_len);
        return batch;
    }
    const Eigen::Index count = (n - span) / spec.stride + 1;
    batch.targets.resize(count, target_len);
    batch.inputs.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index w = 0; w < count; ++w) {
        const Eigen::Index start = w * spec.stride;
        Eigen::MatrixXd input(spec.history, static_cast<Eigen::Index>(feature_cols.size()));
        for (std::size_t c = 0; c < feature_cols.size(); ++c)
            input.col(static_cast<Eigen::Index>(c)) =
                prepared.values.col(feature_cols[c]).segment(start, spec.history);
        batch.inputs.push_back(std::move(input));
        const Eigen::Index target_start = spec.mode == WindowMode::Forecast ? start + spec.history : start;
        batch.targets.row(w) =
            prepared.values.col(target_col).segment(target_start, target_len).transpose();
    }
    return batch;
}

namespace {

SeriesDataset take_rows(const SeriesDataset& dataset, Eigen::Index start, Eigen::Index count) {
    SeriesDataset out;
    out.label = dataset.label;
    out.kind = dataset.kind;
    out.columns = dataset.columns;
    out.target_column = dataset.target_column;
    out.values = dataset.values.middleRows(start, count);
    return out;
}

}  // namespace

SplitDataset split_dataset(const SeriesDataset& dataset, double train_fraction, double val_fraction) {
    if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0)
        throw Error("split fractions must be nonnegative and sum to at most 1");
    const Eigen::Index n = dataset.rows();
    const Eigen::Index n_train = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * train_fraction));
    const Eigen::Index n_val = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * val_fraction));
    return {take_rows(dataset, 0, n_train), take_rows(dataset, n_train, n_val),
            take_rows(dataset, n_train + n_val, n - n_train - n_val)};
}

SplitDataset split_trailing(const SeriesDataset& dataset, Eigen::Index block_len,
                            Eigen::Index val_blocks, Eigen::Index test_blocks) {
    if (block_len < 1 || val_blocks < 0 || test_blocks < 0) throw Error("invalid trailing split");
    const Eigen::Index n = dataset.rows();
    const Eigen::Index n_val = val_blocks * block_len;
    const Eigen::Index n_test = test_blocks * block_len;
    if (n_val + n_test >= n) throw Error("trailing blocks consume the whole series");
    const Eigen::Index n_train = n - n_val - n_test;
    return {take_rows(dataset, 0, n_train), take_rows(dataset, n_train, n_val),
            take_rows(dataset, n_train + n_val, n_test)};
}

}  // namespace swarm::data
