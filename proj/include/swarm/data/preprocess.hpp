#pragma once

#include <array>
#include <optional>

#include "swarm/data/series.hpp"
#include "swarm/nn/gru.hpp"

namespace swarm::data {

struct ConstantColumn : Error {
    explicit ConstantColumn(const std::string& column)
        : Error("column " + column + " is constant and cannot be rescaled") {}
};

struct DegenerateGroup : Error {
    explicit DegenerateGroup(const std::string& what) : Error(what) {}
};

struct ColumnStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1)
};

/// Per-column moments of one dataset, plus optional pooled replacements
/// computed across devices for the standardized (well-log) pipeline.
struct NormStats {
    std::vector<std::string> columns;
    std::vector<ColumnStats> per_column;
    std::vector<double> pooled_mean;  // empty unless pooled stats installed
    std::vector<double> pooled_std;

    const ColumnStats& column(const std::string& name) const;
};

NormStats compute_stats(const SeriesDataset& dataset);

/// (x - min) / (max - min); throws ConstantColumn when max == min.
double minmax_normalize(double x, double min, double max);
double minmax_denormalize(double x, double min, double max);

/// (x - mean) / std; throws ConstantColumn when std == 0.
double standardize(double x, double mean, double stddev);
double destandardize(double x, double mean, double stddev);

/// Applies per-column min-max scaling (PV and gas pipelines).
SeriesDataset normalize_minmax(const SeriesDataset& dataset, const NormStats& stats);

/// Applies per-column standardization using the pooled moments in `stats`.
SeriesDataset normalize_standard(const SeriesDataset& dataset, const NormStats& stats);

/// Daily production capacity: volume / production time on producing days,
/// 0 on non-production days (and when the reported time is 0).
double gas_capacity(double daily_volume, double production_time);

/// delta[t] = series[t+1] - series[t]; one element shorter than the input.
Eigen::VectorXd first_difference(const Eigen::VectorXd& series);

/// Per-device summary exchanged at initialization for pooled statistics.
struct GroupStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

/// Combined mean and standard deviation across device groups:
///   mean = sum(n_k mu_k) / sum(n_k)
///   std  = sqrt( sum((n_k - 1) sigma_k^2) / (sum(n_k) - C) )
/// Throws DegenerateGroup when there are no groups or any group has n < 2.
std::pair<double, double> pooled_stats(const std::vector<GroupStats>& groups);

/// Gas feature pipeline: capacity, its first difference (0 at the first
/// row), and the wellhead pressures; the target becomes the capacity.
SeriesDataset prepare_gas_features(const SeriesDataset& raw);

/// Model-ready column view of any kind. PV and well-log datasets pass
/// through; gas goes through prepare_gas_features.
SeriesDataset prepare_features(const SeriesDataset& raw);

/// Feature columns the models consume: the target's history is a feature
/// for forecasting kinds; well logs exclude the regressed curve.
std::vector<std::string> model_feature_columns(const SeriesDataset& prepared);

enum class WindowMode : std::uint8_t {
    Forecast,  // features strictly precede the target block
    Aligned,   // targets cover the same positions as the window
};

struct WindowSpec {
    Eigen::Index history = 1;
    Eigen::Index horizon = 1;  // ignored in Aligned mode
    Eigen::Index stride = 1;
    WindowMode mode = WindowMode::Forecast;
};

/// Sliding windows over a prepared dataset. Forecast mode pairs `history`
/// steps of features with the next `horizon` target values; Aligned mode
/// pairs the window's features with its own target values.
nn::TrainBatch make_windows(const SeriesDataset& prepared, const WindowSpec& spec);

struct SplitDataset {
    SeriesDataset train;
    SeriesDataset val;
    SeriesDataset test;
};

/// Chronological split: floor(n * train), floor(n * val), remainder.
SplitDataset split_dataset(const SeriesDataset& dataset, double train_fraction, double val_fraction);

/// Chronological split by trailing fixed-size blocks: the last
/// `test_blocks` blocks are the test set, the `val_blocks` before them the
/// validation set, everything earlier the training set.
SplitDataset split_trailing(const SeriesDataset& dataset, Eigen::Index block_len,
                            Eigen::Index val_blocks, Eigen::Index test_blocks);

}  // namespace swarm::data
