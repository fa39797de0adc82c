#pragma once

#include "swarm/nn/gru.hpp"

namespace swarm::nn {

struct EmptyShard : Error {
    EmptyShard() : Error("local update on an empty data shard") {}
};

struct LocalUpdateConfig {
    int local_epochs = 1;
    Eigen::Index batch_size = 32;
    double learning_rate = 0.05;

    bool operator==(const LocalUpdateConfig&) const = default;
};

struct LocalUpdateResult {
    Eigen::VectorXd weights;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

/// MSE of the model's predictions over a sample set.
double evaluate(const GruModel& model, const TrainBatch& data);

/// Plain minibatch SGD: `local_epochs` passes over the shard in seeded
/// shuffled order, step w <- w - lr * grad. Losses are evaluated with the
/// final weights on the train shard and on `val` (0 when `val` is empty).
LocalUpdateResult local_update(const GruModel& start, const TrainBatch& train, const TrainBatch& val,
                               const LocalUpdateConfig& cfg, std::uint64_t seed);

/// Extracts samples `indices[first, last)` of `data` as a minibatch.
TrainBatch gather_batch(const TrainBatch& data, const std::vector<std::size_t>& indices,
                        std::size_t first, std::size_t last);

/// Concatenates sample sets.
TrainBatch merge_batches(const std::vector<TrainBatch>& parts);

}  // namespace swarm::nn
