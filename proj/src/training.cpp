#include "swarm/nn/training.hpp"

#include <numeric>

namespace swarm::nn {

double evaluate(const GruModel& model, const TrainBatch& data) {
    const ForwardResult fwd = gru_forward(model, data);
    return mse(data.targets, fwd.predictions);
}

TrainBatch gather_batch(const TrainBatch& data, const std::vector<std::size_t>& indices,
                        std::size_t first, std::size_t last) {
    TrainBatch out;
    out.inputs.reserve(last - first);
    out.targets.resize(static_cast<Eigen::Index>(last - first), data.targets.cols());
    for (std::size_t i = first; i < last; ++i) {
        out.inputs.push_back(data.inputs[indices[i]]);
        out.targets.row(static_cast<Eigen::Index>(i - first)) =
            data.targets.row(static_cast<Eigen::Index>(indices[i]));
    }
    return out;
}

TrainBatch merge_batches(const std::vector<TrainBatch>& parts) {
    TrainBatch out;
    Eigen::Index total = 0;
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        total += p.size();
        if (p.size() > 0) cols = p.targets.cols();
    }
    out.targets.resize(total, cols);
    out.inputs.reserve(static_cast<std::size_t>(total));
    Eigen::Index row = 0;
    for (const auto& p : parts) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            out.inputs.push_back(p.inputs[static_cast<std::size_t>(i)]);
            out.targets.row(row++) = p.targets.row(i);
        }
    }
    return out;
}

LocalUpdateResult local_update(const GruModel& start, const TrainBatch& train, const TrainBatch& val,
                               const LocalUpdateConfig& cfg, std::uint64_t seed) {
    if (train.empty()) throw EmptyShard{};
    if (cfg.local_epochs < 1 || cfg.batch_size < 1 || cfg.learning_rate < 0.0)
        throw Error("local update config values must be positive");

    GruModel model = start;
    Eigen::VectorXd weights = flatten(model);
    Rng rng(seed);
    std::vector<std::size_t> order(static_cast<std::size_t>(train.size()));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(cfg.batch_size));
            const TrainBatch minibatch = gather_batch(train, order, first, last);
            const ForwardResult fwd = gru_forward(model, minibatch);
            const BackwardResult back = gru_backward(model, minibatch, fwd.cache);
            weights -= cfg.learning_rate * back.gradient;
            model = unflatten(weights, model.dims);
        }
    }

    LocalUpdateResult result;
    result.weights = std::move(weights);
    result.train_loss = evaluate(model, train);
    result.val_loss = val.empty() ? 0.0 : evaluate(model, val);
    return result;
}

}  // namespace swarm::nn
