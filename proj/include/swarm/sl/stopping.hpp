#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>

namespace swarm::sl {

struct StoppingConstants {
    int e_pre = 10;            // epochs before halving or stopping may trigger
    int switch_criterion = 5;  // non-improving epochs that trigger a halving
    int tolerance = 2;         // grace epochs granted after each halving
    int max_switches = 4;      // lifetime halving budget
    int max_no_effect = 2;     // halvings without a new best before stopping

    bool operator==(const StoppingConstants&) const = default;
};

/// Controller state across global epochs. `best_weights` always holds the
/// parameters that achieved the lowest validation loss so far.
struct StoppingState {
    int no_best = 0;    // may rest at -tolerance right after a halving
    int switches = 0;
    int no_effect_switches = 0;
    double learning_rate = 0.0;
    double best_val = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_weights;
    int epoch = 0;
};

enum class StopDecision : std::uint8_t { Continue = 0, HalveLearningRate = 1, Stop = 2 };

/// Advances the early-stopping controller by one global epoch.
///
/// A new validation minimum resets the no-improvement counters and stores
/// the weights. Once `switch_criterion` stale epochs accumulate past the
/// pre-training phase the learning rate halves and the stale counter
/// restarts at -tolerance. The stop test uses the switch counters as they
/// stood on entry, so the epoch that halves never stops itself.
StopDecision stopping_step(StoppingState& state, double val_loss, const Eigen::VectorXd& weights,
                           int epoch, const StoppingConstants& constants);

}  // namespace swarm::sl
