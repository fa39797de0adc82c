#include "swarm/sl/stopping.hpp"

namespace swarm::sl {

StopDecision stopping_step(StoppingState& state, double val_loss, const Eigen::VectorXd& weights,
                           int epoch, const StoppingConstants& constants) {
    state.epoch = epoch;
    const bool stop_criterion = state.no_effect_switches >= constants.max_no_effect ||
                                state.switches >= constants.max_switches;

    if (val_loss < state.best_val) {
        state.best_val = val_loss;
        state.no_best = 0;
        state.no_effect_switches = 0;
        state.best_weights = weights;
    } else {
        state.no_best += 1;
    }

    StopDecision decision = StopDecision::Continue;
    if (state.no_best >= constants.switch_criterion && epoch > constants.e_pre) {
        state.learning_rate *= 0.5;
        state.no_effect_switches += 1;
        state.switches += 1;
        state.no_best = -constants.tolerance;
        decision = StopDecision::HalveLearningRate;
    }

    if (epoch > constants.e_pre && stop_criterion) return StopDecision::Stop;
    return decision;
}

}  // namespace swarm::sl
