#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "swarm/errors.hpp"
#include "swarm/rng.hpp"

namespace swarm::nn {

struct BadShape : Error {
    explicit BadShape(const std::string& what) : Error(what) {}
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Swish(x) = x * sigmoid(x); smooth everywhere, used as the output
/// activation for nonnegative load forecasting.
inline double swish(double x) { return x * sigmoid(x); }

inline double swish_grad(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

/// Mean squared error over all coefficients of equally shaped arrays.
double mse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

enum class OutputActivation : std::uint8_t { Identity = 0, Swish = 1 };

/// A batch of sequence windows: inputs[b] is a T x k matrix of features in
/// time order, targets row b holds the sample's output vector.
struct TrainBatch {
    std::vector<Eigen::MatrixXd> inputs;
    Eigen::MatrixXd targets;

    Eigen::Index size() const { return static_cast<Eigen::Index>(inputs.size()); }
    bool empty() const { return inputs.empty(); }
};

struct GruDims {
    Eigen::Index input_dim = 1;
    Eigen::Index hidden_dim = 1;
    Eigen::Index output_dim = 1;
    bool bidirectional = false;
    OutputActivation output_activation = OutputActivation::Identity;

    bool operator==(const GruDims&) const = default;

    Eigen::Index state_dim() const { return bidirectional ? 2 * hidden_dim : hidden_dim; }
    Eigen::Index param_count() const;
};

/// Gate weights of one recurrence direction.
///
/// Cell equations, h_0 = 0:
///   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
///   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
///   c_t = tanh(Wc x_t + Uc (r_t .* h_{t-1}) + bc)
///   h_t = (1 - z_t) .* c_t + z_t .* h_{t-1}
struct GruCell {
    Eigen::MatrixXd w_update, u_update;
    Eigen::VectorXd b_update;
    Eigen::MatrixXd w_reset, u_reset;
    Eigen::VectorXd b_reset;
    Eigen::MatrixXd w_cand, u_cand;
    Eigen::VectorXd b_cand;
};

/// Recurrent sequence model: one or two GRU directions whose final hidden
/// states feed a dense output layer. The backward direction consumes the
/// input window in reverse order and contributes its own final state.
struct GruModel {
    GruDims dims;
    GruCell forward_cell;
    GruCell backward_cell;  // unused unless dims.bidirectional
    Eigen::MatrixXd w_out;  // output_dim x state_dim
    Eigen::VectorXd b_out;
};

/// All-zero parameters (predictions are the output bias through the
/// activation).
GruModel zero_model(const GruDims& dims);

/// Seeded init: every parameter uniform in (-1/sqrt(hidden), +1/sqrt(hidden)).
GruModel init_model(const GruDims& dims, std::uint64_t seed);

/// Per-sample activations retained for backpropagation through time.
struct ForwardCache {
    struct DirectionTrace {
        std::vector<Eigen::VectorXd> hidden;  // h_0 .. h_T
        std::vector<Eigen::VectorXd> update, reset, cand;
    };
    struct SampleTrace {
        DirectionTrace forward;
        DirectionTrace backward;
        Eigen::VectorXd state;          // concatenated final hidden state(s)
        Eigen::VectorXd preactivation;  // w_out * state + b_out
    };
    std::vector<SampleTrace> samples;
};

struct ForwardResult {
    Eigen::MatrixXd predictions;  // batch x output_dim
    ForwardCache cache;
};

ForwardResult gru_forward(const GruModel& model, const TrainBatch& batch);

struct BackwardResult {
    Eigen::VectorXd gradient;  // flattened, canonical order
    double loss = 0.0;
};

/// Gradient of the batch-mean MSE with respect to every parameter. The
/// cache must come from gru_forward on the same model and batch.
BackwardResult gru_backward(const GruModel& model, const TrainBatch& batch, const ForwardCache& cache);

/// Canonical flat layout: forward cell, then backward cell when present,
/// then output layer; within a cell Wz,Uz,bz,Wr,Ur,br,Wc,Uc,bc; matrices in
/// column-major coefficient order. flatten/unflatten round-trip exactly.
Eigen::VectorXd flatten(const GruModel& model);
GruModel unflatten(const Eigen::VectorXd& flat, const GruDims& dims);

}  // namespace swarm::nn
