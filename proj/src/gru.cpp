#include "swarm/nn/gru.hpp"

namespace swarm::nn {

double mse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
        throw BadShape("mse operands differ in shape");
    if (truth.size() == 0) throw BadShape("mse of empty arrays");
    return (truth - estimate).array().square().sum() / static_cast<double>(truth.size());
}

Eigen::Index GruDims::param_count() const {
    const Eigen::Index cell = 3 * (hidden_dim * input_dim + hidden_dim * hidden_dim + hidden_dim);
    const Eigen::Index directions = bidirectional ? 2 : 1;
    return directions * cell + output_dim * state_dim() + output_dim;
}

namespace {

GruCell zero_cell(const GruDims& d) {
    GruCell c;
    c.w_update = Eigen::MatrixXd::Zero(d.hidden_dim, d.input_dim);
    c.u_update = Eigen::MatrixXd::Zero(d.hidden_dim, d.hidden_dim);
    c.b_update = Eigen::VectorXd::Zero(d.hidden_dim);
    c.w_reset = c.w_update;
    c.u_reset = c.u_update;
    c.b_reset = c.b_update;
    c.w_cand = c.w_update;
    c.u_cand = c.u_update;
    c.b_cand = c.b_update;
    return c;
}

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double bound) {
    for (Eigen::Index col = 0; col < m.cols(); ++col)
        for (Eigen::Index row = 0; row < m.rows(); ++row) m(row, col) = rng.uniform(-bound, bound);
}

void fill_uniform(Eigen::VectorXd& v, Rng& rng, double bound) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-bound, bound);
}

void init_cell(GruCell& c, Rng& rng, double bound) {
    fill_uniform(c.w_update, rng, bound);
    fill_uniform(c.u_update, rng, bound);
    fill_uniform(c.b_update, rng, bound);
    fill_uniform(c.w_reset, rng, bound);
    fill_uniform(c.u_reset, rng, bound);
    fill_uniform(c.b_reset, rng, bound);
    fill_uniform(c.w_cand, rng, bound);
    fill_uniform(c.u_cand, rng, bound);
    fill_uniform(c.b_cand, rng, bound);
}

struct CellGrad {
    Eigen::MatrixXd w_update, u_update;
    Eigen::VectorXd b_update;
    Eigen::MatrixXd w_reset, u_reset;
    Eigen::VectorXd b_reset;
    Eigen::MatrixXd w_cand, u_cand;
    Eigen::VectorXd b_cand;
};

CellGrad zero_cell_grad(const GruDims& d) {
    CellGrad g;
    g.w_update = Eigen::MatrixXd::Zero(d.hidden_dim, d.input_dim);
    g.u_update = Eigen::MatrixXd::Zero(d.hidden_dim, d.hidden_dim);
    g.b_update = Eigen::VectorXd::Zero(d.hidden_dim);
    g.w_reset = g.w_update;
    g.u_reset = g.u_update;
    g.b_reset = g.b_update;
    g.w_cand = g.w_update;
    g.u_cand = g.u_update;
    g.b_cand = g.b_update;
    return g;
}

/// Runs one direction over `input` rows in the given order; records traces.
void run_direction(const GruCell& cell, const Eigen::MatrixXd& input, bool reversed,
                   ForwardCache::DirectionTrace& trace, Eigen::Index hidden_dim) {
    const Eigen::Index steps = input.rows();
    trace.hidden.assign(static_cast<std::size_t>(steps) + 1, Eigen::VectorXd::Zero(hidden_dim));
    trace.update.resize(static_cast<std::size_t>(steps));
    trace.reset.resize(static_cast<std::size_t>(steps));
    trace.cand.resize(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
        const Eigen::Index row = reversed ? steps - 1 - t : t;
        const Eigen::VectorXd x = input.row(row).transpose();
        const Eigen::VectorXd& h_prev = trace.hidden[static_cast<std::size_t>(t)];
        Eigen::VectorXd z = (cell.w_update * x + cell.u_update * h_prev + cell.b_update)
                                .unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd r = (cell.w_reset * x + cell.u_reset * h_prev + cell.b_reset)
                                .unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd c = (cell.w_cand * x + cell.u_cand * (r.cwiseProduct(h_prev)) + cell.b_cand)
                                .unaryExpr([](double v) { return std::tanh(v); });
        trace.hidden[static_cast<std::size_t>(t) + 1] =
            (Eigen::VectorXd::Ones(hidden_dim) - z).cwiseProduct(c) + z.cwiseProduct(h_prev);
        trace.update[static_cast<std::size_t>(t)] = std::move(z);
        trace.reset[static_cast<std::size_t>(t)] = std::move(r);
        trace.cand[static_cast<std::size_t>(t)] = std::move(c);
    }
}

/// Backpropagates one direction; `d_final` is the loss gradient w.r.t. the
/// direction's last hidden state.
void backprop_direction(const GruCell& cell, const Eigen::MatrixXd& input, bool reversed,
                        const ForwardCache::DirectionTrace& trace, const Eigen::VectorXd& d_final,
                        CellGrad& grad) {
    const Eigen::Index steps = input.rows();
    Eigen::VectorXd dh = d_final;
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        const Eigen::Index row = reversed ? steps - 1 - t : t;
        const Eigen::VectorXd x = input.row(row).transpose();
        const Eigen::VectorXd& h_prev = trace.hidden[ti];
        const Eigen::VectorXd& z = trace.update[ti];
        const Eigen::VectorXd& r = trace.reset[ti];
        const Eigen::VectorXd& c = trace.cand[ti];

        const Eigen::VectorXd dz = dh.cwiseProduct(h_prev - c);
        const Eigen::VectorXd dc = dh.cwiseProduct(Eigen::VectorXd::Ones(dh.size()) - z);
        const Eigen::VectorXd da_c = dc.cwiseProduct((1.0 - c.array().square()).matrix());
        const Eigen::VectorXd u_cand_back = cell.u_cand.transpose() * da_c;
        const Eigen::VectorXd dr = u_cand_back.cwiseProduct(h_prev);
        const Eigen::VectorXd da_r = dr.cwiseProduct(r.cwiseProduct(Eigen::VectorXd::Ones(r.size()) - r));
        const Eigen::VectorXd da_z = dz.cwiseProduct(z.cwiseProduct(Eigen::VectorXd::Ones(z.size()) - z));

        grad.w_cand.noalias() += da_c * x.transpose();
        grad.u_cand.noalias() += da_c * (r.cwiseProduct(h_prev)).transpose();
        grad.b_cand += da_c;
        grad.w_reset.noalias() += da_r * x.transpose();
        grad.u_reset.noalias() += da_r * h_prev.transpose();
        grad.b_reset += da_r;
        grad.w_update.noalias() += da_z * x.transpose();
        grad.u_update.noalias() += da_z * h_prev.transpose();
        grad.b_update += da_z;

        dh = dh.cwiseProduct(z) + cell.u_update.transpose() * da_z + cell.u_reset.transpose() * da_r +
             u_cand_back.cwiseProduct(r);
    }
}

void check_batch(const GruModel& model, const TrainBatch& batch) {
    if (batch.empty()) throw BadShape("empty batch");
    if (batch.targets.rows() != batch.size()) throw BadShape("targets row count differs from batch size");
    if (batch.targets.cols() != model.dims.output_dim) throw BadShape("targets width differs from output_dim");
    for (const auto& input : batch.inputs) {
        if (input.rows() < 1) throw BadShape("window must contain at least one step");
        if (input.cols() != model.dims.input_dim) throw BadShape("input width differs from input_dim");
    }
}

}  // namespace

GruModel zero_model(const GruDims& dims) {
    GruModel m;
    m.dims = dims;
    m.forward_cell = zero_cell(dims);
    m.backward_cell = zero_cell(dims);
    m.w_out = Eigen::MatrixXd::Zero(dims.output_dim, dims.state_dim());
    m.b_out = Eigen::VectorXd::Zero(dims.output_dim);
    return m;
}

GruModel init_model(const GruDims& dims, std::uint64_t seed) {
    GruModel m = zero_model(dims);
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden_dim));
    init_cell(m.forward_cell, rng, bound);
    if (dims.bidirectional) init_cell(m.backward_cell, rng, bound);
    fill_uniform(m.w_out, rng, bound);
    fill_uniform(m.b_out, rng, bound);
    return m;
}

ForwardResult gru_forward(const GruModel& model, const TrainBatch& batch) {
    check_batch(model, batch);
    const GruDims& d = model.dims;
    ForwardResult out;
    out.predictions.resize(batch.size(), d.output_dim);
    out.cache.samples.resize(static_cast<std::size_t>(batch.size()));
    for (Eigen::Index b = 0; b < batch.size(); ++b) {
        auto& sample = out.cache.samples[static_cast<std::size_t>(b)];
        const Eigen::MatrixXd& input = batch.inputs[static_cast<std::size_t>(b)];
        run_direction(model.forward_cell, input, false, sample.forward, d.hidden_dim);
        sample.state.resize(d.state_dim());
        sample.state.head(d.hidden_dim) = sample.forward.hidden.back();
        if (d.bidirectional) {
            run_direction(model.backward_cell, input, true, sample.backward, d.hidden_dim);
            sample.state.tail(d.hidden_dim) = sample.backward.hidden.back();
        }
        sample.preactivation = model.w_out * sample.state + model.b_out;
        Eigen::VectorXd y = sample.preactivation;
        if (d.output_activation == OutputActivation::Swish)
            y = y.unaryExpr([](double v) { return swish(v); });
        out.predictions.row(b) = y.transpose();
    }
    return out;
}

BackwardResult gru_backward(const GruModel& model, const TrainBatch& batch, const ForwardCache& cache) {
    check_batch(model, batch);
    if (cache.samples.size() != static_cast<std::size_t>(batch.size()))
        throw BadShape("cache does not match the batch");
    const GruDims& d = model.dims;
    const double batch_size = static_cast<double>(batch.size());
    const double out_size = static_cast<double>(d.output_dim);

    CellGrad fwd_grad = zero_cell_grad(d);
    CellGrad bwd_grad = zero_cell_grad(d);
    Eigen::MatrixXd w_out_grad = Eigen::MatrixXd::Zero(d.output_dim, d.state_dim());
    Eigen::VectorXd b_out_grad = Eigen::VectorXd::Zero(d.output_dim);
    double loss = 0.0;

    for (Eigen::Index b = 0; b < batch.size(); ++b) {
        const auto& sample = cache.samples[static_cast<std::size_t>(b)];
        const Eigen::MatrixXd& input = batch.inputs[static_cast<std::size_t>(b)];

        Eigen::VectorXd y = sample.preactivation;
        if (d.output_activation == OutputActivation::Swish)
            y = y.unaryExpr([](double v) { return swish(v); });
        const Eigen::VectorXd target = batch.targets.row(b).transpose();
        const Eigen::VectorXd err = y - target;
        loss += err.squaredNorm() / out_size;

        // d(sample MSE)/dy, averaged over the batch in one go.
        Eigen::VectorXd dy = (2.0 / (out_size * batch_size)) * err;
        if (d.output_activation == OutputActivation::Swish)
            dy = dy.cwiseProduct(sample.preactivation.unaryExpr([](double v) { return swish_grad(v); }));

        w_out_grad.noalias() += dy * sample.state.transpose();
        b_out_grad += dy;
        const Eigen::VectorXd d_state = model.w_out.transpose() * dy;

        backprop_direction(model.forward_cell, input, false, sample.forward, d_state.head(d.hidden_dim),
                           fwd_grad);
        if (d.bidirectional)
            backprop_direction(model.backward_cell, input, true, sample.backward,
                               d_state.tail(d.hidden_dim), bwd_grad);
    }
    loss /= batch_size;

    GruModel grads = zero_model(d);
    auto assign_cell = [](GruCell& cell, const CellGrad& g) {
        cell.w_update = g.w_update;
        cell.u_update = g.u_update;
        cell.b_update = g.b_update;
        cell.w_reset = g.w_reset;
        cell.u_reset = g.u_reset;
        cell.b_reset = g.b_reset;
        cell.w_cand = g.w_cand;
        cell.u_cand = g.u_cand;
        cell.b_cand = g.b_cand;
    };
    assign_cell(grads.forward_cell, fwd_grad);
    if (d.bidirectional) assign_cell(grads.backward_cell, bwd_grad);
    grads.w_out = w_out_grad;
    grads.b_out = b_out_grad;

    return {flatten(grads), loss};
}

namespace {

void write_matrix(Eigen::VectorXd& flat, Eigen::Index& pos, const Eigen::MatrixXd& m) {
    flat.segment(pos, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    pos += m.size();
}

void write_vector(Eigen::VectorXd& flat, Eigen::Index& pos, const Eigen::VectorXd& v) {
    flat.segment(pos, v.size()) = v;
    pos += v.size();
}

void write_cell(Eigen::VectorXd& flat, Eigen::Index& pos, const GruCell& c) {
    write_matrix(flat, pos, c.w_update);
    write_matrix(flat, pos, c.u_update);
    write_vector(flat, pos, c.b_update);
    write_matrix(flat, pos, c.w_reset);
    write_matrix(flat, pos, c.u_reset);
    write_vector(flat, pos, c.b_reset);
    write_matrix(flat, pos, c.w_cand);
    write_matrix(flat, pos, c.u_cand);
    write_vector(flat, pos, c.b_cand);
}

void read_matrix(const Eigen::VectorXd& flat, Eigen::Index& pos, Eigen::MatrixXd& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(pos, m.size());
    pos += m.size();
}

void read_vector(const Eigen::VectorXd& flat, Eigen::Index& pos, Eigen::VectorXd& v) {
    v = flat.segment(pos, v.size());
    pos += v.size();
}

void read_cell(const Eigen::VectorXd& flat, Eigen::Index& pos, GruCell& c) {
    read_matrix(flat, pos, c.w_update);
    read_matrix(flat, pos, c.u_update);
    read_vector(flat, pos, c.b_update);
    read_matrix(flat, pos, c.w_reset);
    read_matrix(flat, pos, c.u_reset);
    read_vector(flat, pos, c.b_reset);
    read_matrix(flat, pos, c.w_cand);
    read_matrix(flat, pos, c.u_cand);
    read_vector(flat, pos, c.b_cand);
}

}  // namespace

Eigen::VectorXd flatten(const GruModel& model) {
    Eigen::VectorXd flat(model.dims.param_count());
    Eigen::Index pos = 0;
    write_cell(flat, pos, model.forward_cell);
    if (model.dims.bidirectional) write_cell(flat, pos, model.backward_cell);
    write_matrix(flat, pos, model.w_out);
    write_vector(flat, pos, model.b_out);
    return flat;
}

GruModel unflatten(const Eigen::VectorXd& flat, const GruDims& dims) {
    if (flat.size() != dims.param_count()) throw BadShape("flat vector length differs from param_count");
    GruModel m = zero_model(dims);
    Eigen::Index pos = 0;
    read_cell(flat, pos, m.forward_cell);
    if (dims.bidirectional) read_cell(flat, pos, m.backward_cell);
    read_matrix(flat, pos, m.w_out);
    read_vector(flat, pos, m.b_out);
    return m;
}

}  // namespace swarm::nn
