#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swarm/contract/fixed_point.hpp"
#include "swarm/nn/training.hpp"

using namespace swarm;
using namespace swarm::nn;

namespace {

TrainBatch random_batch(Rng& rng, Eigen::Index batch, Eigen::Index steps, const GruDims& dims) {
    TrainBatch b;
    b.targets.resize(batch, dims.output_dim);
    for (Eigen::Index i = 0; i < batch; ++i) {
        Eigen::MatrixXd input(steps, dims.input_dim);
        for (Eigen::Index t = 0; t < steps; ++t)
            for (Eigen::Index j = 0; j < dims.input_dim; ++j) input(t, j) = rng.uniform(-1.0, 1.0);
        b.inputs.push_back(input);
        for (Eigen::Index j = 0; j < dims.output_dim; ++j) b.targets(i, j) = rng.uniform(-1.0, 1.0);
    }
    return b;
}

/// Central-difference gradient of the batch loss, the independent oracle
/// for gru_backward.
Eigen::VectorXd finite_difference_gradient(const GruModel& model, const TrainBatch& batch, double step) {
    const Eigen::VectorXd base = flatten(model);
    Eigen::VectorXd grad(base.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        Eigen::VectorXd plus = base, minus = base;
        plus[i] += step;
        minus[i] -= step;
        const double lp = mse(batch.targets, gru_forward(unflatten(plus, model.dims), batch).predictions);
        const double lm = mse(batch.targets, gru_forward(unflatten(minus, model.dims), batch).predictions);
        grad[i] = (lp - lm) / (2.0 * step);
    }
    return grad;
}

double max_relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < got.size(); ++i) {
        const double denom = std::max({std::abs(got[i]), std::abs(want[i]), 1e-8});
        worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("swish") {
    CHECK(swish(0.0) == 0.0);
    CHECK(swish(10.0) == doctest::Approx(9.999546).epsilon(1e-6));
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(-6.0, 6.0);
        // sigma(x) + sigma(-x) = 1  =>  swish(x) - swish(-x) = x
        CHECK(swish(x) - swish(-x) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("mse") {
    Eigen::MatrixXd y(1, 2), yhat(1, 2);
    y << 0, 0;
    yhat << 1, 1;
    CHECK(mse(y, y) == 0.0);
    CHECK(mse(y, yhat) == 1.0);

    Rng rng(4);
    Eigen::MatrixXd a(3, 4), b(3, 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            a(i, j) = rng.uniform(-2, 2);
            b(i, j) = rng.uniform(-2, 2);
        }
    double naive = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) naive += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    naive /= 12.0;
    CHECK(mse(a, b) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("forward pass basics") {
    GruDims dims{.input_dim = 2, .hidden_dim = 3, .output_dim = 2};
    Rng rng(5);
    const TrainBatch batch = random_batch(rng, 4, 5, dims);

    SUBCASE("all-zero weights predict the output bias") {
        GruModel model = zero_model(dims);
        model.b_out << 0.75, -0.25;
        const ForwardResult fwd = gru_forward(model, batch);
        for (Eigen::Index i = 0; i < 4; ++i) {
            CHECK(fwd.predictions(i, 0) == doctest::Approx(0.75));
            CHECK(fwd.predictions(i, 1) == doctest::Approx(-0.25));
        }
    }

    SUBCASE("shape mismatch is rejected") {
        GruModel model = init_model(dims, 1);
        TrainBatch bad = batch;
        bad.inputs[0] = Eigen::MatrixXd::Zero(5, 3);
        CHECK_THROWS_AS(gru_forward(model, bad), BadShape);
    }

    SUBCASE("T=1 equals a single cell application") {
        GruModel model = init_model(dims, 2);
        TrainBatch one = random_batch(rng, 1, 1, dims);
        const Eigen::VectorXd x = one.inputs[0].row(0).transpose();
        const auto sig = [](double v) { return sigmoid(v); };
        const Eigen::VectorXd z =
            (model.forward_cell.w_update * x + model.forward_cell.b_update).unaryExpr(sig);
        const Eigen::VectorXd c = (model.forward_cell.w_cand * x + model.forward_cell.b_cand)
                                      .unaryExpr([](double v) { return std::tanh(v); });
        const Eigen::VectorXd h = (Eigen::VectorXd::Ones(3) - z).cwiseProduct(c);
        const Eigen::VectorXd expect = model.w_out * h + model.b_out;
        const ForwardResult fwd = gru_forward(model, one);
        CHECK((fwd.predictions.row(0).transpose() - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("forward pass matches a hand-executed recurrence trace") {
    // k=1, hidden=2, T=3 with pinned weights; expected value computed by
    // stepping the recurrence by hand.
    GruDims dims{.input_dim = 1, .hidden_dim = 2, .output_dim = 1};
    GruModel m = zero_model(dims);
    m.forward_cell.w_update << 0.5, -0.25;
    m.forward_cell.u_update << 0.1, 0.2, 0.0, -0.1;
    m.forward_cell.b_update << 0.05, -0.05;
    m.forward_cell.w_reset << 0.3, 0.4;
    m.forward_cell.u_reset << -0.2, 0.1, 0.3, 0.2;
    m.forward_cell.b_reset << 0.0, 0.1;
    m.forward_cell.w_cand << 1.0, -0.5;
    m.forward_cell.u_cand << 0.2, -0.3, 0.1, 0.4;
    m.forward_cell.b_cand << 0.1, 0.0;
    m.w_out << 1.5, -2.0;
    m.b_out << 0.25;

    TrainBatch batch;
    Eigen::MatrixXd input(3, 1);
    input << 0.5, -1.0, 0.25;
    batch.inputs.push_back(input);
    batch.targets = Eigen::MatrixXd::Zero(1, 1);

    const ForwardResult fwd = gru_forward(m, batch);
    CHECK(fwd.predictions(0, 0) == doctest::Approx(0.174033932691639).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
    for (bool bidirectional : {false, true}) {
        for (OutputActivation act : {OutputActivation::Identity, OutputActivation::Swish}) {
            GruDims dims{.input_dim = 2,
                         .hidden_dim = 3,
                         .output_dim = 2,
                         .bidirectional = bidirectional,
                         .output_activation = act};
            Rng rng(7);
            const GruModel model = init_model(dims, 11);
            const TrainBatch batch = random_batch(rng, 2, 4, dims);
            const ForwardResult fwd = gru_forward(model, batch);
            const BackwardResult back = gru_backward(model, batch, fwd.cache);
            CHECK(back.loss == doctest::Approx(mse(batch.targets, fwd.predictions)).epsilon(1e-12));
            const Eigen::VectorXd oracle = finite_difference_gradient(model, batch, 1e-5);
            CHECK(max_relative_error(back.gradient, oracle) <= 1e-4);
        }
    }
}

TEST_CASE("gradient edge behaviour") {
    GruDims dims{.input_dim = 1, .hidden_dim = 2, .output_dim = 1};
    Rng rng(9);

    SUBCASE("zero weights, zero targets: only the output path is active") {
        GruModel model = zero_model(dims);
        TrainBatch batch = random_batch(rng, 3, 2, dims);
        batch.targets.setZero();
        const ForwardResult fwd = gru_forward(model, batch);
        const BackwardResult back = gru_backward(model, batch, fwd.cache);
        // predictions equal b_out = 0, so the loss is already minimal
        CHECK(back.gradient.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("duplicated batch leaves the mean gradient unchanged") {
        const GruModel model = init_model(dims, 13);
        const TrainBatch batch = random_batch(rng, 2, 3, dims);
        TrainBatch doubled = batch;
        for (Eigen::Index i = 0; i < batch.size(); ++i) doubled.inputs.push_back(batch.inputs[static_cast<std::size_t>(i)]);
        doubled.targets.conservativeResize(4, 1);
        doubled.targets.bottomRows(2) = batch.targets;
        const BackwardResult a = gru_backward(model, batch, gru_forward(model, batch).cache);
        const BackwardResult b = gru_backward(model, doubled, gru_forward(model, doubled).cache);
        CHECK((a.gradient - b.gradient).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("shard gradients combine to the full-dataset gradient") {
    GruDims dims{.input_dim = 2, .hidden_dim = 3, .output_dim = 1};
    Rng rng(15);
    const GruModel model = init_model(dims, 17);
    const TrainBatch full = random_batch(rng, 12, 4, dims);

    for (const std::vector<Eigen::Index>& sizes :
         {std::vector<Eigen::Index>{6, 6}, std::vector<Eigen::Index>{3, 4, 5}, std::vector<Eigen::Index>{1, 11}}) {
        Eigen::VectorXd combined = Eigen::VectorXd::Zero(dims.param_count());
        Eigen::Index offset = 0;
        for (const Eigen::Index n : sizes) {
            TrainBatch shard;
            shard.targets.resize(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) {
                shard.inputs.push_back(full.inputs[static_cast<std::size_t>(offset + i)]);
                shard.targets.row(i) = full.targets.row(offset + i);
            }
            offset += n;
            const BackwardResult res = gru_backward(model, shard, gru_forward(model, shard).cache);
            combined += (static_cast<double>(n) / static_cast<double>(full.size())) * res.gradient;
        }
        const BackwardResult whole = gru_backward(model, full, gru_forward(model, full).cache);
        CHECK((combined - whole.gradient).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("one small full-batch step decreases the training loss") {
    GruDims dims{.input_dim = 2, .hidden_dim = 4, .output_dim = 1};
    Rng rng(21);
    const GruModel model = init_model(dims, 23);
    const TrainBatch batch = random_batch(rng, 8, 5, dims);
    const double before = evaluate(model, batch);
    const BackwardResult back = gru_backward(model, batch, gru_forward(model, batch).cache);
    REQUIRE(back.gradient.cwiseAbs().maxCoeff() > 0.0);
    const GruModel stepped = unflatten(flatten(model) - 1e-3 * back.gradient, dims);
    CHECK(evaluate(stepped, batch) < before);
}

TEST_CASE("bidirectional collapses to unidirectional when backward weights vanish") {
    GruDims uni{.input_dim = 2, .hidden_dim = 3, .output_dim = 2};
    GruDims bi = uni;
    bi.bidirectional = true;

    const GruModel base = init_model(uni, 31);
    GruModel wide = zero_model(bi);
    wide.forward_cell = base.forward_cell;
    wide.w_out.leftCols(uni.hidden_dim) = base.w_out;
    wide.b_out = base.b_out;

    Rng rng(33);
    const TrainBatch batch = random_batch(rng, 3, 4, uni);
    const Eigen::MatrixXd a = gru_forward(base, batch).predictions;
    const Eigen::MatrixXd b = gru_forward(wide, batch).predictions;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("flatten round trip") {
    for (bool bidirectional : {false, true}) {
        GruDims dims{.input_dim = 3, .hidden_dim = 4, .output_dim = 2, .bidirectional = bidirectional};
        const GruModel model = init_model(dims, 41);
        const Eigen::VectorXd flat = flatten(model);
        CHECK(flat.size() == dims.param_count());
        CHECK(flatten(unflatten(flat, dims)) == flat);
    }
}

TEST_CASE("local_update") {
    GruDims dims{.input_dim = 2, .hidden_dim = 3, .output_dim = 1};
    Rng rng(43);
    const GruModel model = init_model(dims, 47);
    const TrainBatch train = random_batch(rng, 10, 4, dims);
    const TrainBatch val = random_batch(rng, 4, 4, dims);

    SUBCASE("empty shard") {
        CHECK_THROWS_AS(local_update(model, TrainBatch{}, val, {1, 4, 0.1}, 0), EmptyShard);
    }

    SUBCASE("zero learning rate leaves weights unchanged") {
        const LocalUpdateResult r = local_update(model, train, val, {3, 4, 0.0}, 0);
        CHECK(r.weights == flatten(model));
    }

    SUBCASE("one full-batch epoch equals a single SGD step") {
        const LocalUpdateResult r =
            local_update(model, train, val, {1, train.size(), 0.05}, 0);
        const BackwardResult back = gru_backward(model, train, gru_forward(model, train).cache);
        const Eigen::VectorXd expect = flatten(model) - 0.05 * back.gradient;
        CHECK((r.weights - expect).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("same seed reproduces identical quantized weights") {
        const LocalUpdateResult a = local_update(model, train, val, {4, 3, 0.05}, 99);
        const LocalUpdateResult b = local_update(model, train, val, {4, 3, 0.05}, 99);
        CHECK(contract::quantize(a.weights, 1000000) == contract::quantize(b.weights, 1000000));
        CHECK(a.weights == b.weights);
    }
}
