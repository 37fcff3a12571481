#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crosswise/dataset.hpp"
#include "crosswise/errors.hpp"
#include "crosswise/network.hpp"

using namespace cw;

namespace {

NetworkSpec two_layer(LayerKind hidden, std::uint64_t seed) {
    return {{{hidden, 4, 8, LayerActivation::relu}, {LayerKind::dense, 8, 2, LayerActivation::softmax_output}}, seed};
}

TrainConfig blobs_config() {
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 50;
    cfg.batch_size = 10;
    cfg.loss = LossKind::cross_entropy;
    cfg.seed = 1;
    return cfg;
}

}  // namespace

TEST_CASE("zero epochs leaves the network untouched") {
    const Dataset d = gen_blobs(1, 10, 4, 2, 0.5);
    TrainConfig cfg = blobs_config();
    cfg.epochs = 0;
    const TrainResult r = train(two_layer(LayerKind::dense, 3), cfg, d);
    CHECK(r.history.epochs.empty());
    CHECK(network_to_json(r.network) == network_to_json(Network(two_layer(LayerKind::dense, 3))));
}

TEST_CASE("training reaches high accuracy on separable blobs") {
    const Dataset d = gen_blobs(1, 100, 4, 2, 0.5);
    const TrainResult dense = train(two_layer(LayerKind::dense, 1), blobs_config(), d);
    REQUIRE(dense.history.epochs.size() == 50);
    CHECK(dense.history.epochs.back().accuracy >= 0.95);

    const TrainResult mixed = train(two_layer(LayerKind::crosswise_mixed, 1), blobs_config(), d);
    CHECK(mixed.history.epochs.back().accuracy >= 0.90);
    CHECK(mixed.history.epochs.back().loss < mixed.history.epochs.front().loss);

    const auto [loss, acc] = evaluate(dense.network, d, LossKind::cross_entropy);
    CHECK(loss == dense.history.epochs.back().loss);
    CHECK(acc == dense.history.epochs.back().accuracy);
}

TEST_CASE("training is deterministic and independent of thread count") {
    const Dataset d = gen_xor(2, 120, 0.05);
    const NetworkSpec spec{{{LayerKind::crosswise_mixed, 2, 16, LayerActivation::relu},
                            {LayerKind::crosswise, 16, 2, LayerActivation::softmax_output}},
                           5};
    TrainConfig cfg = blobs_config();
    cfg.epochs = 5;
    cfg.batch_size = 16;
    const TrainResult a = train(spec, cfg, d);
    const TrainResult b = train(spec, cfg, d);
    cfg.threads = 3;
    const TrainResult c = train(spec, cfg, d);
    REQUIRE(a.history.epochs.size() == 5);
    for (std::size_t e = 0; e < 5; ++e) {
        CHECK(a.history.epochs[e].loss == b.history.epochs[e].loss);
        CHECK(a.history.epochs[e].accuracy == b.history.epochs[e].accuracy);
        CHECK(a.history.epochs[e].loss == c.history.epochs[e].loss);
    }
    CHECK(network_to_json(a.network) == network_to_json(c.network));
}

TEST_CASE("regression targets and mse") {
    Dataset d = gen_xor(3, 50, 0.0);
    d.class_count = 0;
    const NetworkSpec spec{{{LayerKind::dense, 2, 1, LayerActivation::identity}}, 0};
    TrainConfig cfg = blobs_config();
    cfg.loss = LossKind::mse;
    cfg.epochs = 3;
    const TrainResult r = train(spec, cfg, d);
    CHECK(std::isnan(r.history.epochs.back().accuracy));
    CHECK(std::isfinite(r.history.epochs.back().loss));
}

TEST_CASE("divergence is reported with its epoch") {
    const Dataset d = gen_blobs(1, 100, 4, 2, 0.5);
    const NetworkSpec spec{{{LayerKind::dense, 4, 8, LayerActivation::identity},
                            {LayerKind::dense, 8, 2, LayerActivation::identity}},
                           1};
    TrainConfig cfg = blobs_config();
    cfg.learning_rate = 100.0;
    cfg.loss = LossKind::mse;
    try {
        train(spec, cfg, d);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.epoch() >= 1);
        CHECK(e.epoch() <= 50);
        CHECK(std::string(e.what()).find(std::to_string(e.epoch())) != std::string::npos);
    }
}

TEST_CASE("train argument validation") {
    const Dataset d = gen_blobs(1, 10, 4, 2, 0.5);
    TrainConfig cfg = blobs_config();
    cfg.batch_size = 21;
    CHECK_THROWS_AS(train(two_layer(LayerKind::dense, 1), cfg, d), ParameterError);
    cfg = blobs_config();
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train(two_layer(LayerKind::dense, 1), cfg, d), ParameterError);
    const NetworkSpec wrong_in{{{LayerKind::dense, 3, 2, LayerActivation::softmax_output}}, 0};
    CHECK_THROWS_AS(train(wrong_in, blobs_config(), d), ShapeError);
    const NetworkSpec too_few_outputs{{{LayerKind::dense, 4, 1, LayerActivation::softmax_output}}, 0};
    CHECK_THROWS_AS(train(too_few_outputs, blobs_config(), d), ShapeError);
}

TEST_CASE("history CSV") {
    TrainHistory h;
    h.epochs.push_back({1, 0.5, 0.75, 1.25});
    h.epochs.push_back({2, 0.25, 1.0, 1.5});
    std::ostringstream os;
    write_history_csv(os, h);
    CHECK(os.str() == "epoch,loss,accuracy,wall_ms\n1,0.5,0.75,1.25\n2,0.25,1,1.5\n");
}
