#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crosswise/errors.hpp"
#include "crosswise/mckernel.hpp"
#include "crosswise/network.hpp"
#include "crosswise/rng.hpp"
#include "oracles.hpp"

using namespace cw;

namespace {

std::vector<double> uniform(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Parameters get U[-1,1] values and biases U[0.1, 0.6] so ReLU layers are
// mostly active.
void randomise(Network& net, Rng& rng) {
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        for (double& w : net.layer(i).weights()) w = rng.uniform(-1.0, 1.0);
        for (double& b : net.layer(i).bias()) b = rng.uniform(0.1, 0.6);
    }
}

LayerSpec layer(LayerKind k, std::size_t in, std::size_t out, LayerActivation a) { return {k, in, out, a}; }

// Pre-activations of every layer are kept at least `margin` away from zero.
bool kink_free(const Network& net, const Vector& x, double margin) {
    std::vector<double> a = x.values();
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const auto pre = net.layer(i).pre_activation(a);
        if (net.layer(i).spec().activation == LayerActivation::relu)
            for (double v : pre)
                if (std::abs(v) < margin) return false;
        a = net.layer(i).forward(a);
    }
    return true;
}

double gradient_check(Network& net, const Vector& x, const Vector& target, LossKind loss) {
    const Gradients g = network_backward(net, x, target, loss);
    double worst = 0.0;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto check = [&](std::span<double> params, const std::vector<double>& analytic) {
            std::vector<double> copy(params.begin(), params.end());
            const auto numeric = oracle::central_difference(copy, [&] {
                std::copy(copy.begin(), copy.end(), params.begin());
                return loss_eval(loss, network_forward(net, x), target);
            });
            std::copy(copy.begin(), copy.end(), params.begin());
            for (std::size_t i = 0; i < analytic.size(); ++i)
                worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
        };
        check(net.layer(l).weights(), g.layers[l].weights);
        check(net.layer(l).bias(), g.layers[l].bias);
    }
    return worst;
}

}  // namespace

TEST_CASE("NetworkSpec validation") {
    NetworkSpec ok{{layer(LayerKind::dense, 4, 8, LayerActivation::relu),
                    layer(LayerKind::crosswise, 8, 2, LayerActivation::softmax_output)},
                   1};
    CHECK_NOTHROW(ok.validate());
    NetworkSpec broken_chain{{layer(LayerKind::dense, 4, 8, LayerActivation::relu),
                              layer(LayerKind::dense, 7, 2, LayerActivation::identity)},
                             1};
    CHECK_THROWS_AS(broken_chain.validate(), ShapeError);
    NetworkSpec early_softmax{{layer(LayerKind::dense, 4, 8, LayerActivation::softmax_output),
                               layer(LayerKind::dense, 8, 2, LayerActivation::identity)},
                              1};
    CHECK_THROWS_AS(early_softmax.validate(), ParameterError);
    CHECK_THROWS_AS(NetworkSpec{}.validate(), ParameterError);
}

TEST_CASE("network_forward basics") {
    SUBCASE("identity dense layer") {
        const LayerSpec s = layer(LayerKind::dense, 3, 3, LayerActivation::identity);
        std::vector<std::unique_ptr<Layer>> layers;
        layers.push_back(std::make_unique<DenseLayer>(s, Matrix::identity(3).values(), std::vector<double>(3, 0.0)));
        const Network net(NetworkSpec{{s}, 0}, std::move(layers));
        CHECK(network_forward(net, Vector{1, -2, 3}) == Vector{1, -2, 3});
    }
    SUBCASE("all-zero weights with relu") {
        Network net(NetworkSpec{{layer(LayerKind::dense, 3, 5, LayerActivation::relu),
                                 layer(LayerKind::dense, 5, 2, LayerActivation::relu)},
                                4});
        for (std::size_t i = 0; i < 2; ++i)
            for (double& w : net.layer(i).weights()) w = 0.0;
        CHECK(network_forward(net, Vector{1, 2, 3}) == Vector::zeros(2));
    }
    SUBCASE("shape errors name the layer") {
        const Network net(NetworkSpec{{layer(LayerKind::dense, 3, 5, LayerActivation::relu)}, 0});
        try {
            network_forward(net, Vector{1, 2});
            FAIL("expected a shape error");
        } catch (const ShapeError& e) {
            CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
        }
    }
}

TEST_CASE("crosswise layer equals its dense twin") {
    Rng rng(3, 0);
    Network net(NetworkSpec{{layer(LayerKind::crosswise, 4, 8, LayerActivation::relu)}, 9});
    randomise(net, rng);
    const Network twin = dense_twin(net);
    const Vector x(uniform(rng, 4));
    CHECK(max_abs_diff(network_forward(net, x), network_forward(twin, x)) < 1e-12);
}

TEST_CASE("crosswise_mixed layer equals the explicit mixing product") {
    for (std::size_t in : {3u, 4u, 5u, 8u}) {
        const LayerSpec s = layer(LayerKind::crosswise_mixed, in, 11, LayerActivation::identity);
        Network net(NetworkSpec{{s}, in});
        Rng rng(in, 1);
        randomise(net, rng);
        const auto& mixed = dynamic_cast<const CrosswiseMixedLayer&>(net.layer(0));
        const std::size_t n = mixed.mixed_dim();
        CHECK(n == next_power_of_two(in));

        // diag-stack(c) * P * H / sqrt(n) * diag(signs), first `in` columns.
        oracle::Dense h = oracle::sylvester_hadamard(n);
        for (auto& row : h)
            for (double& v : row) v /= std::sqrt(static_cast<double>(n));
        const std::vector<double> signs(mixed.signs().begin(), mixed.signs().end());
        const std::vector<std::size_t> perm(mixed.perm().begin(), mixed.perm().end());
        const oracle::Dense mix = oracle::matmul(oracle::permutation_matrix(perm), oracle::matmul(h, oracle::diag(signs)));
        const oracle::Dense full = oracle::matmul(oracle::to_dense(expand_to_dense(mixed.crosswise())), mix);

        const std::vector<double> x = uniform(rng, in);
        std::vector<double> padded(x);
        padded.resize(n, 0.0);
        std::vector<double> expect = oracle::matvec(full, padded);
        for (std::size_t r = 0; r < expect.size(); ++r) expect[r] += mixed.bias()[r];
        CHECK(oracle::max_abs(network_forward(net, Vector(x)).values(), expect) < 1e-12);
        CHECK(max_abs_diff(network_forward(net, Vector(x)), network_forward(dense_twin(net), Vector(x))) < 1e-12);
    }
}

TEST_CASE("property: all-crosswise networks match their dense twins") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed, 7);
        const std::size_t depth = 1 + rng.uniform_index(3);
        NetworkSpec spec;
        spec.seed = seed;
        std::size_t in = 1 + rng.uniform_index(32);
        for (std::size_t l = 0; l < depth; ++l) {
            const std::size_t out = 1 + rng.uniform_index(32);
            spec.layers.push_back(layer(LayerKind::crosswise, in, out,
                                        l + 1 == depth ? LayerActivation::identity : LayerActivation::relu));
            in = out;
        }
        Network net(spec);
        randomise(net, rng);
        const Network twin = dense_twin(net);
        const Vector x(uniform(rng, spec.layers.front().in_dim));
        const Vector y = network_forward(net, x);
        REQUIRE(max_abs_diff(y, network_forward(twin, x)) < 1e-12);
        const Vector t(uniform(rng, y.size()));
        REQUIRE(std::abs(loss_eval(LossKind::mse, y, t) - loss_eval(LossKind::mse, network_forward(twin, x), t)) < 1e-12);
    }
}

TEST_CASE("loss_eval") {
    const Vector p{0.3, -1.0, 2.0};
    CHECK(loss_eval(LossKind::mse, p, p) == 0.0);
    CHECK(loss_eval(LossKind::mse, Vector{1, 2}, Vector{0, 0}) == 2.5);
    for (std::size_t c : {2u, 3u, 10u})
        CHECK(loss_eval(LossKind::cross_entropy, Vector::filled(c, 0.7), [&] {
                  std::vector<double> t(c, 0.0);
                  t[c - 1] = 1.0;
                  return Vector(t);
              }()) == doctest::Approx(std::log(static_cast<double>(c))).epsilon(1e-14));
    CHECK_THROWS_AS(loss_eval(LossKind::cross_entropy, p, Vector{0.5, 0.5, 0}), ParameterError);
    CHECK_THROWS_AS(loss_eval(LossKind::cross_entropy, p, Vector{1, 1, 0}), ParameterError);
    CHECK_THROWS_AS(loss_eval(LossKind::mse, p, Vector{1, 2}), ShapeError);
    // Stable for large logits.
    CHECK(std::isfinite(loss_eval(LossKind::cross_entropy, Vector{1000, -1000}, Vector{0, 1})));
    CHECK(loss_eval(LossKind::cross_entropy, Vector{1000, -1000}, Vector{0, 1}) == doctest::Approx(2000.0));
}

TEST_CASE("network_backward") {
    SUBCASE("zero gradients at a perfect mse fit") {
        Network net(NetworkSpec{{layer(LayerKind::crosswise, 3, 5, LayerActivation::relu),
                                 layer(LayerKind::dense, 5, 2, LayerActivation::identity)},
                                2});
        const Vector x{0.2, -0.4, 0.9};
        const Gradients g = network_backward(net, x, network_forward(net, x), LossKind::mse);
        CHECK(g.loss == 0.0);
        for (const auto& lg : g.layers) {
            for (double v : lg.weights) CHECK(v == 0.0);
            for (double v : lg.bias) CHECK(v == 0.0);
        }
    }
    SUBCASE("crosswise gradient equals the dense twin's diagonal gradient") {
        Rng rng(6, 6);
        Network net(NetworkSpec{{layer(LayerKind::crosswise, 3, 7, LayerActivation::relu),
                                 layer(LayerKind::crosswise, 7, 4, LayerActivation::softmax_output)},
                                6});
        randomise(net, rng);
        const Network twin = dense_twin(net);
        const Vector x(uniform(rng, 3));
        const Vector t{0, 0, 1, 0};
        const Gradients gc = network_backward(net, x, t, LossKind::cross_entropy);
        const Gradients gd = network_backward(twin, x, t, LossKind::cross_entropy);
        CHECK(gc.loss == doctest::Approx(gd.loss).epsilon(1e-14));
        for (std::size_t l = 0; l < 2; ++l) {
            const auto& spec = net.spec().layers[l];
            for (std::size_t r = 0; r < spec.out_dim; ++r) {
                const double dense_entry = gd.layers[l].weights[r * spec.in_dim + r % spec.in_dim];
                CHECK(gc.layers[l].weights[r] == doctest::Approx(dense_entry).epsilon(1e-12));
                CHECK(gc.layers[l].bias[r] == doctest::Approx(gd.layers[l].bias[r]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("property: finite-difference gradient check for every layer kind") {
    const LayerKind kinds[] = {LayerKind::dense, LayerKind::crosswise, LayerKind::crosswise_mixed};
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 60; ++seed) {
        Rng rng(seed, 3);
        const LayerKind k1 = kinds[seed % 3], k2 = kinds[(seed / 3) % 3];
        const std::size_t a = 1 + rng.uniform_index(6), b = 1 + rng.uniform_index(9), c = 2 + rng.uniform_index(4);
        const LossKind loss = seed % 2 ? LossKind::mse : LossKind::cross_entropy;
        Network net(NetworkSpec{{layer(k1, a, b, LayerActivation::relu),
                                 layer(k2, b, c, loss == LossKind::mse ? LayerActivation::identity
                                                                       : LayerActivation::softmax_output)},
                                seed});
        randomise(net, rng);
        const Vector x(uniform(rng, a));
        if (!kink_free(net, x, 1e-6)) continue;
        std::vector<double> t(c, 0.0);
        if (loss == LossKind::mse) t = uniform(rng, c);
        else t[rng.uniform_index(c)] = 1.0;
        ++checked;
        INFO("seed " << seed);
        CHECK(gradient_check(net, x, Vector(t), loss) <= 1e-5);
    }
}

TEST_CASE("sgd_step") {
    const LayerSpec s = layer(LayerKind::dense, 1, 1, LayerActivation::identity);
    auto single = [&](double w) {
        std::vector<std::unique_ptr<Layer>> layers;
        layers.push_back(std::make_unique<DenseLayer>(s, std::vector<double>{w}, std::vector<double>{0.0}));
        return Network(NetworkSpec{{s}, 0}, std::move(layers));
    };

    Network net = single(1.0);
    Gradients g;
    g.layers.push_back({{2.0}, {0.0}});
    sgd_step(net, g, 0.1);
    CHECK(net.layer(0).weights()[0] == doctest::Approx(0.8).epsilon(1e-15));

    Network still = single(1.0);
    sgd_step(still, g, 0.0);
    CHECK(still.layer(0).weights()[0] == 1.0);

    Network n1(NetworkSpec{{layer(LayerKind::crosswise, 3, 6, LayerActivation::relu)}, 5});
    Network n2(n1);
    const Gradients gg = network_backward(n1, Vector{1, 2, 3}, Vector{1, 0, 1, 0, 1, 0}, LossKind::mse);
    sgd_step(n1, gg, 0.3);
    sgd_step(n2, gg, 0.3);
    CHECK(network_to_json(n1) == network_to_json(n2));

    Gradients wrong;
    wrong.layers.push_back({{1.0, 2.0}, {0.0}});
    CHECK_THROWS_AS(sgd_step(net, wrong, 0.1), ShapeError);
    CHECK_THROWS_AS(sgd_step(net, Gradients{}, 0.1), ShapeError);

    // Loss w^2 (x = 1, target 0, bias 0); a step of 0.5 lands on the minimum.
    Network quad = single(1.0);
    const Vector x{1.0}, t{0.0};
    const double before = loss_eval(LossKind::mse, network_forward(quad, x), t);
    Gradients qg = network_backward(quad, x, t, LossKind::mse);
    qg.layers[0].bias = {0.0};
    sgd_step(quad, qg, 0.5);
    CHECK(loss_eval(LossKind::mse, network_forward(quad, x), t) < before);
}

TEST_CASE("weight and multiplication counts") {
    const auto count = [](LayerKind k, std::size_t in, std::size_t out) {
        return layer_cost(layer(k, in, out, LayerActivation::relu));
    };
    CHECK(count(LayerKind::dense, 4, 8).weights == 32);
    CHECK(count(LayerKind::crosswise, 4, 8).weights == 8);
    CHECK(count(LayerKind::dense, 4, 8).mults == 32);
    CHECK(count(LayerKind::crosswise, 4, 8).mults == 8);
    CHECK(count(LayerKind::crosswise, 3, 7).mults == 9);
    for (std::size_t n = 1; n <= 64; ++n) CHECK(count(LayerKind::crosswise, n, n).weights == n);
    CHECK(count(LayerKind::crosswise_mixed, 5, 8).weights == 8);
    CHECK(count(LayerKind::crosswise_mixed, 5, 8).fwht_ops == 24);
    CHECK(count(LayerKind::crosswise_mixed, 4, 8).fwht_ops == 8);
    CHECK(count(LayerKind::crosswise, 4, 8).biases == 8);

    for (std::size_t n = 2; n <= 32; ++n)
        for (std::size_t m = 2; m <= 32; ++m)
            REQUIRE(count(LayerKind::crosswise, n, m).weights < count(LayerKind::dense, n, m).weights);

    const NetworkSpec spec{{layer(LayerKind::dense, 4, 8, LayerActivation::relu),
                            layer(LayerKind::crosswise_mixed, 8, 2, LayerActivation::softmax_output)},
                           0};
    const CostReport w = count_weights(spec);
    CHECK(w.layers.size() == 2);
    CHECK(w.total.weights == 32 + 8);
    CHECK(w.total.biases == 10);
    CHECK(count_mults(spec).total.fwht_ops == 24);

    // The counters agree with the instantiated parameter arrays.
    const Network net(spec);
    for (std::size_t i = 0; i < 2; ++i) CHECK(net.layer(i).weights().size() == w.layers[i].weights);
}

TEST_CASE("model JSON round trip") {
    Rng rng(2, 2);
    Network net(NetworkSpec{{layer(LayerKind::crosswise_mixed, 5, 8, LayerActivation::relu),
                             layer(LayerKind::crosswise, 8, 3, LayerActivation::relu),
                             layer(LayerKind::dense, 3, 2, LayerActivation::softmax_output)},
                            77});
    randomise(net, rng);
    const nlohmann::json j = network_to_json(net);
    CHECK(j["version"] == 1);
    CHECK(j["layers"][1]["type"] == "crosswise");
    CHECK(j["layers"][1]["k"] == 1);
    CHECK(j["layers"][1]["c"].size() == 8);
    CHECK(j["layers"][2]["w"].size() == 6);
    const Network back = network_from_json(nlohmann::json::parse(j.dump()));
    const Vector x(uniform(rng, 5));
    CHECK(network_forward(back, x) == network_forward(net, x));
    CHECK(network_to_json(back) == j);

    nlohmann::json bad = j;
    bad["layers"][0]["perm"][0] = bad["layers"][0]["perm"][1];
    CHECK_THROWS_AS(network_from_json(bad), ParameterError);
    bad = j;
    bad["version"] = 2;
    CHECK_THROWS_AS(network_from_json(bad), ParameterError);
}
