#include "crosswise/network.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "crosswise/errors.hpp"
#include "crosswise/mckernel.hpp"
#include "crosswise/rng.hpp"

namespace cw {

namespace {

[[noreturn]] void length_error(const std::string& op, std::size_t got, std::size_t want) {
    throw ShapeError(op + ": length " + std::to_string(got) + ", expected " + std::to_string(want));
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

const char* to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::crosswise: return "crosswise";
        case LayerKind::crosswise_mixed: return "crosswise_mixed";
    }
    return "?";
}

const char* to_string(LayerActivation act) {
    switch (act) {
        case LayerActivation::relu: return "relu";
        case LayerActivation::identity: return "identity";
        case LayerActivation::softmax_output: return "softmax_output";
    }
    return "?";
}

const char* to_string(LossKind kind) { return kind == LossKind::mse ? "mse" : "cross_entropy"; }

LayerKind parse_layer_kind(const std::string& s) {
    if (s == "dense") return LayerKind::dense;
    if (s == "crosswise") return LayerKind::crosswise;
    if (s == "crosswise_mixed") return LayerKind::crosswise_mixed;
    throw ParameterError("unknown layer kind '" + s + "'");
}

LayerActivation parse_activation(const std::string& s) {
    if (s == "relu") return LayerActivation::relu;
    if (s == "identity") return LayerActivation::identity;
    if (s == "softmax_output") return LayerActivation::softmax_output;
    throw ParameterError("unknown activation '" + s + "'");
}

LossKind parse_loss(const std::string& s) {
    if (s == "mse") return LossKind::mse;
    if (s == "cross_entropy") return LossKind::cross_entropy;
    throw ParameterError("unknown loss '" + s + "'");
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw ParameterError("network: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.in_dim == 0 || l.out_dim == 0) {
            throw ParameterError("network layer " + std::to_string(i) + ": dimensions must be positive");
        }
        if (i + 1 < layers.size()) {
            if (l.activation == LayerActivation::softmax_output) {
                throw ParameterError("network layer " + std::to_string(i) +
                                     ": softmax_output is only allowed on the last layer");
            }
            if (l.out_dim != layers[i + 1].in_dim) {
                throw ShapeError("network layer " + std::to_string(i) + ": out_dim " +
                                 std::to_string(l.out_dim) + " does not match next in_dim " +
                                 std::to_string(layers[i + 1].in_dim));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Layer

std::vector<double> Layer::forward(std::span<const double> x) const {
    std::vector<double> y = pre_activation(x);
    if (spec_.activation == LayerActivation::relu)
        for (double& v : y) v = std::max(v, 0.0);
    return y;
}

std::vector<double> Layer::backward(std::span<const double> x, std::span<const double> upstream,
                                    LayerGrad& grad) const {
    if (upstream.size() != spec_.out_dim) length_error("layer backward upstream", upstream.size(), spec_.out_dim);
    std::vector<double> g = to_vec(upstream);
    if (spec_.activation == LayerActivation::relu) {
        const std::vector<double> pre = pre_activation(x);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (pre[i] <= 0.0) g[i] = 0.0;
    }
    return backward_linear(x, g, grad);
}

// ---------------------------------------------------------------------------
// DenseLayer

DenseLayer::DenseLayer(LayerSpec spec, std::vector<double> weights, std::vector<double> bias)
    : Layer(spec), w_(std::move(weights)), b_(std::move(bias)) {
    if (spec.kind != LayerKind::dense) throw ParameterError("DenseLayer: spec kind is not dense");
    if (w_.size() != spec.in_dim * spec.out_dim) length_error("DenseLayer weights", w_.size(), spec.in_dim * spec.out_dim);
    if (b_.size() != spec.out_dim) length_error("DenseLayer bias", b_.size(), spec.out_dim);
}

DenseLayer DenseLayer::init(LayerSpec spec, std::uint64_t seed) {
    Rng rng(seed, 0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.in_dim));
    std::vector<double> w(spec.in_dim * spec.out_dim);
    for (double& v : w) v = rng.uniform(-1.0, 1.0) * scale;
    return DenseLayer(spec, std::move(w), std::vector<double>(spec.out_dim, 0.0));
}

std::vector<double> DenseLayer::pre_activation(std::span<const double> x) const {
    const auto [n, m] = std::pair{spec().in_dim, spec().out_dim};
    if (x.size() != n) length_error("dense forward", x.size(), n);
    std::vector<double> y(m);
    for (std::size_t r = 0; r < m; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += w_[r * n + j] * x[j];
        y[r] = s + b_[r];
    }
    return y;
}

std::vector<double> DenseLayer::backward_linear(std::span<const double> x, std::span<const double> g,
                                                LayerGrad& grad) const {
    const auto [n, m] = std::pair{spec().in_dim, spec().out_dim};
    grad.weights.assign(n * m, 0.0);
    grad.bias = to_vec(g);
    std::vector<double> gx(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            grad.weights[r * n + j] = g[r] * x[j];
            gx[j] += w_[r * n + j] * g[r];
        }
    }
    return gx;
}

Matrix DenseLayer::dense_equivalent() const { return Matrix(spec().out_dim, spec().in_dim, w_); }

nlohmann::json DenseLayer::to_json() const {
    return {{"type", "dense"}, {"n", spec().in_dim}, {"m", spec().out_dim},
            {"activation", to_string(spec().activation)}, {"w", w_}, {"b", b_}};
}

// ---------------------------------------------------------------------------
// CrosswiseLayer

CrosswiseLayer::CrosswiseLayer(LayerSpec spec, CrosswiseWeights weights)
    : Layer(spec), w_(std::move(weights)) {
    if (spec.kind != LayerKind::crosswise) throw ParameterError("CrosswiseLayer: spec kind is not crosswise");
    if (w_.in_dim() != spec.in_dim || w_.out_dim() != spec.out_dim) {
        throw ShapeError("CrosswiseLayer: weights shape does not match spec");
    }
}

CrosswiseLayer CrosswiseLayer::init(LayerSpec spec, std::uint64_t seed) {
    return CrosswiseLayer(spec, init_crosswise(seed, spec.in_dim, spec.out_dim, InitScheme::uniform_scaled));
}

std::vector<double> CrosswiseLayer::pre_activation(std::span<const double> x) const {
    if (x.size() != w_.in_dim()) length_error("crosswise forward", x.size(), w_.in_dim());
    std::vector<double> y(w_.out_dim());
    crosswise_apply(w_, x, y);
    for (std::size_t r = 0; r < y.size(); ++r) y[r] += w_.bias()[r];
    return y;
}

std::vector<double> CrosswiseLayer::backward_linear(std::span<const double> x, std::span<const double> g,
                                                    LayerGrad& grad) const {
    CrosswiseGradients cg =
        crosswise_backward(w_, Vector(to_vec(x)), Vector(to_vec(g)), Activation::identity);
    grad.weights = cg.coefficients.values();
    grad.bias = cg.bias.values();
    return cg.input.values();
}

nlohmann::json CrosswiseLayer::to_json() const {
    return {{"type", "crosswise"}, {"n", w_.in_dim()}, {"m", w_.out_dim()}, {"k", w_.block_count()},
            {"activation", to_string(spec().activation)}, {"c", to_vec(w_.coefficients())},
            {"b", to_vec(w_.bias())}};
}

// ---------------------------------------------------------------------------
// CrosswiseMixedLayer

CrosswiseMixedLayer::CrosswiseMixedLayer(LayerSpec spec, std::vector<double> signs,
                                         std::vector<std::size_t> perm, CrosswiseWeights weights)
    : Layer(spec), signs_(std::move(signs)), perm_(std::move(perm)), w_(std::move(weights)) {
    if (spec.kind != LayerKind::crosswise_mixed) {
        throw ParameterError("CrosswiseMixedLayer: spec kind is not crosswise_mixed");
    }
    const std::size_t n = next_power_of_two(spec.in_dim);
    if (signs_.size() != n) length_error("CrosswiseMixedLayer signs", signs_.size(), n);
    if (perm_.size() != n) length_error("CrosswiseMixedLayer perm", perm_.size(), n);
    std::vector<std::size_t> sorted(perm_);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i)
        if (sorted[i] != i) throw ParameterError("CrosswiseMixedLayer: perm is not a permutation");
    for (double s : signs_)
        if (s != 1.0 && s != -1.0) throw ParameterError("CrosswiseMixedLayer: signs must be +-1");
    if (w_.in_dim() != n || w_.out_dim() != spec.out_dim) {
        throw ShapeError("CrosswiseMixedLayer: crosswise weights must map the padded width to out_dim");
    }
}

CrosswiseMixedLayer CrosswiseMixedLayer::init(LayerSpec spec, std::uint64_t seed) {
    const std::size_t n = next_power_of_two(spec.in_dim);
    Rng rng(seed, 1);
    std::vector<double> signs(n);
    for (double& s : signs) s = rng.sign();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    return CrosswiseMixedLayer(spec, std::move(signs), std::move(perm),
                               init_crosswise(seed, n, spec.out_dim, InitScheme::uniform_scaled));
}

std::vector<double> CrosswiseMixedLayer::mix(std::span<const double> x) const {
    if (x.size() != spec().in_dim) length_error("crosswise_mixed forward", x.size(), spec().in_dim);
    const std::size_t n = mixed_dim();
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = signs_[i] * x[i];
    fwht_inplace(u);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = u[perm_[i]] * scale;
    return w;
}

Matrix CrosswiseMixedLayer::mixing_matrix() const {
    const std::size_t n = mixed_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Matrix m = Matrix::zeros(n, spec().in_dim);
    // Row i is row perm[i] of H, scaled, with column j flipped by signs[j].
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < spec().in_dim; ++j)
            m.at(i, j) = ((std::popcount(perm_[i] & j) % 2) ? -scale : scale) * signs_[j];
    return m;
}

std::vector<double> CrosswiseMixedLayer::pre_activation(std::span<const double> x) const {
    const std::vector<double> w = mix(x);
    std::vector<double> y(w_.out_dim());
    crosswise_apply(w_, w, y);
    for (std::size_t r = 0; r < y.size(); ++r) y[r] += w_.bias()[r];
    return y;
}

std::vector<double> CrosswiseMixedLayer::backward_linear(std::span<const double> x,
                                                         std::span<const double> g,
                                                         LayerGrad& grad) const {
    const std::size_t n = mixed_dim();
    CrosswiseGradients cg = crosswise_backward(w_, Vector(mix(x)), Vector(to_vec(g)), Activation::identity);
    grad.weights = cg.coefficients.values();
    grad.bias = cg.bias.values();

    // Transpose of the mixing stage: un-permute, H is symmetric, then signs.
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) u[perm_[i]] += cg.input[i];
    fwht_inplace(u);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> gx(spec().in_dim);
    for (std::size_t j = 0; j < gx.size(); ++j) gx[j] = u[j] * scale * signs_[j];
    return gx;
}

Matrix CrosswiseMixedLayer::dense_equivalent() const { return matmul(expand_to_dense(w_), mixing_matrix()); }

nlohmann::json CrosswiseMixedLayer::to_json() const {
    return {{"type", "crosswise_mixed"}, {"n", spec().in_dim}, {"m", w_.out_dim()},
            {"k", w_.block_count()}, {"activation", to_string(spec().activation)},
            {"signs", signs_}, {"perm", perm_}, {"c", to_vec(w_.coefficients())},
            {"b", to_vec(w_.bias())}};
}

// ---------------------------------------------------------------------------
// Network

namespace {

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case LayerKind::dense: return std::make_unique<DenseLayer>(DenseLayer::init(spec, seed));
        case LayerKind::crosswise: return std::make_unique<CrosswiseLayer>(CrosswiseLayer::init(spec, seed));
        case LayerKind::crosswise_mixed:
            return std::make_unique<CrosswiseMixedLayer>(CrosswiseMixedLayer::init(spec, seed));
    }
    throw ParameterError("unknown layer kind");
}

}  // namespace

Network::Network(const NetworkSpec& spec) : spec_(spec) {
    spec_.validate();
    for (std::size_t i = 0; i < spec_.layers.size(); ++i)
        layers_.push_back(make_layer(spec_.layers[i], random_word(spec_.seed, 0, i)));
}

Network::Network(NetworkSpec spec, std::vector<std::unique_ptr<Layer>> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
    spec_.validate();
    if (layers_.size() != spec_.layers.size()) length_error("Network layers", layers_.size(), spec_.layers.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& a = layers_[i]->spec();
        const auto& b = spec_.layers[i];
        if (a.kind != b.kind || a.in_dim != b.in_dim || a.out_dim != b.out_dim || a.activation != b.activation)
            throw ShapeError("Network: layer " + std::to_string(i) + " does not match its spec");
    }
}

Network::Network(const Network& other) : spec_(other.spec_) {
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
    if (this != &other) *this = Network(other);
    return *this;
}

Network dense_twin(const Network& net) {
    NetworkSpec spec = net.spec();
    std::vector<std::unique_ptr<Layer>> layers;
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& l = net.layer(i);
        spec.layers[i].kind = LayerKind::dense;
        layers.push_back(std::make_unique<DenseLayer>(spec.layers[i], l.dense_equivalent().values(),
                                                      to_vec(l.bias())));
    }
    return Network(std::move(spec), std::move(layers));
}

namespace {

std::vector<std::vector<double>> forward_trace(const Network& net, std::span<const double> x) {
    std::vector<std::vector<double>> acts;
    acts.reserve(net.layer_count() + 1);
    acts.push_back(to_vec(x));
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        try {
            acts.push_back(net.layer(i).forward(acts.back()));
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + ": " + e.what());
        }
    }
    return acts;
}

}  // namespace

Vector network_forward(const Network& net, const Vector& x) {
    return Vector(std::move(forward_trace(net, x.span()).back()));
}

// ---------------------------------------------------------------------------
// Loss

namespace {

void check_one_hot(std::span<const double> t) {
    int ones = 0;
    for (double v : t) {
        if (v == 1.0) ++ones;
        else if (v != 0.0) throw ParameterError("cross_entropy: target is not one-hot");
    }
    if (ones != 1) throw ParameterError("cross_entropy: target is not one-hot");
}

double log_sum_exp(std::span<const double> p) {
    const double mx = *std::max_element(p.begin(), p.end());
    double s = 0.0;
    for (double v : p) s += std::exp(v - mx);
    return mx + std::log(s);
}

double loss_value(LossKind kind, std::span<const double> p, std::span<const double> t) {
    if (p.size() != t.size()) length_error("loss target", t.size(), p.size());
    if (kind == LossKind::mse) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
        return s / static_cast<double>(p.size());
    }
    check_one_hot(t);
    const double lse = log_sum_exp(p);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s -= t[i] * (p[i] - lse);
    return s;
}

}  // namespace

double loss_eval(LossKind kind, const Vector& prediction, const Vector& target) {
    return loss_value(kind, prediction.span(), target.span());
}

std::vector<double> loss_gradient(LossKind kind, std::span<const double> p, std::span<const double> t) {
    if (p.size() != t.size()) length_error("loss target", t.size(), p.size());
    std::vector<double> g(p.size());
    if (kind == LossKind::mse) {
        const double scale = 2.0 / static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) g[i] = scale * (p[i] - t[i]);
        return g;
    }
    check_one_hot(t);
    const double lse = log_sum_exp(p);
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = std::exp(p[i] - lse) - t[i];
    return g;
}

Gradients network_backward(const Network& net, const Vector& x, const Vector& target, LossKind loss) {
    const auto acts = forward_trace(net, x.span());
    Gradients grads;
    grads.loss = loss_value(loss, acts.back(), target.span());
    grads.layers.resize(net.layer_count());
    std::vector<double> upstream = loss_gradient(loss, acts.back(), target.span());
    for (std::size_t i = net.layer_count(); i-- > 0;)
        upstream = net.layer(i).backward(acts[i], upstream, grads.layers[i]);
    return grads;
}

void sgd_step(Network& net, const Gradients& grads, double learning_rate) {
    if (grads.layers.size() != net.layer_count()) length_error("sgd_step layers", grads.layers.size(), net.layer_count());
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        Layer& l = net.layer(i);
        auto w = l.weights();
        auto b = l.bias();
        const auto& g = grads.layers[i];
        if (g.weights.size() != w.size()) length_error("sgd_step weights of layer " + std::to_string(i), g.weights.size(), w.size());
        if (g.bias.size() != b.size()) length_error("sgd_step bias of layer " + std::to_string(i), g.bias.size(), b.size());
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= learning_rate * g.weights[k];
        for (std::size_t k = 0; k < b.size(); ++k) b[k] -= learning_rate * g.bias[k];
    }
}

// ---------------------------------------------------------------------------
// Training

Vector target_for(const Dataset& data, std::size_t i, std::size_t out_dim) {
    if (data.class_count == 0) {
        if (out_dim != 1) length_error("regression target", 1, out_dim);
        return Vector{data.labels[i]};
    }
    if (data.class_count > out_dim) {
        throw ShapeError("network has " + std::to_string(out_dim) + " outputs for " +
                         std::to_string(data.class_count) + " classes");
    }
    std::vector<double> t(out_dim, 0.0);
    t[static_cast<std::size_t>(data.labels[i])] = 1.0;
    return Vector(std::move(t));
}

std::pair<double, double> evaluate(const Network& net, const Dataset& data, LossKind loss) {
    double total = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto acts = forward_trace(net, data.features.row(i));
        const auto& out = acts.back();
        total += loss_value(loss, out, target_for(data, i, net.out_dim()).span());
        if (data.class_count > 0) {
            const auto pred = static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
            if (static_cast<double>(pred) == data.labels[i]) ++correct;
        }
    }
    const double n = static_cast<double>(data.size());
    const double acc = data.class_count > 0 ? static_cast<double>(correct) / n
                                            : std::numeric_limits<double>::quiet_NaN();
    return {total / n, acc};
}

namespace {

// Per-sample gradients of one batch, reduced in sample order.
Gradients batch_gradients(const Network& net, const Dataset& data, std::span<const std::size_t> rows,
                          LossKind loss, int threads) {
    std::vector<Gradients> per(rows.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const std::size_t r = rows[s];
            per[s] = network_backward(net, data.sample(r), target_for(data, r, net.out_dim()), loss);
        }
    };
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), rows.size());
    if (nt <= 1) {
        work(0, rows.size());
    } else {
        std::vector<std::exception_ptr> errors(nt);
        std::vector<std::thread> pool;
        const std::size_t chunk = (rows.size() + nt - 1) / nt;
        for (std::size_t t = 0; t < nt; ++t) {
            const std::size_t b = t * chunk, e = std::min(rows.size(), b + chunk);
            pool.emplace_back([&, b, e, t] {
                try {
                    work(b, e);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }

    Gradients sum = per.front();
    for (std::size_t s = 1; s < per.size(); ++s) {
        sum.loss += per[s].loss;
        for (std::size_t l = 0; l < sum.layers.size(); ++l) {
            for (std::size_t k = 0; k < sum.layers[l].weights.size(); ++k)
                sum.layers[l].weights[k] += per[s].layers[l].weights[k];
            for (std::size_t k = 0; k < sum.layers[l].bias.size(); ++k)
                sum.layers[l].bias[k] += per[s].layers[l].bias[k];
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    sum.loss *= inv;
    for (auto& lg : sum.layers) {
        for (double& v : lg.weights) v *= inv;
        for (double& v : lg.bias) v *= inv;
    }
    return sum;
}

}  // namespace

TrainResult train(const NetworkSpec& spec, const TrainConfig& cfg, const Dataset& data) {
    data.validate();
    if (!(cfg.learning_rate > 0.0)) throw ParameterError("train: learning_rate must be positive");
    if (cfg.epochs < 0) throw ParameterError("train: epochs must be non-negative");
    if (cfg.batch_size == 0 || cfg.batch_size > data.size()) {
        throw ParameterError("train: batch_size must lie in [1, " + std::to_string(data.size()) + "]");
    }
    Network net(spec);
    if (net.in_dim() != data.dims()) {
        throw ShapeError("train: network input " + std::to_string(net.in_dim()) + " vs data dims " +
                         std::to_string(data.dims()));
    }
    // Shape problems in the targets surface here rather than mid-epoch.
    target_for(data, 0, net.out_dim());

    TrainHistory history;
    std::vector<std::size_t> order(data.size());
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(cfg.seed, static_cast<std::uint64_t>(epoch));
        rng.shuffle(order);

        double loss = 0.0, acc = 0.0;
        try {
            for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
                const std::size_t e = std::min(order.size(), b + cfg.batch_size);
                Gradients g = batch_gradients(net, data, std::span(order).subspan(b, e - b), cfg.loss, cfg.threads);
                if (!std::isfinite(g.loss)) throw NonFiniteError("non-finite batch loss");
                sgd_step(net, g, cfg.learning_rate);
            }
            std::tie(loss, acc) = evaluate(net, data, cfg.loss);
        } catch (const NonFiniteError&) {
            loss = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(loss)) {
            throw DivergenceError(epoch, "training diverged in epoch " + std::to_string(epoch) +
                                             " (non-finite loss)");
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        history.epochs.push_back({epoch, loss, acc, ms});
    }
    return {std::move(history), std::move(net)};
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
    out << "epoch,loss,accuracy,wall_ms\n";
    const auto old = out.precision(17);
    for (const auto& r : history.epochs)
        out << r.epoch << ',' << r.loss << ',' << r.accuracy << ',' << r.wall_ms << '\n';
    out.precision(old);
}

// ---------------------------------------------------------------------------
// Cost accounting

LayerCost layer_cost(const LayerSpec& l) {
    LayerCost c;
    c.biases = l.out_dim;
    switch (l.kind) {
        case LayerKind::dense:
            c.weights = l.in_dim * l.out_dim;
            c.mults = c.weights;
            break;
        case LayerKind::crosswise:
            c.weights = block_count_for(l.in_dim, l.out_dim) * l.in_dim;
            c.mults = c.weights;
            break;
        case LayerKind::crosswise_mixed: {
            const std::size_t n = next_power_of_two(l.in_dim);
            c.weights = block_count_for(n, l.out_dim) * n;
            c.mults = c.weights;
            c.fwht_ops = n * static_cast<std::size_t>(std::countr_zero(n));
            break;
        }
    }
    return c;
}

namespace {

CostReport cost_report(const NetworkSpec& spec) {
    CostReport r;
    for (const auto& l : spec.layers) {
        const LayerCost c = layer_cost(l);
        r.layers.push_back(c);
        r.total.weights += c.weights;
        r.total.biases += c.biases;
        r.total.mults += c.mults;
        r.total.fwht_ops += c.fwht_ops;
    }
    return r;
}

}  // namespace

CostReport count_weights(const NetworkSpec& spec) { return cost_report(spec); }
CostReport count_mults(const NetworkSpec& spec) { return cost_report(spec); }

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json network_to_json(const Network& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t i = 0; i < net.layer_count(); ++i) layers.push_back(net.layer(i).to_json());
    return {{"version", 1}, {"seed", net.spec().seed}, {"layers", layers}};
}

Network network_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("version", 0) != 1) throw ParameterError("model JSON: version must be 1");
    NetworkSpec spec;
    spec.seed = j.value("seed", std::uint64_t{0});
    std::vector<std::unique_ptr<Layer>> layers;
    for (const auto& lj : j.at("layers")) {
        LayerSpec ls;
        ls.kind = parse_layer_kind(lj.at("type").get<std::string>());
        ls.in_dim = lj.at("n").get<std::size_t>();
        ls.out_dim = lj.at("m").get<std::size_t>();
        ls.activation = parse_activation(lj.at("activation").get<std::string>());
        auto b = lj.at("b").get<std::vector<double>>();
        switch (ls.kind) {
            case LayerKind::dense:
                layers.push_back(std::make_unique<DenseLayer>(ls, lj.at("w").get<std::vector<double>>(), std::move(b)));
                break;
            case LayerKind::crosswise:
                layers.push_back(std::make_unique<CrosswiseLayer>(
                    ls, CrosswiseWeights(ls.in_dim, ls.out_dim, lj.at("c").get<std::vector<double>>(), std::move(b))));
                break;
            case LayerKind::crosswise_mixed:
                layers.push_back(std::make_unique<CrosswiseMixedLayer>(
                    ls, lj.at("signs").get<std::vector<double>>(), lj.at("perm").get<std::vector<std::size_t>>(),
                    CrosswiseWeights(next_power_of_two(ls.in_dim), ls.out_dim,
                                     lj.at("c").get<std::vector<double>>(), std::move(b))));
                break;
        }
        spec.layers.push_back(ls);
    }
    return Network(std::move(spec), std::move(layers));
}

}  // namespace cw
