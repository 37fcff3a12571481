#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crosswise/crosswise.hpp"
#include "crosswise/dataset.hpp"
#include "crosswise/linalg.hpp"

namespace cw {

enum class LayerKind { dense, crosswise, crosswise_mixed };

// softmax_output marks the logits layer of a classifier: the layer itself
// is linear and softmax is fused into the cross-entropy loss.
enum class LayerActivation { relu, identity, softmax_output };

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    LayerActivation activation = LayerActivation::relu;
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    std::uint64_t seed = 0;

    // Non-empty, positive dims, dims chain, softmax_output last only.
    void validate() const;
};

const char* to_string(LayerKind kind);
const char* to_string(LayerActivation act);
LayerKind parse_layer_kind(const std::string& s);
LayerActivation parse_activation(const std::string& s);

// Gradient of one layer, laid out like Layer::weights() and Layer::bias().
struct LayerGrad {
    std::vector<double> weights;
    std::vector<double> bias;
};

struct Gradients {
    std::vector<LayerGrad> layers;
    double loss = 0.0;
};

class Layer {
public:
    explicit Layer(LayerSpec spec) : spec_(spec) {}
    virtual ~Layer() = default;

    const LayerSpec& spec() const noexcept { return spec_; }

    // W x + b (or its structured equivalent), before the activation.
    virtual std::vector<double> pre_activation(std::span<const double> x) const = 0;

    // Given dL/d(pre-activation), writes parameter gradients into `grad` and
    // returns dL/dx.
    virtual std::vector<double> backward_linear(std::span<const double> x,
                                                std::span<const double> grad_pre,
                                                LayerGrad& grad) const = 0;

    // Learned parameters. Dense: row-major out x in. Crosswise kinds: the
    // diagonal coefficients.
    virtual std::span<double> weights() = 0;
    virtual std::span<double> bias() = 0;
    virtual std::span<const double> weights() const = 0;
    virtual std::span<const double> bias() const = 0;

    // The out x in matrix whose matvec equals pre_activation minus bias.
    virtual Matrix dense_equivalent() const = 0;

    virtual nlohmann::json to_json() const = 0;
    virtual std::unique_ptr<Layer> clone() const = 0;

    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> backward(std::span<const double> x, std::span<const double> upstream,
                                 LayerGrad& grad) const;

private:
    LayerSpec spec_;
};

class DenseLayer final : public Layer {
public:
    DenseLayer(LayerSpec spec, std::vector<double> weights, std::vector<double> bias);
    static DenseLayer init(LayerSpec spec, std::uint64_t seed);

    std::vector<double> pre_activation(std::span<const double> x) const override;
    std::vector<double> backward_linear(std::span<const double> x, std::span<const double> grad_pre,
                                        LayerGrad& grad) const override;
    std::span<double> weights() override { return w_; }
    std::span<double> bias() override { return b_; }
    std::span<const double> weights() const override { return w_; }
    std::span<const double> bias() const override { return b_; }
    Matrix dense_equivalent() const override;
    nlohmann::json to_json() const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

private:
    std::vector<double> w_;
    std::vector<double> b_;
};

class CrosswiseLayer final : public Layer {
public:
    CrosswiseLayer(LayerSpec spec, CrosswiseWeights weights);
    static CrosswiseLayer init(LayerSpec spec, std::uint64_t seed);

    const CrosswiseWeights& crosswise() const noexcept { return w_; }

    std::vector<double> pre_activation(std::span<const double> x) const override;
    std::vector<double> backward_linear(std::span<const double> x, std::span<const double> grad_pre,
                                        LayerGrad& grad) const override;
    std::span<double> weights() override { return w_.coefficients(); }
    std::span<double> bias() override { return w_.bias(); }
    std::span<const double> weights() const override { return w_.coefficients(); }
    std::span<const double> bias() const override { return w_.bias(); }
    Matrix dense_equivalent() const override { return expand_to_dense(w_); }
    nlohmann::json to_json() const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<CrosswiseLayer>(*this); }

private:
    CrosswiseWeights w_;
};

// Fixed mixing followed by a learned crosswise map of width n, where n is
// the next power of two >= in_dim:
//   u = pad_n(x) * signs;  v = H u / sqrt(n);  w[i] = v[perm[i]];  y = crosswise(w)
// Only the crosswise coefficients and bias are trained.
class CrosswiseMixedLayer final : public Layer {
public:
    CrosswiseMixedLayer(LayerSpec spec, std::vector<double> signs, std::vector<std::size_t> perm,
                        CrosswiseWeights weights);
    static CrosswiseMixedLayer init(LayerSpec spec, std::uint64_t seed);

    std::size_t mixed_dim() const noexcept { return signs_.size(); }
    const CrosswiseWeights& crosswise() const noexcept { return w_; }
    std::span<const double> signs() const noexcept { return signs_; }
    std::span<const std::size_t> perm() const noexcept { return perm_; }

    std::vector<double> mix(std::span<const double> x) const;
    // n x in_dim matrix of the fixed mixing stage.
    Matrix mixing_matrix() const;

    std::vector<double> pre_activation(std::span<const double> x) const override;
    std::vector<double> backward_linear(std::span<const double> x, std::span<const double> grad_pre,
                                        LayerGrad& grad) const override;
    std::span<double> weights() override { return w_.coefficients(); }
    std::span<double> bias() override { return w_.bias(); }
    std::span<const double> weights() const override { return w_.coefficients(); }
    std::span<const double> bias() const override { return w_.bias(); }
    Matrix dense_equivalent() const override;
    nlohmann::json to_json() const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<CrosswiseMixedLayer>(*this); }

private:
    std::vector<double> signs_;
    std::vector<std::size_t> perm_;
    CrosswiseWeights w_;
};

class Network {
public:
    // Layer i is initialised from random_word(spec.seed, 0, i).
    explicit Network(const NetworkSpec& spec);
    Network(NetworkSpec spec, std::vector<std::unique_ptr<Layer>> layers);
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    const NetworkSpec& spec() const noexcept { return spec_; }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }

    std::size_t in_dim() const { return spec_.layers.front().in_dim; }
    std::size_t out_dim() const { return spec_.layers.back().out_dim; }

private:
    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Same function, every layer replaced by a dense layer holding its
// dense_equivalent.
Network dense_twin(const Network& net);

enum class LossKind { mse, cross_entropy };
const char* to_string(LossKind kind);
LossKind parse_loss(const std::string& s);

// Output of the last layer (logits when it is softmax_output).
Vector network_forward(const Network& net, const Vector& x);

// mse = mean((p - t)^2); cross_entropy = -sum t log softmax(p), with a
// one-hot target.
double loss_eval(LossKind kind, const Vector& prediction, const Vector& target);
std::vector<double> loss_gradient(LossKind kind, std::span<const double> prediction,
                                  std::span<const double> target);

Gradients network_backward(const Network& net, const Vector& x, const Vector& target, LossKind loss);

// p <- p - lr * grad for every weight and bias.
void sgd_step(Network& net, const Gradients& grads, double learning_rate);

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 1;
    std::size_t batch_size = 1;
    LossKind loss = LossKind::cross_entropy;
    std::uint64_t seed = 0;
    // Per-sample backward passes are spread over this many threads; the
    // reduction order stays sample order.
    int threads = 1;
};

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;  // NaN for regression data
    double wall_ms = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    TrainHistory history;
    Network network;
};

// Target vector for row i: one-hot of width out_dim for classification,
// the scalar label otherwise.
Vector target_for(const Dataset& data, std::size_t i, std::size_t out_dim);

// Mean loss and accuracy of `net` over the whole dataset.
std::pair<double, double> evaluate(const Network& net, const Dataset& data, LossKind loss);

// Mini-batch SGD with averaged gradients. Each epoch shuffles the row order
// with Rng(cfg.seed, epoch) and records full-dataset loss and accuracy
// after its updates. Throws DivergenceError on a non-finite loss.
TrainResult train(const NetworkSpec& spec, const TrainConfig& cfg, const Dataset& data);

void write_history_csv(std::ostream& out, const TrainHistory& history);

struct LayerCost {
    std::size_t weights = 0;
    std::size_t biases = 0;
    std::size_t mults = 0;
    std::size_t fwht_ops = 0;  // butterfly operations, crosswise_mixed only
};

struct CostReport {
    std::vector<LayerCost> layers;
    LayerCost total;
};

// dense: in*out. crosswise: ceil(out/in)*in. crosswise_mixed: same rule at
// the padded width n, plus n*log2(n) butterflies.
LayerCost layer_cost(const LayerSpec& layer);
CostReport count_weights(const NetworkSpec& spec);
CostReport count_mults(const NetworkSpec& spec);

// {"version":1,"layers":[...]} with one type-tagged object per layer.
nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

}  // namespace cw
