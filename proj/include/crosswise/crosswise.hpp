#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crosswise/linalg.hpp"

namespace cw {

enum class Activation { relu, identity };

// Learned coefficients of a block-stacked diagonal layer mapping N inputs
// to M outputs. k = ceil(M/N) diagonal N x N blocks are stacked vertically
// and the stack is cut to its first M rows, so the last block may be only
// partly used. Coefficient j*N + i scales input i into output j*N + i.
class CrosswiseWeights {
public:
    CrosswiseWeights(std::size_t in_dim, std::size_t out_dim, std::vector<double> coefficients,
                     std::vector<double> bias);

    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t out_dim() const noexcept { return out_dim_; }
    std::size_t block_count() const noexcept { return block_count_; }

    std::span<const double> coefficients() const noexcept { return coefficients_; }
    std::span<const double> bias() const noexcept { return bias_; }
    std::span<double> coefficients() noexcept { return coefficients_; }
    std::span<double> bias() noexcept { return bias_; }

    // k*N; equals M whenever N divides M.
    std::size_t weight_count() const noexcept { return coefficients_.size(); }

private:
    std::size_t in_dim_;
    std::size_t out_dim_;
    std::size_t block_count_;
    std::vector<double> coefficients_;
    std::vector<double> bias_;
};

constexpr std::size_t block_count_for(std::size_t in_dim, std::size_t out_dim) {
    return (out_dim + in_dim - 1) / in_dim;
}

// result[i] = c[i] * x[i].
Vector decurto_product(const Vector& c, const Vector& x);

// Pre-activation without bias: out[r] = c[r] * x[r mod N] for r < M.
// Raw-span kernel shared by the layer code and the benchmark.
void crosswise_apply(const CrosswiseWeights& w, std::span<const double> x, std::span<double> out);

Vector crosswise_forward(const CrosswiseWeights& w, const Vector& x, Activation activation);

// The M x N matrix the layer is equivalent to.
Matrix expand_to_dense(const CrosswiseWeights& w);

struct CrosswiseGradients {
    Vector coefficients;  // length k*N; entries past M are zero
    Vector bias;          // length M
    Vector input;         // length N
};

// Gradients of <upstream, crosswise_forward(w, x, activation)>. ReLU's
// derivative at exactly zero is taken as zero.
CrosswiseGradients crosswise_backward(const CrosswiseWeights& w, const Vector& x,
                                      const Vector& upstream, Activation activation);

enum class InitScheme { uniform_scaled, ones };

// uniform_scaled: c ~ U[-1,1] / sqrt(N). Bias starts at zero either way.
CrosswiseWeights init_crosswise(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim,
                                InitScheme scheme);

}  // namespace cw
