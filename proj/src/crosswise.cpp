#include "crosswise/crosswise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crosswise/errors.hpp"
#include "crosswise/rng.hpp"

namespace cw {

namespace {

[[noreturn]] void length_error(const char* op, std::size_t got, std::size_t want) {
    std::ostringstream msg;
    msg << op << ": length " << got << ", expected " << want;
    throw ShapeError(msg.str());
}

}  // namespace

CrosswiseWeights::CrosswiseWeights(std::size_t in_dim, std::size_t out_dim,
                                   std::vector<double> coefficients, std::vector<double> bias)
    : in_dim_(in_dim), out_dim_(out_dim), coefficients_(std::move(coefficients)), bias_(std::move(bias)) {
    if (in_dim_ == 0 || out_dim_ == 0) throw ParameterError("CrosswiseWeights: dimensions must be positive");
    block_count_ = block_count_for(in_dim_, out_dim_);
    if (coefficients_.size() != block_count_ * in_dim_)
        length_error("CrosswiseWeights coefficients", coefficients_.size(), block_count_ * in_dim_);
    if (bias_.size() != out_dim_) length_error("CrosswiseWeights bias", bias_.size(), out_dim_);
}

Vector decurto_product(const Vector& c, const Vector& x) {
    if (c.size() != x.size()) length_error("decurto_product", x.size(), c.size());
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i] * x[i];
    return Vector(std::move(out));
}

void crosswise_apply(const CrosswiseWeights& w, std::span<const double> x, std::span<double> out) {
    const std::size_t n = w.in_dim();
    const std::size_t m = w.out_dim();
    const double* c = w.coefficients().data();
    // Block-by-block avoids a modulo per output.
    for (std::size_t start = 0; start < m; start += n) {
        const std::size_t len = std::min(n, m - start);
        for (std::size_t i = 0; i < len; ++i) out[start + i] = c[start + i] * x[i];
    }
}

Vector crosswise_forward(const CrosswiseWeights& w, const Vector& x, Activation activation) {
    if (x.size() != w.in_dim()) length_error("crosswise_forward", x.size(), w.in_dim());
    std::vector<double> y(w.out_dim());
    crosswise_apply(w, x.span(), y);
    const auto b = w.bias();
    for (std::size_t r = 0; r < y.size(); ++r) {
        y[r] += b[r];
        if (activation == Activation::relu) y[r] = std::max(y[r], 0.0);
    }
    return Vector(std::move(y));
}

Matrix expand_to_dense(const CrosswiseWeights& w) {
    Matrix d = Matrix::zeros(w.out_dim(), w.in_dim());
    const auto c = w.coefficients();
    for (std::size_t r = 0; r < w.out_dim(); ++r) d.at(r, r % w.in_dim()) = c[r];
    return d;
}

CrosswiseGradients crosswise_backward(const CrosswiseWeights& w, const Vector& x,
                                      const Vector& upstream, Activation activation) {
    const std::size_t n = w.in_dim();
    const std::size_t m = w.out_dim();
    if (x.size() != n) length_error("crosswise_backward input", x.size(), n);
    if (upstream.size() != m) length_error("crosswise_backward upstream", upstream.size(), m);

    std::vector<double> g(upstream.values());
    if (activation == Activation::relu) {
        std::vector<double> pre(m);
        crosswise_apply(w, x.span(), pre);
        for (std::size_t r = 0; r < m; ++r)
            if (pre[r] + w.bias()[r] <= 0.0) g[r] = 0.0;
    }

    const auto c = w.coefficients();
    std::vector<double> grad_c(w.weight_count(), 0.0);
    std::vector<double> grad_x(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        grad_c[r] = g[r] * x[r % n];
        grad_x[r % n] += c[r] * g[r];
    }
    return {Vector(std::move(grad_c)), Vector(std::move(g)), Vector(std::move(grad_x))};
}

CrosswiseWeights init_crosswise(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim,
                                InitScheme scheme) {
    if (in_dim == 0 || out_dim == 0) throw ParameterError("init_crosswise: dimensions must be positive");
    const std::size_t count = block_count_for(in_dim, out_dim) * in_dim;
    std::vector<double> c(count, 1.0);
    if (scheme == InitScheme::uniform_scaled) {
        Rng rng(seed, 0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
        for (double& v : c) v = rng.uniform(-1.0, 1.0) * scale;
    }
    return CrosswiseWeights(in_dim, out_dim, std::move(c), std::vector<double>(out_dim, 0.0));
}

}  // namespace cw
