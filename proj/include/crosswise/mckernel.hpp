#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crosswise/linalg.hpp"

namespace cw {

constexpr bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }
std::size_t next_power_of_two(std::size_t n);

// In-place unnormalized Walsh-Hadamard transform, H_2 = [[1,1],[1,-1]],
// H_2n = H_2 kron H_n. Length must be a power of two.
void fwht_inplace(std::span<double> v);
Vector fwht(const Vector& v);

// One draw of the structured projection
//   Z = 1/(sigma sqrt(n)) * C H G P H B
// with B random signs, P a permutation ((P v)[i] = v[perm[i]]), G Gaussian
// and C rescaling row i to a chi(n)-distributed norm, which makes the rows
// of Z distributed like those of a dense Gaussian matrix N(0, I/sigma^2).
struct McKernelBlock {
    std::size_t n = 0;
    double sigma = 1.0;
    std::vector<double> b_signs;
    std::vector<std::size_t> perm;
    std::vector<double> g_diag;
    std::vector<double> c_diag;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// n is the smallest power of two >= d. Draw order from Rng(seed, stream):
// n signs, Fisher-Yates shuffle of 0..n-1, n normals for G, then n*n
// normals whose row norms give the chi(n) scales of C.
McKernelBlock sample_block(std::uint64_t seed, std::size_t d, double sigma, std::uint64_t stream = 0);

// Z applied to x zero-padded to length n.
Vector apply_zhat(const McKernelBlock& block, const Vector& x);

struct FeatureMap {
    std::vector<McKernelBlock> blocks;
    std::size_t input_dim = 0;

    std::size_t block_dim() const { return blocks.empty() ? 0 : blocks.front().n; }
    std::size_t feature_count() const { return 2 * block_dim() * blocks.size(); }
};

// Block i is sample_block(seed, d, sigma, stream = i).
FeatureMap make_feature_map(std::uint64_t seed, std::size_t d, double sigma, std::size_t block_count);

// [cos(Z_1 x); sin(Z_1 x); cos(Z_2 x); ...] / sqrt(n * block_count), so that
// <phi(x), phi(x)> = 1 and <phi(x), phi(y)> approximates kernel_exact.
Vector feature_map_apply(const FeatureMap& fm, const Vector& x);

double kernel_approx(const FeatureMap& fm, const Vector& x, const Vector& y);

// exp(-|x - y|^2 / (2 sigma^2)).
double kernel_exact(const Vector& x, const Vector& y, double sigma);

// sum_k a_k k(x, x_k). Exact kernel when fm is empty, feature inner
// products otherwise.
double rbf_expansion_eval(std::span<const Vector> centers, std::span<const double> amplitudes,
                          const Vector& x, double sigma, const FeatureMap* fm = nullptr);

// Uniform point on the unit sphere in R^d, from Rng(seed, stream).
Vector unit_sphere_point(std::uint64_t seed, std::uint64_t stream, std::size_t d);

struct KernelCheckRow {
    std::size_t blocks = 0;
    std::size_t pair = 0;
    double exact = 0.0;
    double approx = 0.0;
    double abs_error = 0.0;
};

struct KernelCheckSummary {
    std::size_t blocks = 0;
    double mean_abs_error = 0.0;
    double max_abs_error = 0.0;
};

struct KernelCheckResult {
    std::vector<KernelCheckRow> rows;
    std::vector<KernelCheckSummary> summaries;  // one per block count, input order
};

// Pair p is (unit_sphere_point(seed, 2^32 + 2p), unit_sphere_point(seed,
// 2^32 + 2p + 1)); the feature map for each block count is
// make_feature_map(seed, d, sigma, blocks). Pairs are shared across block
// counts.
KernelCheckResult kernel_check(std::size_t d, double sigma, const std::vector<std::size_t>& block_counts,
                               std::size_t pairs, std::uint64_t seed);

}  // namespace cw
