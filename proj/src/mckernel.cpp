#include "crosswise/mckernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <sstream>

#include "crosswise/errors.hpp"
#include "crosswise/rng.hpp"

namespace cw {

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fwht_inplace(std::span<double> v) {
    const std::size_t n = v.size();
    if (!is_power_of_two(n)) {
        throw ShapeError("fwht: length " + std::to_string(n) + " is not a power of two");
    }
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = v[j];
                const double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
}

Vector fwht(const Vector& v) {
    std::vector<double> out(v.values());
    fwht_inplace(out);
    return Vector(std::move(out));
}

McKernelBlock sample_block(std::uint64_t seed, std::size_t d, double sigma, std::uint64_t stream) {
    if (d == 0) throw ParameterError("sample_block: input dimension must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ParameterError("sample_block: sigma must be positive and finite");
    }
    McKernelBlock blk;
    blk.n = next_power_of_two(d);
    blk.sigma = sigma;
    blk.seed = seed;
    blk.stream = stream;
    const std::size_t n = blk.n;

    Rng rng(seed, stream);
    blk.b_signs.resize(n);
    for (double& s : blk.b_signs) s = rng.sign();

    blk.perm.resize(n);
    std::iota(blk.perm.begin(), blk.perm.end(), std::size_t{0});
    rng.shuffle(blk.perm);

    blk.g_diag.resize(n);
    for (double& g : blk.g_diag) g = rng.normal();
    const double g_norm = std::sqrt(dot(blk.g_diag, blk.g_diag));

    blk.c_diag.resize(n);
    for (double& c : blk.c_diag) {
        double sq = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double z = rng.normal();
            sq += z * z;
        }
        c = std::sqrt(sq) / g_norm;
    }
    return blk;
}

namespace {

void zhat_into(const McKernelBlock& blk, std::span<const double> x, std::vector<double>& work,
               std::vector<double>& out) {
    const std::size_t n = blk.n;
    work.assign(n, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) work[i] = blk.b_signs[i] * x[i];
    fwht_inplace(work);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = blk.g_diag[i] * work[blk.perm[i]];
    fwht_inplace(out);
    const double scale = 1.0 / (blk.sigma * std::sqrt(static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) out[i] *= scale * blk.c_diag[i];
}

}  // namespace

Vector apply_zhat(const McKernelBlock& blk, const Vector& x) {
    if (x.size() > blk.n) {
        throw ShapeError("apply_zhat: input length " + std::to_string(x.size()) +
                         " exceeds block dimension " + std::to_string(blk.n));
    }
    std::vector<double> work, out;
    zhat_into(blk, x.span(), work, out);
    return Vector(std::move(out));
}

FeatureMap make_feature_map(std::uint64_t seed, std::size_t d, double sigma, std::size_t block_count) {
    if (block_count == 0) throw ParameterError("make_feature_map: block_count must be positive");
    FeatureMap fm;
    fm.input_dim = d;
    fm.blocks.reserve(block_count);
    for (std::size_t i = 0; i < block_count; ++i) fm.blocks.push_back(sample_block(seed, d, sigma, i));
    return fm;
}

Vector feature_map_apply(const FeatureMap& fm, const Vector& x) {
    if (x.size() != fm.input_dim) {
        throw ShapeError("feature_map_apply: input length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(fm.input_dim));
    }
    const std::size_t n = fm.block_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n * fm.blocks.size()));
    std::vector<double> phi(fm.feature_count());
    std::vector<double> work, z;
    for (std::size_t b = 0; b < fm.blocks.size(); ++b) {
        zhat_into(fm.blocks[b], x.span(), work, z);
        double* cos_part = phi.data() + 2 * n * b;
        double* sin_part = cos_part + n;
        for (std::size_t i = 0; i < n; ++i) {
            cos_part[i] = std::cos(z[i]) * scale;
            sin_part[i] = std::sin(z[i]) * scale;
        }
    }
    return Vector(std::move(phi));
}

double kernel_approx(const FeatureMap& fm, const Vector& x, const Vector& y) {
    return dot(feature_map_apply(fm, x).span(), feature_map_apply(fm, y).span());
}

double kernel_exact(const Vector& x, const Vector& y, double sigma) {
    if (x.size() != y.size()) {
        throw ShapeError("kernel_exact: lengths differ (" + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
    }
    if (!(sigma > 0.0)) throw ParameterError("kernel_exact: sigma must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sq += (x[i] - y[i]) * (x[i] - y[i]);
    return std::exp(-sq / (2.0 * sigma * sigma));
}

double rbf_expansion_eval(std::span<const Vector> centers, std::span<const double> amplitudes,
                          const Vector& x, double sigma, const FeatureMap* fm) {
    if (centers.size() != amplitudes.size()) {
        throw ShapeError("rbf_expansion_eval: " + std::to_string(centers.size()) + " centers but " +
                         std::to_string(amplitudes.size()) + " amplitudes");
    }
    if (!(sigma > 0.0)) throw ParameterError("rbf_expansion_eval: sigma must be positive");
    if (fm && std::abs(fm->blocks.front().sigma - sigma) > 0.0) {
        throw ParameterError("rbf_expansion_eval: feature map bandwidth differs from sigma");
    }
    double total = 0.0;
    if (!fm) {
        for (std::size_t k = 0; k < centers.size(); ++k) total += amplitudes[k] * kernel_exact(x, centers[k], sigma);
        return total;
    }
    const Vector phi_x = feature_map_apply(*fm, x);
    for (std::size_t k = 0; k < centers.size(); ++k)
        total += amplitudes[k] * dot(phi_x.span(), feature_map_apply(*fm, centers[k]).span());
    return total;
}

Vector unit_sphere_point(std::uint64_t seed, std::uint64_t stream, std::size_t d) {
    if (d == 0) throw ParameterError("unit_sphere_point: dimension must be positive");
    Rng rng(seed, stream);
    std::vector<double> v(d);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (double& x : v) {
            x = rng.normal();
            sq += x * x;
        }
    } while (sq == 0.0);
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
    return Vector(std::move(v));
}

KernelCheckResult kernel_check(std::size_t d, double sigma, const std::vector<std::size_t>& block_counts,
                               std::size_t pairs, std::uint64_t seed) {
    if (d == 0) throw ParameterError("kernel_check: d must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("kernel_check: sigma must be positive");
    if (pairs == 0) throw ParameterError("kernel_check: pairs must be positive");
    if (block_counts.empty()) throw ParameterError("kernel_check: no block counts");

    constexpr std::uint64_t kPairStreamBase = std::uint64_t{1} << 32;
    std::vector<std::pair<Vector, Vector>> points;
    points.reserve(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
        points.emplace_back(unit_sphere_point(seed, kPairStreamBase + 2 * p, d),
                            unit_sphere_point(seed, kPairStreamBase + 2 * p + 1, d));
    }

    KernelCheckResult result;
    for (std::size_t blocks : block_counts) {
        const FeatureMap fm = make_feature_map(seed, d, sigma, blocks);
        KernelCheckSummary summary{blocks, 0.0, 0.0};
        for (std::size_t p = 0; p < pairs; ++p) {
            const auto& [x, y] = points[p];
            const double exact = kernel_exact(x, y, sigma);
            const double approx = kernel_approx(fm, x, y);
            const double err = std::abs(approx - exact);
            result.rows.push_back({blocks, p, exact, approx, err});
            summary.mean_abs_error += err;
            summary.max_abs_error = std::max(summary.max_abs_error, err);
        }
        summary.mean_abs_error /= static_cast<double>(pairs);
        result.summaries.push_back(summary);
    }
    return result;
}

}  // namespace cw
