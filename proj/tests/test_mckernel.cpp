#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crosswise/errors.hpp"
#include "crosswise/mckernel.hpp"
#include "crosswise/rng.hpp"
#include "oracles.hpp"

using namespace cw;

namespace {

std::vector<double> uniform(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

// (1/(sigma sqrt n)) diag(C) H diag(G) P H diag(B), assembled densely.
oracle::Dense zhat_dense(const McKernelBlock& blk) {
    using namespace oracle;
    const Dense h = sylvester_hadamard(blk.n);
    Dense z = matmul(diag(blk.c_diag),
                     matmul(h, matmul(diag(blk.g_diag), matmul(permutation_matrix(blk.perm),
                                                               matmul(h, diag(blk.b_signs))))));
    const double scale = 1.0 / (blk.sigma * std::sqrt(static_cast<double>(blk.n)));
    for (auto& row : z)
        for (double& v : row) v *= scale;
    return z;
}

}  // namespace

TEST_CASE("fwht small cases") {
    CHECK(oracle::matvec(oracle::sylvester_hadamard(2), {1, 0}) == std::vector<double>{1, 1});
    CHECK(oracle::matvec(oracle::sylvester_hadamard(4), {1, 0, 0, 0}) == std::vector<double>{1, 1, 1, 1});
    CHECK(fwht(Vector{1, 0}) == Vector{1, 1});
    CHECK(fwht(Vector{1, 0, 0, 0}) == Vector{1, 1, 1, 1});
    CHECK(fwht(Vector{0, 1}) == Vector{1, -1});
    CHECK(fwht(Vector{5}) == Vector{5});
    CHECK_THROWS_AS(fwht(Vector{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(fwht(Vector::zeros(6)), ShapeError);
}

TEST_CASE("property: fwht matches the Sylvester matrix and is an involution up to n") {
    for (std::size_t n = 2; n <= 1024; n *= 2) {
        const oracle::Dense h = oracle::sylvester_hadamard(n);
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            Rng rng(seed, n);
            const std::vector<double> x = uniform(rng, n);
            const Vector fx = fwht(Vector(x));
            CHECK(oracle::max_abs(fx.values(), oracle::matvec(h, x)) < 1e-10);
            std::vector<double> nx(x);
            for (double& v : nx) v *= static_cast<double>(n);
            CHECK(oracle::max_abs(fwht(fx).values(), nx) < 1e-10);
        }
    }
}

TEST_CASE("sample_block") {
    const McKernelBlock a = sample_block(3, 5, 0.7);
    const McKernelBlock b = sample_block(3, 5, 0.7);
    CHECK(a.n == 8);
    CHECK(a.b_signs == b.b_signs);
    CHECK(a.perm == b.perm);
    CHECK(a.g_diag == b.g_diag);
    CHECK(a.c_diag == b.c_diag);

    std::vector<std::size_t> sorted(a.perm);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> ident(8);
    std::iota(ident.begin(), ident.end(), std::size_t{0});
    CHECK(sorted == ident);
    for (double s : a.b_signs) CHECK((s == 1.0 || s == -1.0));
    for (double c : a.c_diag) CHECK(c > 0.0);

    CHECK(sample_block(1, 8, 1.0).n == 8);
    CHECK(sample_block(1, 1, 1.0).n == 1);
    CHECK_THROWS_AS(sample_block(1, 0, 1.0), ParameterError);
    CHECK_THROWS_AS(sample_block(1, 4, 0.0), ParameterError);
    CHECK_THROWS_AS(sample_block(1, 4, -1.0), ParameterError);
    CHECK(sample_block(1, 8, 1.0, 0).g_diag != sample_block(1, 8, 1.0, 1).g_diag);
}

TEST_CASE("C rescales Z rows to chi(n) norms over ||g||") {
    // Row i of Z has norm c_i * ||g|| / sigma, i.e. s_i / sigma.
    const McKernelBlock blk = sample_block(21, 16, 2.0);
    const auto z = zhat_dense(blk);
    double g2 = 0.0;
    for (double g : blk.g_diag) g2 += g * g;
    for (std::size_t i = 0; i < blk.n; ++i) {
        double r2 = 0.0;
        for (double v : z[i]) r2 += v * v;
        CHECK(std::sqrt(r2) == doctest::Approx(blk.c_diag[i] * std::sqrt(g2) / blk.sigma).epsilon(1e-12));
    }
}

TEST_CASE("apply_zhat") {
    const McKernelBlock blk = sample_block(5, 4, 1.3);
    Rng rng(5, 1);
    const std::vector<double> x = uniform(rng, 4);
    SUBCASE("matches the dense assembly") {
        CHECK(oracle::max_abs(apply_zhat(blk, Vector(x)).values(), oracle::matvec(zhat_dense(blk), x)) < 1e-10);
    }
    SUBCASE("is linear") {
        std::vector<double> x3(x);
        for (double& v : x3) v *= -2.5;
        std::vector<double> expect = apply_zhat(blk, Vector(x)).values();
        for (double& v : expect) v *= -2.5;
        CHECK(oracle::max_abs(apply_zhat(blk, Vector(x3)).values(), expect) < 1e-12);
    }
    SUBCASE("zero in, zero out") { CHECK(apply_zhat(blk, Vector::zeros(4)) == Vector::zeros(4)); }
    SUBCASE("short inputs are zero padded") {
        const McKernelBlock b8 = sample_block(5, 5, 1.0);
        const Vector short_x{1, 2, 3};
        CHECK(apply_zhat(b8, short_x) == apply_zhat(b8, Vector{1, 2, 3, 0, 0, 0, 0, 0}));
        CHECK_THROWS_AS(apply_zhat(b8, Vector::zeros(9)), ShapeError);
    }
}

TEST_CASE("property: apply_zhat equals dense assembly for n <= 64") {
    for (std::size_t d : {1u, 2u, 3u, 7u, 16u, 33u, 64u}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const McKernelBlock blk = sample_block(seed, d, 0.5 + static_cast<double>(seed) / 10.0);
            Rng rng(seed, 99);
            const std::vector<double> x = uniform(rng, d);
            std::vector<double> padded(x);
            padded.resize(blk.n, 0.0);
            REQUIRE(oracle::max_abs(apply_zhat(blk, Vector(x)).values(), oracle::matvec(zhat_dense(blk), padded)) <
                    1e-10);
        }
    }
}

TEST_CASE("feature map normalisation") {
    const FeatureMap fm = make_feature_map(1, 6, 1.0, 3);
    CHECK(fm.block_dim() == 8);
    CHECK(fm.feature_count() == 48);
    Rng rng(2, 0);
    for (int t = 0; t < 20; ++t) {
        const Vector x(uniform(rng, 6));
        const Vector phi = feature_map_apply(fm, x);
        REQUIRE(phi.size() == 48);
        CHECK(dot(phi.span(), phi.span()) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const Vector phi0 = feature_map_apply(fm, Vector::zeros(6));
    const double expected = 1.0 / std::sqrt(24.0);
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(phi0[16 * b + i] == doctest::Approx(expected).epsilon(1e-15));
            CHECK(phi0[16 * b + 8 + i] == 0.0);
        }
    CHECK_THROWS_AS(feature_map_apply(fm, Vector::zeros(5)), ShapeError);
    CHECK_THROWS_AS(make_feature_map(1, 6, 1.0, 0), ParameterError);
}

TEST_CASE("property: approximate kernel is symmetric, bounded and deterministic") {
    const FeatureMap fm = make_feature_map(8, 8, 1.0, 4);
    const FeatureMap fm2 = make_feature_map(8, 8, 1.0, 4);
    Rng rng(8, 0);
    for (int t = 0; t < 50; ++t) {
        const Vector x(uniform(rng, 8)), y(uniform(rng, 8));
        const double kxy = kernel_approx(fm, x, y);
        CHECK(kxy == kernel_approx(fm, y, x));
        CHECK(kxy <= 1.0 + 1e-12);
        CHECK(kxy >= -1.0 - 1e-12);
        CHECK(feature_map_apply(fm, x) == feature_map_apply(fm2, x));
    }
}

TEST_CASE("kernel_exact") {
    const Vector x{0.3, -1.2, 2.0};
    CHECK(kernel_exact(x, x, 0.8) == 1.0);
    const double sigma = 1.7;
    CHECK(kernel_exact(Vector{0}, Vector{sigma * std::sqrt(2.0)}, sigma) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    Rng rng(1, 1);
    for (int t = 0; t < 20; ++t) {
        const Vector a(uniform(rng, 5)), b(uniform(rng, 5));
        CHECK(kernel_exact(a, b, 1.1) == kernel_exact(b, a, 1.1));
    }
    CHECK_THROWS_AS(kernel_exact(Vector{1}, Vector{1, 2}, 1.0), ShapeError);
    CHECK_THROWS_AS(kernel_exact(Vector{1}, Vector{1}, 0.0), ParameterError);
}

TEST_CASE("single pair approximation at D = 4096") {
    // 8-dim input -> n = 8, D = 2 * 8 * 256.
    const FeatureMap fm = make_feature_map(31, 8, 1.0, 256);
    REQUIRE(fm.feature_count() == 4096);
    Rng rng(31, 5);
    const Vector x(uniform(rng, 8)), y(uniform(rng, 8));
    const double exact = kernel_exact(x, y, 1.0);
    CHECK(std::abs(kernel_approx(fm, x, y) - exact) <= 0.08);

    // Plain Gaussian random features with the same 2048 frequencies land
    // in the same band, so the tolerance is attainable at this size.
    const oracle::DenseRff rff(31, 8, 1.0, 2048);
    CHECK(std::abs(rff.kernel(x.values(), y.values()) - exact) <= 0.08);
}

TEST_CASE("rbf_expansion_eval") {
    const Vector c{0.5, -0.5, 1.0};
    const std::vector<Vector> one{c};
    const std::vector<double> a1{1.0};
    CHECK(rbf_expansion_eval(one, a1, c, 0.9) == 1.0);
    const std::vector<double> zero{0.0};
    CHECK(rbf_expansion_eval(one, zero, Vector{3, 2, 1}, 0.9) == 0.0);
    CHECK_THROWS_AS(rbf_expansion_eval(one, std::vector<double>{1, 2}, c, 1.0), ShapeError);
    CHECK_THROWS_AS(rbf_expansion_eval(one, a1, c, 0.0), ParameterError);

    // Five centres in d = 8 with D = 4096 features.
    Rng rng(12, 0);
    std::vector<Vector> centres;
    std::vector<double> amps;
    for (int k = 0; k < 5; ++k) {
        centres.emplace_back(uniform(rng, 8));
        amps.push_back(rng.uniform(-2.0, 2.0));
    }
    const Vector x(uniform(rng, 8));
    const FeatureMap fm = make_feature_map(12, 8, 1.0, 256);
    double exact_sum = 0.0, abs_amps = 0.0;
    for (int k = 0; k < 5; ++k) {
        exact_sum += amps[static_cast<std::size_t>(k)] * std::exp(-[&] {
            double s = 0.0;
            for (std::size_t j = 0; j < 8; ++j) s += (x[j] - centres[static_cast<std::size_t>(k)][j]) * (x[j] - centres[static_cast<std::size_t>(k)][j]);
            return s / 2.0;
        }());
        abs_amps += std::abs(amps[static_cast<std::size_t>(k)]);
    }
    const double exact = rbf_expansion_eval(centres, amps, x, 1.0);
    CHECK(exact == doctest::Approx(exact_sum).epsilon(1e-14));
    const double approx = rbf_expansion_eval(centres, amps, x, 1.0, &fm);
    CHECK(std::abs(approx - exact) <= 0.1 * abs_amps);

    const FeatureMap wrong_sigma = make_feature_map(12, 8, 2.0, 1);
    CHECK_THROWS_AS(rbf_expansion_eval(centres, amps, x, 1.0, &wrong_sigma), ParameterError);
}

TEST_CASE("Gaussian network form is the sigma = 1/sqrt(2) case") {
    const Vector x{0.1, 0.2}, xk{-0.3, 0.4};
    const double sq = 0.16 + 0.04;
    CHECK(kernel_exact(x, xk, 1.0 / std::sqrt(2.0)) == doctest::Approx(std::exp(-sq)).epsilon(1e-14));
}

TEST_CASE("kernel approximation improves with more blocks") {
    const KernelCheckResult r = kernel_check(8, 1.0, {1, 64}, 200, 0);
    REQUIRE(r.summaries.size() == 2);
    CHECK(r.rows.size() == 400);
    CHECK(r.summaries[1].mean_abs_error < r.summaries[0].mean_abs_error);
    CHECK(r.summaries[1].mean_abs_error <= 0.05);
    for (const auto& row : r.rows) CHECK(row.abs_error == std::abs(row.approx - row.exact));

    CHECK_THROWS_AS(kernel_check(8, 1.0, {1}, 0, 0), ParameterError);
    CHECK_THROWS_AS(kernel_check(8, -1.0, {1}, 10, 0), ParameterError);
    CHECK_THROWS_AS(kernel_check(8, 1.0, {}, 10, 0), ParameterError);
}

TEST_CASE("unit sphere points") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Vector p = unit_sphere_point(4, s, 8);
        CHECK(dot(p.span(), p.span()) == doctest::Approx(1.0).epsilon(1e-14));
    }
}
