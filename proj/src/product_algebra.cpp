#include "crosswise/product_algebra.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "crosswise/errors.hpp"
#include "crosswise/rng.hpp"

namespace cw {

Matrix kronecker(const Matrix& a, const Matrix& b) {
    const std::size_t rows = a.rows() * b.rows();
    const std::size_t cols = a.cols() * b.cols();
    std::vector<double> out(rows * cols);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    out[(i * b.rows() + p) * cols + j * b.cols() + q] = a(i, j) * b(p, q);
    return Matrix(rows, cols, std::move(out));
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        std::ostringstream msg;
        msg << "khatri_rao: column counts differ (" << a.cols() << " vs " << b.cols() << ")";
        throw ShapeError(msg.str());
    }
    const std::size_t cols = a.cols();
    std::vector<double> out(a.rows() * b.rows() * cols);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t p = 0; p < b.rows(); ++p)
            for (std::size_t k = 0; k < cols; ++k)
                out[(i * b.rows() + p) * cols + k] = a(i, k) * b(p, k);
    return Matrix(a.rows() * b.rows(), cols, std::move(out));
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream msg;
        msg << "hadamard: shapes differ (" << a.rows() << "x" << a.cols() << " vs " << b.rows()
            << "x" << b.cols() << ")";
        throw ShapeError(msg.str());
    }
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    return Matrix(a.rows(), a.cols(), std::move(out));
}

const char* identity_name(Identity id) {
    switch (id) {
        case Identity::kron_mixed_product: return "kron_mixed_product";
        case Identity::kron_pinv: return "kron_pinv";
        case Identity::khatri_rao_assoc: return "khatri_rao_assoc";
        case Identity::khatri_rao_gram: return "khatri_rao_gram";
        case Identity::khatri_rao_pinv: return "khatri_rao_pinv";
    }
    return "unknown";
}

double identity_threshold(Identity id) {
    switch (id) {
        case Identity::kron_pinv:
        case Identity::khatri_rao_pinv: return 1e-6;
        default: return 1e-8;
    }
}

bool IdentityReport::all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

namespace {

// Residual of an identity whose two sides cannot even be compared counts
// as a failure rather than an exception: a broken product kernel should
// surface in the report.
template <typename Lhs, typename Rhs>
double residual_of(Lhs&& lhs, Rhs&& rhs) {
    try {
        return max_abs_diff(lhs(), rhs());
    } catch (const ShapeError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

std::vector<IdentityResult> identity_residuals(const IdentityOperands& o,
                                               const ProductKernels& k) {
    std::vector<IdentityResult> out;
    auto push = [&](Identity id, double r) {
        const double t = identity_threshold(id);
        out.push_back({id, r, t, r < t});
    };

    push(Identity::kron_mixed_product,
         residual_of(
             [&] { return matmul(k.kronecker(o.kron_a, o.kron_b), k.kronecker(o.kron_c, o.kron_d)); },
             [&] { return k.kronecker(matmul(o.kron_a, o.kron_c), matmul(o.kron_b, o.kron_d)); }));

    push(Identity::kron_pinv,
         residual_of([&] { return pinv_full_rank(k.kronecker(o.pinv_a, o.pinv_b)); },
                     [&] { return k.kronecker(pinv_full_rank(o.pinv_a), pinv_full_rank(o.pinv_b)); }));

    push(Identity::khatri_rao_assoc,
         residual_of([&] { return k.khatri_rao(k.khatri_rao(o.kr_a, o.kr_b), o.kr_c); },
                     [&] { return k.khatri_rao(o.kr_a, k.khatri_rao(o.kr_b, o.kr_c)); }));

    push(Identity::khatri_rao_gram, residual_of(
                                        [&] {
                                            Matrix p = k.khatri_rao(o.kr_a, o.kr_b);
                                            return matmul(p.transpose(), p);
                                        },
                                        [&] {
                                            return k.hadamard(matmul(o.kr_a.transpose(), o.kr_a),
                                                              matmul(o.kr_b.transpose(), o.kr_b));
                                        }));

    push(Identity::khatri_rao_pinv,
         residual_of([&] { return pinv_full_rank(k.khatri_rao(o.krp_a, o.krp_b)); },
                     [&] {
                         Matrix gram = k.hadamard(matmul(o.krp_a.transpose(), o.krp_a),
                                                  matmul(o.krp_b.transpose(), o.krp_b));
                         return matmul(pinv_full_rank(gram), k.khatri_rao(o.krp_a, o.krp_b).transpose());
                     }));
    return out;
}

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double boost) {
    std::vector<double> v(rows * cols);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < std::min(rows, cols); ++i) v[i * cols + i] += boost;
    return Matrix(rows, cols, std::move(v));
}

}  // namespace

IdentityOperands sample_identity_operands(std::uint64_t seed, int max_dim, int draw, int attempt) {
    Rng rng(seed, static_cast<std::uint64_t>(draw) * 64 + static_cast<std::uint64_t>(attempt));
    const auto dim = [&] { return 1 + rng.uniform_index(static_cast<std::uint64_t>(max_dim)); };
    // Tall dimension in [cols, max_dim].
    const auto tall = [&](std::size_t cols) {
        return cols + rng.uniform_index(static_cast<std::uint64_t>(max_dim) - cols + 1);
    };

    const std::size_t p = dim(), q = dim(), r = dim(), s = dim(), t = dim(), u = dim();
    Matrix ka = random_matrix(rng, p, q, 0.0);
    Matrix kb = random_matrix(rng, s, t, 0.0);
    Matrix kc = random_matrix(rng, q, r, 0.0);
    Matrix kd = random_matrix(rng, t, u, 0.0);

    const std::size_t pa_cols = dim(), pb_cols = dim();
    Matrix pa = random_matrix(rng, tall(pa_cols), pa_cols, 2.0);
    Matrix pb = random_matrix(rng, tall(pb_cols), pb_cols, 2.0);

    const std::size_t kr_cols = dim();
    Matrix ra = random_matrix(rng, dim(), kr_cols, 0.0);
    Matrix rb = random_matrix(rng, dim(), kr_cols, 0.0);
    Matrix rc = random_matrix(rng, dim(), kr_cols, 0.0);

    const std::size_t krp_cols = dim();
    Matrix xa = random_matrix(rng, tall(krp_cols), krp_cols, 2.0);
    Matrix xb = random_matrix(rng, tall(krp_cols), krp_cols, 2.0);

    return {std::move(ka), std::move(kb), std::move(kc), std::move(kd), std::move(pa),
            std::move(pb), std::move(ra), std::move(rb), std::move(rc), std::move(xa),
            std::move(xb)};
}

IdentityReport verify_identities(std::uint64_t seed, int max_dim, int draws,
                                 const ProductKernels& kernels) {
    if (max_dim < 2 || max_dim > 8) {
        throw ParameterError("verify_identities: max_dim must be in [2, 8], got " +
                             std::to_string(max_dim));
    }
    if (draws < 1) throw ParameterError("verify_identities: draws must be positive");

    constexpr int kMaxAttempts = 16;
    IdentityReport report;
    report.draws = draws;
    for (Identity id : kAllIdentities) report.results.push_back({id, 0.0, identity_threshold(id), true});

    for (int draw = 0; draw < draws; ++draw) {
        std::vector<IdentityResult> res;
        for (int attempt = 0;; ++attempt) {
            if (attempt == kMaxAttempts) {
                throw SamplingError("verify_identities: draw " + std::to_string(draw) +
                                    " stayed rank deficient after 16 attempts");
            }
            try {
                res = identity_residuals(sample_identity_operands(seed, max_dim, draw, attempt), kernels);
                break;
            } catch (const SingularMatrixError&) {
            }
        }
        for (std::size_t i = 0; i < res.size(); ++i) {
            auto& agg = report.results[i];
            agg.residual = std::max(agg.residual, res[i].residual);
            agg.pass = agg.residual < agg.threshold;
        }
    }
    return report;
}

}  // namespace cw
