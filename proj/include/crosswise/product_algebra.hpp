#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crosswise/linalg.hpp"

namespace cw {

// Block (i,j) of the result is a(i,j) * b.
Matrix kronecker(const Matrix& a, const Matrix& b);

// Columnwise Kronecker product; a and b must have the same column count.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

// Entrywise product of equally shaped matrices.
Matrix hadamard(const Matrix& a, const Matrix& b);

// The product implementations the identity checker runs against. Swapping
// one out is how the checker's negative path is exercised.
struct ProductKernels {
    std::function<Matrix(const Matrix&, const Matrix&)> kronecker = cw::kronecker;
    std::function<Matrix(const Matrix&, const Matrix&)> khatri_rao = cw::khatri_rao;
    std::function<Matrix(const Matrix&, const Matrix&)> hadamard = cw::hadamard;
};

enum class Identity {
    kron_mixed_product,  // (A kron B)(C kron D) = AC kron BD
    kron_pinv,           // pinv(A kron B) = pinv(A) kron pinv(B)
    khatri_rao_assoc,    // (A kr B) kr C = A kr (B kr C)
    khatri_rao_gram,     // (A kr B)^T (A kr B) = (A^T A) * (B^T B)
    khatri_rao_pinv,     // pinv(A kr B) = pinv((A^T A) * (B^T B)) (A kr B)^T
};

inline constexpr Identity kAllIdentities[] = {
    Identity::kron_mixed_product, Identity::kron_pinv, Identity::khatri_rao_assoc,
    Identity::khatri_rao_gram, Identity::khatri_rao_pinv};

const char* identity_name(Identity id);

// Residual thresholds: pseudo-inverse identities go through two
// inversions and get the looser bound.
double identity_threshold(Identity id);

// One set of operands for all five identities. The pseudo-inverse
// operands must have full column rank.
struct IdentityOperands {
    Matrix kron_a, kron_b, kron_c, kron_d;  // a*c and b*d conformable
    Matrix pinv_a, pinv_b;                  // full column rank
    Matrix kr_a, kr_b, kr_c;                // common column count
    Matrix krp_a, krp_b;                    // common column count, full column rank
};

struct IdentityResult {
    Identity id;
    double residual = 0.0;  // max-abs entry difference, worst over draws
    double threshold = 0.0;
    bool pass = false;
};

struct IdentityReport {
    std::vector<IdentityResult> results;
    int draws = 0;
    bool all_pass() const;
};

// Max-abs residual of each identity on one operand set.
std::vector<IdentityResult> identity_residuals(const IdentityOperands& ops,
                                               const ProductKernels& kernels = {});

// Draws `draws` operand sets with every dimension in [1, max_dim] from
// seeded uniform [-1,1] entries (pseudo-inverse operands get +2 on their
// leading diagonal) and reports the worst residual per identity. Singular
// draws are re-sampled up to 16 times before SamplingError.
// Requires 2 <= max_dim <= 8 and draws >= 1.
IdentityReport verify_identities(std::uint64_t seed, int max_dim, int draws = 1,
                                 const ProductKernels& kernels = {});

// Draw number `draw` exactly as verify_identities would.
IdentityOperands sample_identity_operands(std::uint64_t seed, int max_dim, int draw, int attempt);

}  // namespace cw
