#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crosswise/product_algebra.hpp"

namespace cw {

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitUsage = 2,
    kExitDivergence = 3,
    kExitIo = 4,
};

// Each command writes its CSV to `out_path`, or to `out` when the path is
// empty, and human-readable diagnostics to `log`.

int cmd_train(const std::string& config_path, int threads, std::ostream& log);

int cmd_bench(const std::vector<std::pair<std::size_t, std::size_t>>& dims, int reps, std::uint64_t seed,
              const std::string& out_path, std::ostream& out, std::ostream& log);

int cmd_kernel_check(std::size_t d, double sigma, const std::vector<std::size_t>& block_counts,
                     std::size_t pairs, std::uint64_t seed, const std::string& out_path, std::ostream& out,
                     std::ostream& log);

int cmd_algebra_check(std::uint64_t seed, int max_dim, int draws, const std::string& out_path,
                      std::ostream& out, std::ostream& log, const ProductKernels& kernels = {});

struct GenDataParams {
    std::uint64_t seed = 0;
    std::size_t samples = 200;  // xor: total; blobs: per class
    std::size_t dims = 4;
    std::size_t classes = 2;
    double spread = 0.5;
    double noise = 0.0;
};

int cmd_gen_data(const std::string& kind, const GenDataParams& params, const std::string& out_path,
                 std::ostream& out, std::ostream& log);

// "4x8,1024x1024" -> {(4,8), (1024,1024)}. Throws ParameterError.
std::vector<std::pair<std::size_t, std::size_t>> parse_dims_list(const std::string& s);

}  // namespace cw
