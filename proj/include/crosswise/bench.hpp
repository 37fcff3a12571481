#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cw {

struct BenchRow {
    std::string layer_kind;  // "dense" or "crosswise"
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t weights = 0;
    std::size_t mults = 0;
    double median_ns = 0.0;  // per forward call
    int reps = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

inline constexpr int kBenchWarmup = 5;
inline constexpr int kBenchMinReps = 10;

// For every (N, M) times one dense and one crosswise forward pass (bias and
// ReLU included) on seeded data. Each repetition times a batch of calls
// sized to take at least ~20us; the median batch time is divided by the
// batch size.
BenchReport run_bench(const std::vector<std::pair<std::size_t, std::size_t>>& dims, int reps,
                      std::uint64_t seed);

// layer_kind,n,m,weights,mults,median_ns,reps
void write_bench_csv(std::ostream& out, const BenchReport& report);

}  // namespace cw
