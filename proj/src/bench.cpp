#include "crosswise/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <span>

#include "crosswise/crosswise.hpp"
#include "crosswise/errors.hpp"
#include "crosswise/network.hpp"
#include "crosswise/rng.hpp"

namespace cw {

namespace {

volatile double g_sink = 0.0;

void dense_forward(std::span<const double> w, std::span<const double> b, std::span<const double> x,
                   std::span<double> out) {
    const std::size_t n = x.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
        double s = b[r];
        const double* row = w.data() + r * n;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
        out[r] = std::max(s, 0.0);
    }
}

void crosswise_forward_raw(const CrosswiseWeights& w, std::span<const double> x, std::span<double> out) {
    crosswise_apply(w, x, out);
    const auto b = w.bias();
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = std::max(out[r] + b[r], 0.0);
}

template <typename F>
double median_ns_per_call(F&& call, int reps) {
    using clock = std::chrono::steady_clock;
    for (int i = 0; i < kBenchWarmup; ++i) call();

    std::size_t batch = 1;
    for (;;) {
        const auto t0 = clock::now();
        for (std::size_t i = 0; i < batch; ++i) call();
        const auto dt = std::chrono::duration<double, std::nano>(clock::now() - t0).count();
        if (dt >= 20'000.0 || batch >= (std::size_t{1} << 24)) break;
        batch *= 2;
    }

    std::vector<double> samples(static_cast<std::size_t>(reps));
    for (double& s : samples) {
        const auto t0 = clock::now();
        for (std::size_t i = 0; i < batch; ++i) call();
        s = std::chrono::duration<double, std::nano>(clock::now() - t0).count() / static_cast<double>(batch);
    }
    auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
    std::nth_element(samples.begin(), mid, samples.end());
    double med = *mid;
    if (samples.size() % 2 == 0) med = (med + *std::max_element(samples.begin(), mid)) / 2.0;
    return med;
}

}  // namespace

BenchReport run_bench(const std::vector<std::pair<std::size_t, std::size_t>>& dims, int reps,
                      std::uint64_t seed) {
    if (reps < kBenchMinReps) {
        throw ParameterError("bench: repetitions must be >= " + std::to_string(kBenchMinReps));
    }
    if (dims.empty()) throw ParameterError("bench: no dimensions given");
    BenchReport report;
    for (std::size_t idx = 0; idx < dims.size(); ++idx) {
        const auto [n, m] = dims[idx];
        if (n == 0 || m == 0) throw ParameterError("bench: dimensions must be positive");
        const std::uint64_t layer_seed = random_word(seed, 0, idx);

        Rng rng(layer_seed, 2);
        std::vector<double> x(n);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        std::vector<double> out(m);

        const LayerSpec dense_spec{LayerKind::dense, n, m, LayerActivation::relu};
        const DenseLayer dense = DenseLayer::init(dense_spec, layer_seed);
        const double dense_ns = median_ns_per_call(
            [&] {
                dense_forward(dense.weights(), dense.bias(), x, out);
                g_sink = g_sink + out[0];
            },
            reps);
        const LayerCost dc = layer_cost(dense_spec);
        report.rows.push_back({"dense", n, m, dc.weights, dc.mults, dense_ns, reps});

        const LayerSpec cross_spec{LayerKind::crosswise, n, m, LayerActivation::relu};
        const CrosswiseWeights cw = init_crosswise(layer_seed, n, m, InitScheme::uniform_scaled);
        const double cross_ns = median_ns_per_call(
            [&] {
                crosswise_forward_raw(cw, x, out);
                g_sink = g_sink + out[0];
            },
            reps);
        const LayerCost cc = layer_cost(cross_spec);
        report.rows.push_back({"crosswise", n, m, cc.weights, cc.mults, cross_ns, reps});
    }
    return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
    out << "layer_kind,n,m,weights,mults,median_ns,reps\n";
    for (const auto& r : report.rows) {
        out << r.layer_kind << ',' << r.n << ',' << r.m << ',' << r.weights << ',' << r.mults << ','
            << r.median_ns << ',' << r.reps << '\n';
    }
}

}  // namespace cw
