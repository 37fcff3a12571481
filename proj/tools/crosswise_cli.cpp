#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crosswise/commands.hpp"
#include "crosswise/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Crosswise diagonal layers: training, benchmarks and numerical checks"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = 1;
    auto* train = app.add_subcommand("train", "Train a network described by a JSON config");
    train->add_option("--config", config_path, "Run configuration (JSON)")->required();
    train->add_option("--threads", threads, "Worker threads for per-sample gradients");

    std::string dims = "4x8,64x64,256x256,1024x1024";
    int reps = 30;
    std::uint64_t seed = 0;
    std::string out_path;
    auto* bench = app.add_subcommand("bench", "Dense vs crosswise forward timing and counts");
    bench->add_option("--dims", dims, "Comma-separated NxM pairs");
    bench->add_option("--reps", reps, "Timed repetitions (>= 10)");
    bench->add_option("--seed", seed);
    bench->add_option("--out", out_path, "CSV output path (stdout if omitted)");

    std::size_t d = 8;
    double sigma = 1.0;
    std::vector<std::size_t> blocks{1, 64};
    std::size_t pairs = 200;
    auto* kernel = app.add_subcommand("kernel-check", "Gaussian kernel approximation error");
    kernel->add_option("--dim", d, "Input dimension");
    kernel->add_option("--sigma", sigma, "Kernel bandwidth");
    kernel->add_option("--blocks", blocks, "Block counts")->delimiter(',');
    kernel->add_option("--pairs", pairs, "Number of point pairs");
    kernel->add_option("--seed", seed);
    kernel->add_option("--out", out_path);

    int max_dim = 4;
    int draws = 100;
    auto* algebra = app.add_subcommand("algebra-check", "Kronecker / Khatri-Rao / Hadamard identities");
    algebra->add_option("--max-dim", max_dim, "Largest factor dimension, in [2, 8]");
    algebra->add_option("--draws", draws, "Random operand sets");
    algebra->add_option("--seed", seed);
    algebra->add_option("--out", out_path);

    std::string kind;
    cw::GenDataParams gen;
    auto* gen_data = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
    gen_data->add_option("kind", kind, "blobs | xor")->required();
    gen_data->add_option("--samples", gen.samples, "Per class for blobs, total for xor");
    gen_data->add_option("--dims", gen.dims);
    gen_data->add_option("--classes", gen.classes);
    gen_data->add_option("--spread", gen.spread);
    gen_data->add_option("--noise", gen.noise);
    gen_data->add_option("--seed", gen.seed);
    gen_data->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cw::kExitUsage;
    }

    if (train->parsed()) return cw::cmd_train(config_path, threads, std::cerr);
    if (bench->parsed()) {
        try {
            return cw::cmd_bench(cw::parse_dims_list(dims), reps, seed, out_path, std::cout, std::cerr);
        } catch (const cw::ParameterError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cw::kExitUsage;
        }
    }
    if (kernel->parsed()) return cw::cmd_kernel_check(d, sigma, blocks, pairs, seed, out_path, std::cout, std::cerr);
    if (algebra->parsed()) return cw::cmd_algebra_check(seed, max_dim, draws, out_path, std::cout, std::cerr);
    if (gen_data->parsed()) return cw::cmd_gen_data(kind, gen, out_path, std::cout, std::cerr);
    return cw::kExitUsage;
}
