#include "crosswise/commands.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "crosswise/bench.hpp"
#include "crosswise/config.hpp"
#include "crosswise/dataset.hpp"
#include "crosswise/errors.hpp"
#include "crosswise/mckernel.hpp"
#include "crosswise/network.hpp"

namespace cw {

namespace {

// Writes through `emit` to the file at `path`, or to `fallback` when the
// path is empty. Returns false on any I/O failure.
bool write_output(const std::string& path, std::ostream& fallback, std::ostream& log,
                  const std::function<void(std::ostream&)>& emit) {
    if (path.empty()) {
        emit(fallback);
        fallback.flush();
        return static_cast<bool>(fallback);
    }
    std::ofstream f(path);
    if (!f) {
        log << "error: cannot open " << path << " for writing\n";
        return false;
    }
    emit(f);
    f.flush();
    if (!f) {
        log << "error: write to " << path << " failed\n";
        return false;
    }
    return true;
}

}  // namespace

int cmd_train(const std::string& config_path, int threads, std::ostream& log) {
    RunConfig rc;
    try {
        rc = load_run_config(config_path);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (threads < 1) {
        log << "error: --threads must be >= 1\n";
        return kExitUsage;
    }
    rc.train.threads = threads;

    std::optional<Dataset> data;
    try {
        data = make_dataset(rc.data);
    } catch (const std::ios_base::failure& e) {
        log << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        log << "data error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        TrainResult result = train(rc.network, rc.train, *data);
        const auto& last = result.history.epochs.back();
        log << "trained " << result.history.epochs.size() << " epochs: loss " << last.loss << ", accuracy "
            << last.accuracy << '\n';
        const bool ok_history = write_output(rc.out.history, std::cout, log,
                                             [&](std::ostream& o) { write_history_csv(o, result.history); });
        const bool ok_model = write_output(rc.out.model, std::cout, log, [&](std::ostream& o) {
            o << network_to_json(result.network).dump(2) << '\n';
        });
        return ok_history && ok_model ? kExitOk : kExitIo;
    } catch (const DivergenceError& e) {
        log << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int cmd_bench(const std::vector<std::pair<std::size_t, std::size_t>>& dims, int reps, std::uint64_t seed,
              const std::string& out_path, std::ostream& out, std::ostream& log) {
    BenchReport report;
    try {
        report = run_bench(dims, reps, seed);
    } catch (const ParameterError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    for (std::size_t i = 0; i + 1 < report.rows.size(); i += 2) {
        const auto& d = report.rows[i];
        const auto& c = report.rows[i + 1];
        log << d.n << "->" << d.m << ": weights " << d.weights << " vs " << c.weights << ", median "
            << d.median_ns << " ns vs " << c.median_ns << " ns\n";
    }
    return write_output(out_path, out, log, [&](std::ostream& o) { write_bench_csv(o, report); }) ? kExitOk
                                                                                                   : kExitIo;
}

int cmd_kernel_check(std::size_t d, double sigma, const std::vector<std::size_t>& block_counts,
                     std::size_t pairs, std::uint64_t seed, const std::string& out_path, std::ostream& out,
                     std::ostream& log) {
    KernelCheckResult res;
    try {
        res = kernel_check(d, sigma, block_counts, pairs, seed);
    } catch (const ParameterError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    for (const auto& s : res.summaries)
        log << "blocks " << s.blocks << ": mean abs error " << s.mean_abs_error << ", max " << s.max_abs_error << '\n';
    return write_output(out_path, out, log,
                        [&](std::ostream& o) {
                            o << "blocks,pair,exact,approx,abs_error\n" << std::setprecision(17);
                            for (const auto& r : res.rows)
                                o << r.blocks << ',' << r.pair << ',' << r.exact << ',' << r.approx << ','
                                  << r.abs_error << '\n';
                        })
               ? kExitOk
               : kExitIo;
}

int cmd_algebra_check(std::uint64_t seed, int max_dim, int draws, const std::string& out_path,
                      std::ostream& out, std::ostream& log, const ProductKernels& kernels) {
    IdentityReport report;
    try {
        report = verify_identities(seed, max_dim, draws, kernels);
    } catch (const ParameterError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SamplingError& e) {
        log << "check failed: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    const bool written = write_output(out_path, out, log, [&](std::ostream& o) {
        o << "identity_id,residual,pass\n" << std::setprecision(6) << std::scientific;
        for (const auto& r : report.results)
            o << identity_name(r.id) << ',' << r.residual << ',' << (r.pass ? "true" : "false") << '\n';
    });
    if (!written) return kExitIo;
    for (const auto& r : report.results) {
        if (!r.pass) {
            log << "identity " << identity_name(r.id) << " failed: residual " << r.residual << " >= "
                << r.threshold << '\n';
        }
    }
    return report.all_pass() ? kExitOk : kExitCheckFailed;
}

int cmd_gen_data(const std::string& kind, const GenDataParams& p, const std::string& out_path,
                 std::ostream& out, std::ostream& log) {
    Dataset data = Dataset{Matrix::zeros(1, 1), {0.0}, 0};
    try {
        if (kind == "blobs") {
            data = gen_blobs(p.seed, p.samples, p.dims, p.classes, p.spread);
        } else if (kind == "xor") {
            data = gen_xor(p.seed, p.samples, p.noise);
        } else {
            log << "error: unknown dataset kind '" << kind << "' (expected blobs or xor)\n";
            return kExitUsage;
        }
    } catch (const ParameterError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return write_output(out_path, out, log, [&](std::ostream& o) { write_dataset_csv(o, data); }) ? kExitOk
                                                                                                  : kExitIo;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_dims_list(const std::string& s) {
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto x = item.find('x');
        try {
            if (x == std::string::npos) throw std::invalid_argument(item);
            std::size_t used_n = 0, used_m = 0;
            const std::string ns = item.substr(0, x), ms = item.substr(x + 1);
            const long long n = std::stoll(ns, &used_n);
            const long long m = std::stoll(ms, &used_m);
            if (used_n != ns.size() || used_m != ms.size() || n <= 0 || m <= 0) throw std::invalid_argument(item);
            dims.emplace_back(static_cast<std::size_t>(n), static_cast<std::size_t>(m));
        } catch (const std::exception&) {
            throw ParameterError("bad dimension pair '" + item + "' (expected NxM)");
        }
    }
    if (dims.empty()) throw ParameterError("no dimension pairs given");
    return dims;
}

}  // namespace cw
