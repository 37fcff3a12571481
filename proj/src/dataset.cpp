#include "crosswise/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "crosswise/errors.hpp"
#include "crosswise/rng.hpp"

namespace cw {

Vector Dataset::sample(std::size_t i) const {
    auto r = features.row(i);
    return Vector(std::vector<double>(r.begin(), r.end()));
}

void Dataset::validate() const {
    if (labels.size() != features.rows()) {
        throw ShapeError("Dataset: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(features.rows()) + " rows");
    }
    if (class_count == 0) return;
    for (double l : labels) {
        if (l < 0 || l >= static_cast<double>(class_count) || l != std::floor(l)) {
            throw ParameterError("Dataset: label " + std::to_string(l) + " is not a class index below " +
                                 std::to_string(class_count));
        }
    }
}

Dataset gen_blobs(std::uint64_t seed, std::size_t samples_per_class, std::size_t dims,
                  std::size_t class_count, double spread) {
    if (samples_per_class == 0 || dims == 0 || class_count == 0) {
        throw ParameterError("gen_blobs: counts and dimensions must be positive");
    }
    if (!(spread >= 0.0) || !std::isfinite(spread)) throw ParameterError("gen_blobs: spread must be >= 0");

    // Centres are redrawn until every pair is at least one radius apart, so
    // that a small spread gives separable classes. When no draw qualifies
    // (many classes in few dimensions) the best-spaced one is kept.
    constexpr double kRadius = 3.0;
    constexpr int kCentreAttempts = 64;
    Rng centre_rng(seed, 0);
    std::vector<double> centres(class_count * dims);
    std::vector<double> best;
    double best_gap = -1.0;
    for (int attempt = 0; attempt < kCentreAttempts; ++attempt) {
        for (std::size_t c = 0; c < class_count; ++c) {
            double norm = 0.0;
            do {
                norm = 0.0;
                for (std::size_t j = 0; j < dims; ++j) {
                    centres[c * dims + j] = centre_rng.normal();
                    norm += centres[c * dims + j] * centres[c * dims + j];
                }
            } while (norm == 0.0);
            norm = std::sqrt(norm);
            for (std::size_t j = 0; j < dims; ++j) centres[c * dims + j] *= kRadius / norm;
        }
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < class_count; ++a) {
            for (std::size_t b = a + 1; b < class_count; ++b) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < dims; ++j) {
                    const double t = centres[a * dims + j] - centres[b * dims + j];
                    d2 += t * t;
                }
                gap = std::min(gap, std::sqrt(d2));
            }
        }
        if (gap > best_gap) {
            best_gap = gap;
            best = centres;
        }
        if (gap >= kRadius) break;
    }
    centres = std::move(best);

    Rng noise_rng(seed, 1);
    const std::size_t rows = samples_per_class * class_count;
    std::vector<double> x(rows * dims);
    std::vector<double> labels(rows);
    for (std::size_t c = 0; c < class_count; ++c) {
        for (std::size_t s = 0; s < samples_per_class; ++s) {
            const std::size_t r = c * samples_per_class + s;
            for (std::size_t j = 0; j < dims; ++j)
                x[r * dims + j] = centres[c * dims + j] + spread * noise_rng.normal();
            labels[r] = static_cast<double>(c);
        }
    }
    return {Matrix(rows, dims, std::move(x)), std::move(labels), class_count};
}

Dataset gen_xor(std::uint64_t seed, std::size_t samples, double noise) {
    if (samples < 4) throw ParameterError("gen_xor: needs at least 4 samples");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ParameterError("gen_xor: noise must be >= 0");
    Rng rng(seed, 0);
    std::vector<double> x(samples * 2);
    std::vector<double> labels(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        labels[i] = a * b > 0.0 ? 1.0 : 0.0;
        x[2 * i] = a + noise * rng.normal();
        x[2 * i + 1] = b + noise * rng.normal();
    }
    return {Matrix(samples, 2, std::move(x)), std::move(labels), 2};
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw ParameterError("subset: no rows selected");
    const std::size_t d = data.dims();
    std::vector<double> x;
    x.reserve(rows.size() * d);
    std::vector<double> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) {
        auto row = data.features.row(r);
        x.insert(x.end(), row.begin(), row.end());
        labels.push_back(data.labels[r]);
    }
    return {Matrix(rows.size(), d, std::move(x)), std::move(labels), data.class_count};
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ParameterError("split: train_fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed, 0);
    rng.shuffle(order);
    const auto first = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
    if (first == 0 || first == data.size()) {
        throw ParameterError("split: fraction leaves one side empty");
    }
    std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(first));
    std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
    return {subset(data, a), subset(data, b)};
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t j = 0; j < data.dims(); ++j) out << 'f' << j << ',';
    out << "label\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.features.row(i)) out << v << ',';
        out << data.labels[i] << '\n';
    }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
    write_dataset_csv(out, data);
    out.flush();
    if (!out) throw std::ios_base::failure("write to " + path + " failed");
}

Dataset read_dataset_csv(std::istream& in, std::size_t class_count) {
    std::string line;
    if (!std::getline(in, line)) throw ParameterError("dataset CSV: missing header");
    std::size_t columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns < 2 || line.substr(line.rfind(',') + 1) != "label") {
        throw ParameterError("dataset CSV: header must be f0,...,label");
    }
    const std::size_t d = columns - 1;
    std::vector<double> x;
    std::vector<double> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ParameterError("dataset CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            if (col < d) x.push_back(v);
            else labels.push_back(v);
            ++col;
        }
        if (col != columns) {
            throw ShapeError("dataset CSV line " + std::to_string(lineno) + ": " + std::to_string(col) +
                             " columns, expected " + std::to_string(columns));
        }
    }
    if (labels.empty()) throw ParameterError("dataset CSV: no rows");
    Dataset data{Matrix(labels.size(), d, std::move(x)), std::move(labels), class_count};
    data.validate();
    return data;
}

Dataset read_dataset_csv(const std::string& path, std::size_t class_count) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return read_dataset_csv(in, class_count);
}

}  // namespace cw
