#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crosswise/linalg.hpp"

namespace cw {

// Rows of `features` are samples. Labels are class indices stored as
// doubles when class_count > 0, real targets when class_count == 0.
struct Dataset {
    Matrix features;
    std::vector<double> labels;
    std::size_t class_count = 0;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t dims() const noexcept { return features.cols(); }
    Vector sample(std::size_t i) const;
    void validate() const;
};

// Class centres are Gaussian directions scaled to radius 3; every point is
// centre + spread * N(0, I). Rows are grouped by class. Stream 0 draws the
// centres, stream 1 the per-point noise.
Dataset gen_blobs(std::uint64_t seed, std::size_t samples_per_class, std::size_t dims,
                  std::size_t class_count, double spread);

// Points uniform in [-1,1]^2, label 1 iff x*y > 0, labelled before
// Gaussian noise of scale `noise` is added to the coordinates.
Dataset gen_xor(std::uint64_t seed, std::size_t samples, double noise);

// Seeded shuffle, then the first round(fraction * n) rows go to the first
// part.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

Dataset subset(const Dataset& data, const std::vector<std::size_t>& rows);

// Header f0,...,f{d-1},label; values printed with 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, std::size_t class_count);
Dataset read_dataset_csv(const std::string& path, std::size_t class_count);

}  // namespace cw
