#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "crosswise/dataset.hpp"
#include "crosswise/network.hpp"

namespace cw {

// Invalid or incomplete run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataSpec {
    std::string kind;  // blobs | xor | csv
    std::uint64_t seed = 0;
    // blobs
    std::size_t samples_per_class = 0;
    std::size_t dims = 0;
    std::size_t classes = 0;
    double spread = 0.0;
    // xor
    std::size_t samples = 0;
    double noise = 0.0;
    // csv
    std::string path;
};

struct OutputPaths {
    std::string history;
    std::string model;
};

struct RunConfig {
    NetworkSpec network;
    TrainConfig train;
    DataSpec data;
    OutputPaths out;
};

// Strict: every object rejects keys it does not know, and "version" must
// be 1. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

Dataset make_dataset(const DataSpec& spec);

}  // namespace cw
