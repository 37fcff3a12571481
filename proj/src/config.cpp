#include "crosswise/config.hpp"

#include <fstream>
#include <initializer_list>

#include "crosswise/errors.hpp"

namespace cw {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const char* k : required)
        if (!j.contains(k)) throw ConfigError(where + ": missing key \"" + k + "\"");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : required) known = known || key == k;
        for (const char* k : optional) known = known || key == k;
        if (!known) throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

std::size_t get_positive(const json& j, const char* key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw ConfigError(where + "." + key + ": expected a positive integer");
    }
    return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& j, const std::string& where) {
    const auto& v = j.at("seed");
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(where + ".seed: expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

NetworkSpec parse_network(const json& j) {
    require_keys(j, "network", {"layers", "seed"});
    NetworkSpec spec;
    spec.seed = get_seed(j, "network");
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.empty()) throw ConfigError("network.layers: expected a non-empty array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string where = "network.layers[" + std::to_string(i) + "]";
        const auto& lj = layers[i];
        require_keys(lj, where, {"kind", "in", "out", "activation"});
        LayerSpec ls;
        try {
            ls.kind = parse_layer_kind(get<std::string>(lj, "kind", where));
            ls.activation = parse_activation(get<std::string>(lj, "activation", where));
        } catch (const ParameterError& e) {
            throw ConfigError(where + ": " + e.what());
        }
        ls.in_dim = get_positive(lj, "in", where);
        ls.out_dim = get_positive(lj, "out", where);
        spec.layers.push_back(ls);
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

TrainConfig parse_train(const json& j) {
    require_keys(j, "train", {"lr", "epochs", "batch", "loss", "seed"});
    TrainConfig cfg;
    cfg.learning_rate = get<double>(j, "lr", "train");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("train.lr: must be positive");
    cfg.epochs = static_cast<int>(get_positive(j, "epochs", "train"));
    cfg.batch_size = get_positive(j, "batch", "train");
    try {
        cfg.loss = parse_loss(get<std::string>(j, "loss", "train"));
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("train.loss: ") + e.what());
    }
    cfg.seed = get_seed(j, "train");
    return cfg;
}

DataSpec parse_data(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("data: missing key \"kind\"");
    DataSpec d;
    d.kind = get<std::string>(j, "kind", "data");
    if (d.kind == "blobs") {
        require_keys(j, "data", {"kind", "seed", "samples_per_class", "dims", "classes", "spread"});
        d.seed = get_seed(j, "data");
        d.samples_per_class = get_positive(j, "samples_per_class", "data");
        d.dims = get_positive(j, "dims", "data");
        d.classes = get_positive(j, "classes", "data");
        d.spread = get<double>(j, "spread", "data");
        if (!(d.spread >= 0.0)) throw ConfigError("data.spread: must be non-negative");
    } else if (d.kind == "xor") {
        require_keys(j, "data", {"kind", "seed", "samples", "noise"});
        d.seed = get_seed(j, "data");
        d.samples = get_positive(j, "samples", "data");
        d.noise = get<double>(j, "noise", "data");
        if (!(d.noise >= 0.0)) throw ConfigError("data.noise: must be non-negative");
    } else if (d.kind == "csv") {
        require_keys(j, "data", {"kind", "path", "classes"});
        d.path = get<std::string>(j, "path", "data");
        const auto& c = j.at("classes");
        if (!c.is_number_integer() || c.get<long long>() < 0) throw ConfigError("data.classes: expected integer >= 0");
        d.classes = c.get<std::size_t>();
    } else {
        throw ConfigError("data.kind: unknown dataset kind \"" + d.kind + "\"");
    }
    return d;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    require_keys(j, "config", {"version", "network", "train", "data", "out"});
    if (!j.at("version").is_number_integer() || j.at("version").get<int>() != 1) {
        throw ConfigError("config: \"version\" must be 1");
    }
    RunConfig rc;
    rc.network = parse_network(j.at("network"));
    rc.train = parse_train(j.at("train"));
    rc.data = parse_data(j.at("data"));
    require_keys(j.at("out"), "out", {"history", "model"});
    rc.out.history = get<std::string>(j.at("out"), "history", "out");
    rc.out.model = get<std::string>(j.at("out"), "model", "out");
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_run_config(j);
}

Dataset make_dataset(const DataSpec& d) {
    if (d.kind == "blobs") return gen_blobs(d.seed, d.samples_per_class, d.dims, d.classes, d.spread);
    if (d.kind == "xor") return gen_xor(d.seed, d.samples, d.noise);
    if (d.kind == "csv") return read_dataset_csv(d.path, d.classes);
    throw ConfigError("unknown dataset kind \"" + d.kind + "\"");
}

}  // namespace cw
