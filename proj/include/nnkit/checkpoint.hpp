#pragma once

// Parameter checkpoint: a JSON document listing every parameter tensor in
// deterministic collection order, with its shape and row-major values.
// Loading requires the model architecture to match shape-for-shape.

#include <fstream>
#include <string>

#include <json.hpp>

#include "module.hpp"

namespace nnkit {

inline nlohmann::json checkpoint_to_json(Module &m) {
    std::vector<Tensor *> ps, gs;
    m.collect_parameters(ps, gs);
    nlohmann::json doc;
    doc["format"] = "nnkit-checkpoint-v1";
    doc["params"] = nlohmann::json::array();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        nlohmann::json entry;
        entry["name"] = "param" + std::to_string(i);
        entry["shape"] = ps[i]->shape();
        entry["data"] = ps[i]->data();
        doc["params"].push_back(std::move(entry));
    }
    return doc;
}

inline void save_checkpoint(Module &m, const std::string &path) {
    std::ofstream f(path);
    if (!f) throw ModuleError("cannot write checkpoint " + path);
    f << checkpoint_to_json(m).dump(2) << '\n';
}

inline void load_checkpoint_json(Module &m, const nlohmann::json &doc) {
    if (doc.value("format", "") != "nnkit-checkpoint-v1")
        throw ModuleError("checkpoint: unrecognized format field");
    std::vector<Tensor *> ps, gs;
    m.collect_parameters(ps, gs);
    const auto &params = doc.at("params");
    if (params.size() != ps.size())
        throw ModuleError("checkpoint: " + std::to_string(params.size()) +
                          " tensors in file, model has " + std::to_string(ps.size()));
    for (std::size_t i = 0; i < ps.size(); ++i) {
        Shape shape = params[i].at("shape").get<Shape>();
        std::vector<double> data = params[i].at("data").get<std::vector<double>>();
        Tensor t(shape, std::move(data));
        ps[i]->check_same_shape(t, "checkpoint load");
        *ps[i] = std::move(t);
    }
}

inline void load_checkpoint(Module &m, const std::string &path) {
    std::ifstream f(path);
    if (!f) throw ModuleError("cannot open checkpoint " + path);
    nlohmann::json doc;
    f >> doc;
    load_checkpoint_json(m, doc);
}

} // namespace nnkit
