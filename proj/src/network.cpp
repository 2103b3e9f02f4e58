#include "nnbound/network.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nnbound/json_io.hpp"

namespace nnbound {

using nlohmann::json;

namespace {

Activation parse_activation(const json& j, std::size_t layer) {
    if (!j.is_string())
        throw ParseError("layer " + std::to_string(layer) + ": activation must be a string");
    auto name = j.get<std::string>();
    if (name == "relu") return Activation::ReLU;
    if (name == "none" || name == "identity" || name == "linear") return Activation::Identity;
    throw ParseError("layer " + std::to_string(layer) + ": unknown activation '" + name + "'");
}

AffineLayer parse_layer(const json& j, std::size_t index) {
    if (!j.is_object())
        throw ParseError("layer " + std::to_string(index) + " is not an object");
    for (const char* key : {"weights", "bias", "activation"})
        if (!j.contains(key))
            throw ParseError("layer " + std::to_string(index) + ": missing '" + key + "'");
    AffineLayer layer;
    const json& rows = j.at("weights");
    if (!rows.is_array() || rows.empty())
        throw ParseError("layer " + std::to_string(index) + ": weights must be a non-empty array");
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].is_array())
            throw ParseError("layer " + std::to_string(index) + ": weight row is not an array");
        if (r == 0)
            cols = rows[r].size();
        else if (rows[r].size() != cols)
            throw ShapeError(index, "ragged weight matrix");
    }
    layer.weights.resize(Eigen::Index(rows.size()), Eigen::Index(cols));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            layer.weights(Eigen::Index(r), Eigen::Index(c)) = json_number(rows[r][c], "weight");
    layer.bias = json_vector(j.at("bias"), "bias");
    layer.activation = parse_activation(j.at("activation"), index);
    return layer;
}

}  // namespace

Network load_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("network file: ") + e.what());
    } catch (const json::out_of_range& e) {
        throw ValueError(std::string("network file: non-finite number: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("input_dim") || !doc.contains("layers"))
        throw ParseError("network file must be an object with 'input_dim' and 'layers'");
    if (!doc["input_dim"].is_number_integer() || doc["input_dim"].get<long long>() <= 0)
        throw ParseError("input_dim must be a positive integer");
    if (!doc["layers"].is_array())
        throw ParseError("'layers' must be an array");
    std::vector<AffineLayer> layers;
    for (std::size_t i = 0; i < doc["layers"].size(); ++i)
        layers.push_back(parse_layer(doc["layers"][i], i));
    return Network(doc["input_dim"].get<std::size_t>(), std::move(layers));
}

Network load_network_file(const std::string& path) {
    return load_network(read_text_file(path));
}

std::string serialize_network(const Network& net) {
    json doc;
    doc["input_dim"] = net.input_dim();
    doc["layers"] = json::array();
    for (const auto& layer : net.layers()) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
            rows.push_back(std::move(row));
        }
        doc["layers"].push_back({{"weights", std::move(rows)},
                                 {"bias", to_json_array(layer.bias)},
                                 {"activation", layer.activation == Activation::ReLU ? "relu" : "none"}});
    }
    return doc.dump(1);
}

}  // namespace nnbound
