#include "relumip/network.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "relumip/error.hpp"

namespace relumip {

namespace {

std::string layer_tag(std::size_t l) { return "layer " + std::to_string(l); }

}  // namespace

NeuralNet::NeuralNet(Eigen::Index input_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers))
{
    if (input_dim_ <= 0)
        throw ParseError("network: input_dim must be positive");
    if (layers_.size() < 2)
        throw ParseError("network: need at least one hidden layer and an output layer, got " +
                         std::to_string(layers_.size()) + " layer(s)");
    Eigen::Index expected_cols = input_dim_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const DenseLayer& layer = layers_[l];
        if (layer.size() == 0)
            throw ParseError(layer_tag(l) + ": weights has no rows");
        if (layer.fan_in() != expected_cols)
            throw ParseError(layer_tag(l) + ": weights has " + std::to_string(layer.fan_in()) +
                             " columns, expected " + std::to_string(expected_cols));
        if (layer.biases.size() != layer.size())
            throw ParseError(layer_tag(l) + ": biases has length " + std::to_string(layer.biases.size()) +
                             " but weights has " + std::to_string(layer.size()) + " rows");
        const bool is_output = l + 1 == layers_.size();
        if (is_output && layer.activation != Activation::Linear)
            throw ParseError(layer_tag(l) + ": output layer activation must be \"linear\"");
        if (!is_output && layer.activation != Activation::ReLU)
            throw ParseError(layer_tag(l) + ": hidden layer activation must be \"relu\"");
        if (!layer.weights.allFinite() || !layer.biases.allFinite())
            throw ParseError(layer_tag(l) + ": non-finite weight or bias");
        expected_cols = layer.size();
    }
}

Eigen::Index NeuralNet::relu_count() const
{
    Eigen::Index count = 0;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l)
        count += layers_[l].size();
    return count;
}

InputBox::InputBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi))
{
    if (lower.size() != upper.size())
        throw Error("input box: lower and upper have different lengths");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]))
            throw Error("input box: lower[" + std::to_string(i) + "] > upper[" + std::to_string(i) + "]");
}

InputBox InputBox::uniform(Eigen::Index dim, double lo, double hi)
{
    return InputBox(Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi));
}

bool InputBox::contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const
{
    return x.size() == dim() && (x.array() >= lower.array() - tol).all() &&
           (x.array() <= upper.array() + tol).all();
}

NeuralNet load_network(const nlohmann::json& document)
{
    if (!document.is_object())
        throw ParseError("network: document must be a JSON object");
    if (!document.contains("input_dim") || !document["input_dim"].is_number_integer())
        throw ParseError("network: missing integer field \"input_dim\"");
    if (!document.contains("layers") || !document["layers"].is_array())
        throw ParseError("network: missing array field \"layers\"");

    const auto input_dim = document["input_dim"].get<Eigen::Index>();
    std::vector<DenseLayer> layers;
    Eigen::Index cols = input_dim;
    const auto& items = document["layers"];
    for (std::size_t l = 0; l < items.size(); ++l) {
        const auto& item = items[l];
        if (!item.is_object())
            throw ParseError(layer_tag(l) + ": must be an object");
        if (item.contains("type") && item["type"] != "dense")
            throw ParseError(layer_tag(l) + ": unsupported layer type " + item["type"].dump() +
                             " (only dense layers are supported; lower convolutions to dense offline)");
        for (const char* field : {"weights", "biases", "activation"})
            if (!item.contains(field))
                throw ParseError(layer_tag(l) + ": missing field \"" + field + "\"");
        const auto& rows = item["weights"];
        if (!rows.is_array())
            throw ParseError(layer_tag(l) + ": field \"weights\" must be an array of rows");
        DenseLayer layer;
        layer.weights.resize(static_cast<Eigen::Index>(rows.size()), cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (!rows[r].is_array() || static_cast<Eigen::Index>(rows[r].size()) != cols)
                throw ParseError(layer_tag(l) + ": field \"weights\" row " + std::to_string(r) + " has " +
                                 std::to_string(rows[r].is_array() ? rows[r].size() : 0) + " entries, expected " +
                                 std::to_string(cols));
            for (Eigen::Index c = 0; c < cols; ++c) {
                const auto& v = rows[r][static_cast<std::size_t>(c)];
                if (!v.is_number())
                    throw ParseError(layer_tag(l) + ": field \"weights\" has a non-numeric entry");
                layer.weights(static_cast<Eigen::Index>(r), c) = v.get<double>();
            }
        }
        const auto& biases = item["biases"];
        if (!biases.is_array())
            throw ParseError(layer_tag(l) + ": field \"biases\" must be an array");
        if (biases.size() != rows.size())
            throw ParseError(layer_tag(l) + ": field \"biases\" has length " + std::to_string(biases.size()) +
                             " but \"weights\" has " + std::to_string(rows.size()) + " rows");
        layer.biases.resize(static_cast<Eigen::Index>(biases.size()));
        for (std::size_t r = 0; r < biases.size(); ++r) {
            if (!biases[r].is_number())
                throw ParseError(layer_tag(l) + ": field \"biases\" has a non-numeric entry");
            layer.biases[static_cast<Eigen::Index>(r)] = biases[r].get<double>();
        }
        const auto& act = item["activation"];
        if (act == "relu")
            layer.activation = Activation::ReLU;
        else if (act == "linear")
            layer.activation = Activation::Linear;
        else
            throw ParseError(layer_tag(l) + ": field \"activation\" must be \"relu\" or \"linear\", got " +
                             act.dump());
        cols = layer.size();
        layers.push_back(std::move(layer));
    }
    return NeuralNet(input_dim, std::move(layers));
}

NeuralNet load_network_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open network file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("network file " + path.string() + ": " + e.what());
    }
    return load_network(doc);
}

nlohmann::json network_to_json(const NeuralNet& net)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const DenseLayer& layer : net.layers()) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < layer.size(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < layer.fan_in(); ++c)
                row.push_back(layer.weights(r, c));
            rows.push_back(std::move(row));
        }
        nlohmann::json biases(std::vector<double>(layer.biases.data(), layer.biases.data() + layer.biases.size()));
        layers.push_back({{"weights", std::move(rows)},
                          {"biases", std::move(biases)},
                          {"activation", layer.activation == Activation::ReLU ? "relu" : "linear"}});
    }
    return {{"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

std::vector<Eigen::VectorXd> preactivations(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() != net.input_dim())
        throw Error("preactivations: input has length " + std::to_string(x.size()) + ", expected " +
                    std::to_string(net.input_dim()));
    std::vector<Eigen::VectorXd> out;
    out.reserve(net.num_layers());
    Eigen::VectorXd h = x;
    for (const DenseLayer& layer : net.layers()) {
        Eigen::VectorXd pre = layer.weights * h + layer.biases;
        h = layer.activation == Activation::ReLU ? Eigen::VectorXd(relu(pre)) : pre;
        out.push_back(std::move(pre));
    }
    return out;
}

Eigen::VectorXd forward(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() != net.input_dim())
        throw Error("forward: input has length " + std::to_string(x.size()) + ", expected " +
                    std::to_string(net.input_dim()));
    Eigen::VectorXd h = x;
    for (const DenseLayer& layer : net.layers()) {
        Eigen::VectorXd pre = layer.weights * h + layer.biases;
        h = layer.activation == Activation::ReLU ? Eigen::VectorXd(relu(pre)) : pre;
    }
    return h;
}

Eigen::Index predicted_class(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    const Eigen::VectorXd out = forward(net, x);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < out.size(); ++k)
        if (out[k] > out[best])
            best = k;
    return best;
}

Eigen::Index second_likeliest(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x,
                              Eigen::Index excluded)
{
    const Eigen::VectorXd out = forward(net, x);
    Eigen::Index best = -1;
    for (Eigen::Index k = 0; k < out.size(); ++k)
        if (k != excluded && (best < 0 || out[k] > out[best]))
            best = k;
    if (best < 0)
        throw Error("second_likeliest: network has a single output");
    return best;
}

}  // namespace relumip
