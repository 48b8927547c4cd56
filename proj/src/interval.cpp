#include "relumip/interval.hpp"

#include <nlohmann/json.hpp>

#include "relumip/error.hpp"

namespace relumip {

std::string to_string(BoundSource s)
{
    switch (s) {
    case BoundSource::Interval: return "interval";
    case BoundSource::Obbt: return "obbt";
    case BoundSource::ObbtFallback: return "obbt_fallback";
    }
    return "?";
}

namespace {

BoundSource parse_source(const std::string& s)
{
    if (s == "interval")
        return BoundSource::Interval;
    if (s == "obbt")
        return BoundSource::Obbt;
    if (s == "obbt_fallback")
        return BoundSource::ObbtFallback;
    throw ParseError("bounds: unknown provenance \"" + s + "\"");
}

void fill_partition_intervals(NodeBounds& nb, const Eigen::Ref<const Eigen::VectorXd>& w, const InputBox& box)
{
    nb.inactive.clear();
    nb.active.clear();
    nb.partition_source.clear();
    for (const auto& subset : nb.partition.subsets) {
        const Interval r = partition_interval(w, subset, box);
        nb.inactive.push_back(r);
        nb.active.push_back(r);
        nb.partition_source.push_back(BoundSource::Interval);
    }
}

}  // namespace

InputBox BoundsTable::layer_input_box(std::size_t l) const
{
    if (l == 0)
        return input_box;
    const auto& prev = layers[l - 1];
    Eigen::VectorXd lo(static_cast<Eigen::Index>(prev.size())), hi(lo.size());
    for (std::size_t j = 0; j < prev.size(); ++j) {
        const Interval r = prev[j].output_range();
        lo[static_cast<Eigen::Index>(j)] = r.lo;
        hi[static_cast<Eigen::Index>(j)] = r.hi;
    }
    return InputBox(lo, hi);
}

int BoundsTable::unstable_count() const
{
    int count = 0;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l)
        for (const auto& nb : layers[l])
            count += nb.stable() ? 0 : 1;
    return count;
}

BoundsTable propagate(const NeuralNet& net, const InputBox& box, const PartitionPlan& plan)
{
    if (box.dim() != net.input_dim())
        throw Error("propagate: input box has dimension " + std::to_string(box.dim()) + ", network expects " +
                    std::to_string(net.input_dim()));
    if (!plan.empty() && plan.size() + 1 != net.num_layers())
        throw Error("propagate: partition plan does not match the number of hidden layers");

    BoundsTable table;
    table.input_box = box;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const DenseLayer& layer = net.layer(l);
        const InputBox in = table.layer_input_box(l);
        const bool hidden = l + 1 < net.num_layers();
        std::vector<NodeBounds> nodes(static_cast<std::size_t>(layer.size()));
        for (Eigen::Index j = 0; j < layer.size(); ++j) {
            NodeBounds& nb = nodes[static_cast<std::size_t>(j)];
            const auto w = layer.weights.row(j).transpose();
            nb.preact = node_interval(w, layer.biases[j], in);
            if (hidden) {
                nb.partition = plan.empty() ? Partition::single(static_cast<int>(layer.fan_in()))
                                            : plan[l][static_cast<std::size_t>(j)];
                if (!nb.partition.is_valid_for(static_cast<int>(layer.fan_in())))
                    throw Error("propagate: invalid partition for layer " + std::to_string(l) + " node " +
                                std::to_string(j));
                fill_partition_intervals(nb, w, in);
            }
        }
        table.layers.push_back(std::move(nodes));
    }
    return table;
}

BoundsTable with_partitions(const BoundsTable& table, const NeuralNet& net, const PartitionPlan& plan)
{
    BoundsTable out = table;
    for (std::size_t l = 0; l + 1 < net.num_layers(); ++l) {
        const InputBox in = out.layer_input_box(l);
        for (std::size_t j = 0; j < out.layers[l].size(); ++j) {
            NodeBounds& nb = out.layers[l][j];
            nb.partition = plan[l][j];
            fill_partition_intervals(nb, net.layer(l).weights.row(static_cast<Eigen::Index>(j)).transpose(), in);
        }
    }
    return out;
}

nlohmann::json bounds_to_json(const BoundsTable& table)
{
    using nlohmann::json;
    auto pair = [](const Interval& r) { return json::array({r.lo, r.hi}); };
    json layers = json::array();
    for (const auto& layer : table.layers) {
        json nodes = json::array();
        for (const auto& nb : layer) {
            json node = {{"preact", pair(nb.preact)}, {"preact_source", to_string(nb.preact_source)}};
            json subsets = json::array(), inactive = json::array(), active = json::array(), sources = json::array();
            for (std::size_t n = 0; n < nb.partition.size(); ++n) {
                subsets.push_back(nb.partition.subsets[n]);
                inactive.push_back(pair(nb.inactive[n]));
                active.push_back(pair(nb.active[n]));
                sources.push_back(to_string(nb.partition_source[n]));
            }
            node["partition"] = std::move(subsets);
            node["inactive"] = std::move(inactive);
            node["active"] = std::move(active);
            node["partition_source"] = std::move(sources);
            nodes.push_back(std::move(node));
        }
        layers.push_back(std::move(nodes));
    }
    const auto& box = table.input_box;
    return {{"input_box",
             {{"lower", std::vector<double>(box.lower.data(), box.lower.data() + box.dim())},
              {"upper", std::vector<double>(box.upper.data(), box.upper.data() + box.dim())}}},
            {"layers", std::move(layers)}};
}

BoundsTable bounds_from_json(const nlohmann::json& doc)
{
    try {
        auto pair = [](const nlohmann::json& j) {
            if (!j.is_array() || j.size() != 2)
                throw ParseError("bounds: interval must be a [lo, hi] pair");
            return Interval{j[0].get<double>(), j[1].get<double>()};
        };
        BoundsTable table;
        const auto lo = doc.at("input_box").at("lower").get<std::vector<double>>();
        const auto hi = doc.at("input_box").at("upper").get<std::vector<double>>();
        table.input_box = InputBox(Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                                   Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
        for (const auto& layer : doc.at("layers")) {
            std::vector<NodeBounds> nodes;
            for (const auto& node : layer) {
                NodeBounds nb;
                nb.preact = pair(node.at("preact"));
                nb.preact_source = parse_source(node.at("preact_source").get<std::string>());
                for (const auto& s : node.at("partition"))
                    nb.partition.subsets.push_back(s.get<std::vector<int>>());
                for (const auto& r : node.at("inactive"))
                    nb.inactive.push_back(pair(r));
                for (const auto& r : node.at("active"))
                    nb.active.push_back(pair(r));
                for (const auto& s : node.at("partition_source"))
                    nb.partition_source.push_back(parse_source(s.get<std::string>()));
                if (nb.inactive.size() != nb.partition.size() || nb.active.size() != nb.partition.size() ||
                    nb.partition_source.size() != nb.partition.size())
                    throw ParseError("bounds: partition interval count mismatch");
                nodes.push_back(std::move(nb));
            }
            table.layers.push_back(std::move(nodes));
        }
        return table;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bounds: ") + e.what());
    }
}

}  // namespace relumip
