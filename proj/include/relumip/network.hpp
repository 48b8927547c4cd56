#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace relumip {

enum class Activation { ReLU, Linear };

/// One fully connected layer. Rows of `weights` are nodes, columns are inputs.
struct DenseLayer
{
    Eigen::MatrixXd weights;
    Eigen::VectorXd biases;
    Activation activation = Activation::ReLU;

    Eigen::Index size() const { return weights.rows(); }
    Eigen::Index fan_in() const { return weights.cols(); }
};

/// Feed-forward dense ReLU network with an affine output layer. Immutable once built.
class NeuralNet
{
public:
    /// Validates shapes and activations; throws ParseError on violation.
    NeuralNet(Eigen::Index input_dim, std::vector<DenseLayer> layers);

    Eigen::Index input_dim() const { return input_dim_; }
    Eigen::Index output_dim() const { return layers_.back().size(); }
    std::size_t num_layers() const { return layers_.size(); }
    const DenseLayer& layer(std::size_t l) const { return layers_[l]; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    /// Number of ReLU nodes over all hidden layers.
    Eigen::Index relu_count() const;

private:
    Eigen::Index input_dim_;
    std::vector<DenseLayer> layers_;
};

/// Axis-aligned box of input values.
struct InputBox
{
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    InputBox() = default;
    InputBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

    static InputBox uniform(Eigen::Index dim, double lo, double hi);

    Eigen::Index dim() const { return lower.size(); }
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 0.0) const;
};

NeuralNet load_network(const nlohmann::json& document);
NeuralNet load_network_file(const std::filesystem::path& path);
nlohmann::json network_to_json(const NeuralNet& net);

/// Preactivation vector of every layer (hidden layers and the output layer).
std::vector<Eigen::VectorXd> preactivations(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Output-layer values.
Eigen::VectorXd forward(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Index of the largest output; ties resolve to the smallest index.
Eigen::Index predicted_class(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Class with the largest output other than `excluded`; ties resolve to the smallest index.
Eigen::Index second_likeliest(const NeuralNet& net, const Eigen::Ref<const Eigen::VectorXd>& x,
                              Eigen::Index excluded);

/// Elementwise ReLU that works on any Eigen expression.
template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& v)
{
    return v.cwiseMax(typename Derived::Scalar(0));
}

}  // namespace relumip
