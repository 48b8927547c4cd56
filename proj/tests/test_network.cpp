#include "doctest.h"

#include <nlohmann/json.hpp>
#include <random>

#include "relumip/error.hpp"
#include "relumip/network.hpp"

using namespace relumip;
using nlohmann::json;

namespace {

json tiny_doc(double w2 = 2.0)
{
    return json::parse(R"({"input_dim": 2, "layers": [
        {"weights": [[1, -1]], "biases": [0.5], "activation": "relu"},
        {"weights": [[)" + std::to_string(w2) + R"(]], "biases": [0], "activation": "linear"}]})");
}

}  // namespace

TEST_CASE("load minimal network")
{
    const NeuralNet net = load_network(tiny_doc(1.0));
    CHECK(net.input_dim() == 2);
    CHECK(net.num_layers() == 2);
    CHECK(net.relu_count() == 1);
    CHECK(net.output_dim() == 1);
}

TEST_CASE("load errors name the layer and field")
{
    json bad = tiny_doc();
    bad["layers"][0]["biases"] = {0.5, 1.0, 2.0};
    bad["layers"][0]["weights"] = {{1, -1}, {0, 1}};
    try {
        load_network(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        const std::string what = e.what();
        CHECK(what.find("layer 0") != std::string::npos);
        CHECK(what.find("biases") != std::string::npos);
    }

    json empty = {{"input_dim", 2}, {"layers", json::array()}};
    CHECK_THROWS_AS(load_network(empty), ParseError);

    json missing = tiny_doc();
    missing["layers"][1].erase("activation");
    CHECK_THROWS_WITH_AS(load_network(missing), doctest::Contains("activation"), ParseError);

    json conv = tiny_doc();
    conv["layers"][0]["type"] = "conv2d";
    CHECK_THROWS_WITH_AS(load_network(conv), doctest::Contains("dense"), ParseError);

    json relu_out = tiny_doc();
    relu_out["layers"][1]["activation"] = "relu";
    CHECK_THROWS_AS(load_network(relu_out), ParseError);

    json cols = tiny_doc();
    cols["layers"][1]["weights"] = {{1, 2}};
    CHECK_THROWS_WITH_AS(load_network(cols), doctest::Contains("layer 1"), ParseError);
}

TEST_CASE("forward clamps negative preactivations")
{
    const NeuralNet net = load_network(tiny_doc());
    Eigen::Vector2d x(0.2, 0.9);
    const auto pre = preactivations(net, x);
    CHECK(pre[0][0] == doctest::Approx(-0.2));
    CHECK(forward(net, x)[0] == 0.0);

    x << 1.0, 0.0;
    CHECK(preactivations(net, x)[0][0] == doctest::Approx(1.5));
    CHECK(forward(net, x)[0] == doctest::Approx(3.0));

    CHECK_THROWS_AS(forward(net, Eigen::VectorXd::Zero(3)), Error);
    CHECK_THROWS_AS(preactivations(net, Eigen::VectorXd::Zero(1)), Error);
}

TEST_CASE("identity layer")
{
    DenseLayer hidden{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Activation::ReLU};
    DenseLayer out{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Activation::Linear};
    const NeuralNet net(1, {hidden, out});
    CHECK(forward(net, Eigen::VectorXd::Constant(1, 0.7))[0] == doctest::Approx(0.7));
}

TEST_CASE("preactivations reproduce forward on random inputs")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    auto rand_mat = [&](Eigen::Index r, Eigen::Index c) {
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = g(rng);
        return m;
    };
    const NeuralNet net(3, {{rand_mat(4, 3), rand_mat(4, 1).col(0), Activation::ReLU},
                            {rand_mat(5, 4), rand_mat(5, 1).col(0), Activation::ReLU},
                            {rand_mat(2, 5), rand_mat(2, 1).col(0), Activation::Linear}});
    for (int s = 0; s < 100; ++s) {
        const Eigen::VectorXd x = rand_mat(3, 1).col(0);
        const auto pre = preactivations(net, x);
        Eigen::VectorXd h = x;
        for (std::size_t l = 0; l + 1 < net.num_layers(); ++l)
            h = pre[l].cwiseMax(0.0);
        // output preactivation is the output
        CHECK((pre.back() - forward(net, x)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(forward(net, x).allFinite());
        // hidden values are ReLU of preactivations and feed the next layer
        CHECK(((net.layer(2).weights * h + net.layer(2).biases) - pre.back()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("round trip through json and class helpers")
{
    const NeuralNet net = load_network(tiny_doc());
    const NeuralNet again = load_network(network_to_json(net));
    CHECK(again.layer(0).weights == net.layer(0).weights);

    DenseLayer hidden{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::ReLU};
    DenseLayer out{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::Linear};
    const NeuralNet ident(3, {hidden, out});
    const Eigen::Vector3d x(0.2, 0.9, 0.9);
    CHECK(predicted_class(ident, x) == 1);
    CHECK(second_likeliest(ident, x, 1) == 2);
    CHECK(second_likeliest(ident, x, 0) == 1);
}
