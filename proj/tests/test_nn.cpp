#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "latentlink/nn.hpp"
#include "latentlink/serialize.hpp"

using namespace latentlink;

namespace {

// Scalar loss used by the gradient checks: fixed projection of the net
// output, so grad_y is the projection vector itself.
Scalar projected_loss(const Mlp& net, const Vec& x, const Vec& proj) {
    return proj.dot(mlp_forward(net, x));
}

Vec input_grad(const Mlp& net, const Vec& x, const Vec& proj) {
    MlpCache cache;
    mlp_forward(net, Mat(x), &cache);
    return mlp_backward(net, cache, Mat(proj));
}

Vec param_grad(const Mlp& net, const Vec& x, const Vec& proj) {
    MlpCache cache;
    mlp_forward(net, Mat(x), &cache);
    MlpGrads grads = zero_grads(net);
    mlp_backward(net, cache, Mat(proj), &grads);
    return grads_to_vec(net, grads);
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("forward: zero weights yield the bias") {
    Mlp net;
    net.layers.push_back({Mat::Zero(3, 2), Vec{{0.5, -1.0, 2.0}}, Activation::identity});
    Rng rng(1);
    const Vec y = mlp_forward(net, Vec(rng.gaussian_vec(2)));
    CHECK(y.isApprox(Vec{{0.5, -1.0, 2.0}}));
}

TEST_CASE("forward: relu on identity layer") {
    Mlp net;
    net.layers.push_back({Mat::Identity(2, 2), Vec::Zero(2), Activation::relu});
    const Vec y = mlp_forward(net, Vec{{-1.0, 2.0}});
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 2.0);
}

TEST_CASE("forward: single diagonal layer") {
    Mlp net;
    Mat w(2, 2);
    w << 2, 0, 0, 3;
    net.layers.push_back({w, Vec{{1.0, -1.0}}, Activation::identity});
    const Vec y = mlp_forward(net, Vec{{1.0, 1.0}});
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[1] == doctest::Approx(2.0));
}

TEST_CASE("forward: dimension mismatch is rejected with shapes") {
    Rng rng(2);
    Mlp net = make_mlp({4, 3}, Activation::tanh, Activation::identity, rng);
    CHECK_THROWS_WITH_AS(mlp_forward(net, Vec::Zero(5)),
                         doctest::Contains("expects 4"), std::invalid_argument);
}

TEST_CASE("forward is deterministic bitwise") {
    Rng rng(3);
    Mlp net = make_mlp({5, 8, 3}, Activation::tanh, Activation::sigmoid, rng);
    const Vec x = rng.gaussian_vec(5);
    const Vec y1 = mlp_forward(net, x);
    const Vec y2 = mlp_forward(net, x);
    for (int i = 0; i < 3; ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("backward: zero upstream gradient zeroes everything") {
    Rng rng(4);
    Mlp net = make_mlp({3, 6, 2}, Activation::tanh, Activation::identity, rng);
    MlpCache cache;
    mlp_forward(net, Mat(rng.gaussian_vec(3)), &cache);
    MlpGrads grads = zero_grads(net);
    const Mat gx = mlp_backward(net, cache, Mat::Zero(2, 1), &grads);
    CHECK(gx.cwiseAbs().maxCoeff() == 0.0);
    CHECK(grads_to_vec(net, grads).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward: single identity layer calculus") {
    Mlp net;
    net.layers.push_back({Mat::Identity(2, 2), Vec::Zero(2), Activation::identity});
    const Vec x{{0.7, -0.3}};
    MlpCache cache;
    mlp_forward(net, Mat(x), &cache);
    MlpGrads grads = zero_grads(net);
    const Vec gy{{2.0, 5.0}};
    const Mat gx = mlp_backward(net, cache, Mat(gy), &grads);
    CHECK(Vec(gx.col(0)).isApprox(gy));
    CHECK(grads.weight[0].isApprox(gy * x.transpose()));
    CHECK(grads.bias[0].isApprox(gy));
}

TEST_CASE("backward: 2-layer tanh net matches central differences") {
    Rng rng(5);
    Mlp net = make_mlp({4, 7, 3}, Activation::tanh, Activation::tanh, rng);
    const Vec proj = rng.gaussian_vec(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec x = rng.gaussian_vec(4);
        const Scalar err = grad_check(
            [&](const Vec& p) { return projected_loss(net, p, proj); },
            [&](const Vec& p) { return input_grad(net, p, proj); }, x, 1e-5);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("backward: mismatched cache rejected") {
    Rng rng(6);
    Mlp net = make_mlp({3, 5, 2}, Activation::relu, Activation::identity, rng);
    Mlp other = make_mlp({3, 6, 2}, Activation::relu, Activation::identity, rng);
    MlpCache cache;
    mlp_forward(other, Mat(rng.gaussian_vec(3)), &cache);
    CHECK_THROWS_AS(mlp_backward(net, cache, Mat::Zero(2, 1)), std::invalid_argument);
}

TEST_CASE("backward: every activation matches finite differences at 1000 points") {
    Rng rng(7);
    for (const Activation act : {Activation::identity, Activation::relu,
                                 Activation::tanh, Activation::sigmoid}) {
        Mlp net = make_mlp({3, 6, 2}, act, act, rng);
        const Vec proj = rng.gaussian_vec(2);
        Scalar worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            // Keep relu pre-activations away from the kink.
            const Vec x = rng.gaussian_vec(3) * 0.9 + Vec::Constant(3, 0.05);
            const Scalar err = grad_check(
                [&](const Vec& p) { return projected_loss(net, p, proj); },
                [&](const Vec& p) { return input_grad(net, p, proj); }, x, 1e-5);
            worst = std::max(worst, err);
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("backward: parameter gradients match finite differences") {
    Rng rng(8);
    Mlp net = make_mlp({3, 5, 2}, Activation::tanh, Activation::sigmoid, rng);
    const Vec proj = rng.gaussian_vec(2);
    const Vec x = rng.gaussian_vec(3);
    const Vec p0 = mlp_get_params(net);
    const Scalar err = grad_check(
        [&](const Vec& p) {
            Mlp m = net;
            mlp_set_params(m, p);
            return projected_loss(m, x, proj);
        },
        [&](const Vec& p) {
            Mlp m = net;
            mlp_set_params(m, p);
            return param_grad(m, x, proj);
        },
        p0, 1e-5);
    CHECK(err < 1e-6);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    AdamState st(3, {0.1, 0.9, 0.999, 1e-8});
    Vec params{{1.0, -2.0, 0.5}};
    const Vec before = params;
    adam_step(st, params, Vec::Zero(3));
    CHECK(params.isApprox(before));
    CHECK(st.step == 1);
}

TEST_CASE("adam: first step moves by about lr") {
    // Hand evaluation: m_hat = g, v_hat = g^2, step = lr * g/(|g|+eps).
    AdamState st(1, {0.1, 0.9, 0.999, 1e-8});
    Vec params{{2.0}};
    adam_step(st, params, Vec{{1.0}});
    CHECK(std::abs(params[0] - (2.0 - 0.1)) < 1e-7);
}

TEST_CASE("adam: identical calls are bitwise identical") {
    AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
    Rng rng(9);
    const Vec grads = rng.gaussian_vec(6);
    Vec p1 = rng.gaussian_vec(6);
    Vec p2 = p1;
    AdamState s1(6, cfg), s2(6, cfg);
    adam_step(s1, p1, grads);
    adam_step(s2, p2, grads);
    for (int i = 0; i < 6; ++i) CHECK(p1[i] == p2[i]);
}

TEST_CASE("adam: non-finite gradients rejected") {
    AdamState st(2, {});
    Vec params = Vec::Zero(2);
    Vec grads{{1.0, std::numeric_limits<Scalar>::quiet_NaN()}};
    CHECK_THROWS_AS(adam_step(st, params, grads), std::invalid_argument);
}

TEST_CASE("grad_check: quadratic closed form") {
    const auto f = [](const Vec& x) { return x.squaredNorm(); };
    const auto g = [](const Vec& x) { return Vec(2.0 * x); };
    const Scalar err = grad_check(f, g, Vec{{1.0, 2.0}}, 1e-6);
    CHECK(err < 1e-8);
    CHECK(g(Vec{{1.0, 2.0}}).isApprox(Vec{{2.0, 4.0}}));
}

TEST_CASE("grad_check: constant function has zero error") {
    const auto f = [](const Vec&) { return 3.0; };
    const auto g = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
    CHECK(grad_check(f, g, Vec{{0.3, -0.7}}, 1e-6) == 0.0);
}

TEST_CASE("grad_check: mlp-backed loss below 1e-4") {
    Rng rng(10);
    Mlp net = make_mlp({4, 8, 8, 1}, Activation::tanh, Activation::identity, rng);
    const Vec proj = Vec::Ones(1);
    const Vec x = rng.gaussian_vec(4);
    const Scalar err = grad_check(
        [&](const Vec& p) { return projected_loss(net, p, proj); },
        [&](const Vec& p) { return input_grad(net, p, proj); }, x, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("serialization: weight round-trip is bit-exact") {
    Rng rng(11);
    Mlp net = make_mlp({4, 9, 2}, Activation::relu, Activation::sigmoid, rng);
    const auto path = (std::filesystem::temp_directory_path() / "ll_nn_roundtrip.llnk").string();
    save_mlp(path, net);
    const Mlp back = load_mlp(path);
    REQUIRE(back.layers.size() == net.layers.size());
    const Vec a = mlp_get_params(net);
    const Vec b = mlp_get_params(back);
    REQUIRE(a.size() == b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        CHECK(back.layers[l].act == net.layers[l].act);
    std::filesystem::remove(path);
}

TEST_CASE("serialization: truncated file rejected with path context") {
    Rng rng(12);
    Mlp net = make_mlp({3, 3}, Activation::identity, Activation::identity, rng);
    const auto path = (std::filesystem::temp_directory_path() / "ll_nn_trunc.llnk").string();
    save_mlp(path, net);
    auto bytes = read_file(path);
    write_file(path, std::string_view(bytes).substr(0, bytes.size() / 2));
    CHECK_THROWS_WITH_AS(load_mlp(path), doctest::Contains("ll_nn_trunc"),
                         std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("mlp validation catches broken chains") {
    Mlp net;
    net.layers.push_back({Mat::Zero(3, 2), Vec::Zero(3), Activation::identity});
    net.layers.push_back({Mat::Zero(2, 4), Vec::Zero(2), Activation::identity});
    CHECK_THROWS_AS(validate_mlp(net), std::invalid_argument);
}

}  // TEST_SUITE
