#include "latentlink/nn.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace latentlink {

namespace {

std::string shape_str(const Mat& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

}  // namespace

Mat apply_activation(Activation act, const Mat& z) {
    switch (act) {
        case Activation::identity:
            return z;
        case Activation::relu:
            return z.cwiseMax(0.0);
        case Activation::tanh:
            return z.array().tanh().matrix();
        case Activation::sigmoid:
            return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    }
    throw std::invalid_argument("unknown activation tag");
}

Mat activation_derivative(Activation act, const Mat& z, const Mat& a) {
    switch (act) {
        case Activation::identity:
            return Mat::Ones(z.rows(), z.cols());
        case Activation::relu:
            return (z.array() > 0.0).cast<Scalar>().matrix();
        case Activation::tanh:
            return (1.0 - a.array().square()).matrix();
        case Activation::sigmoid:
            return (a.array() * (1.0 - a.array())).matrix();
    }
    throw std::invalid_argument("unknown activation tag");
}

void validate_mlp(const Mlp& net) {
    if (net.layers.empty()) throw std::invalid_argument("mlp has no layers");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        if (l.bias.size() != l.weight.rows())
            throw std::invalid_argument("mlp layer " + std::to_string(i) +
                                        ": bias size " + std::to_string(l.bias.size()) +
                                        " != weight rows " + std::to_string(l.weight.rows()));
        if (i > 0 && net.layers[i - 1].weight.rows() != l.weight.cols())
            throw std::invalid_argument(
                "mlp layer " + std::to_string(i) + ": input dim " +
                std::to_string(l.weight.cols()) + " does not chain from previous output dim " +
                std::to_string(net.layers[i - 1].weight.rows()));
        if (!l.weight.allFinite() || !l.bias.allFinite())
            throw std::invalid_argument("mlp layer " + std::to_string(i) +
                                        " has non-finite parameters");
    }
}

Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("mlp needs at least one layer");
    if (acts.size() != dims.size() - 1)
        throw std::invalid_argument("one activation per layer required");
    Mlp net;
    net.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const Scalar bound = std::sqrt(6.0 / (fan_in + fan_out));
        Mat w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-bound, bound);
        net.layers[l].weight = std::move(w);
        net.layers[l].bias = Vec::Zero(fan_out);
        net.layers[l].act = acts[l];
    }
    return net;
}

Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Activation output,
             Rng& rng) {
    std::vector<Activation> acts(dims.size() - 1, hidden);
    acts.back() = output;
    return make_mlp(dims, acts, rng);
}

Mat mlp_forward(const Mlp& net, const Mat& x, MlpCache* cache) {
    if (net.layers.empty()) throw std::invalid_argument("mlp has no layers");
    if (x.rows() != net.input_dim())
        throw std::invalid_argument("mlp_forward: input is " + shape_str(x) +
                                    " but net expects " +
                                    std::to_string(net.input_dim()) + " rows");
    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->post.clear();
        cache->pre.reserve(net.layers.size());
        cache->post.reserve(net.layers.size());
    }
    Mat a = x;
    for (const auto& layer : net.layers) {
        Mat z = (layer.weight * a).colwise() + layer.bias;
        a = apply_activation(layer.act, z);
        if (cache) {
            cache->pre.push_back(std::move(z));
            cache->post.push_back(a);
        }
    }
    return a;
}

Vec mlp_forward(const Mlp& net, const Vec& x, MlpCache* cache) {
    return mlp_forward(net, Mat(x), cache);
}

MlpGrads zero_grads(const Mlp& net) {
    MlpGrads g;
    g.weight.reserve(net.layers.size());
    g.bias.reserve(net.layers.size());
    for (const auto& l : net.layers) {
        g.weight.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Vec::Zero(l.bias.size()));
    }
    return g;
}

void accumulate(MlpGrads& into, const MlpGrads& from) {
    for (std::size_t l = 0; l < into.weight.size(); ++l) {
        into.weight[l] += from.weight[l];
        into.bias[l] += from.bias[l];
    }
}

Mat mlp_backward(const Mlp& net, const MlpCache& cache, const Mat& grad_y,
                 MlpGrads* grads) {
    const std::size_t n_layers = net.layers.size();
    if (cache.pre.size() != n_layers || cache.post.size() != n_layers)
        throw std::invalid_argument("mlp_backward: cache has " +
                                    std::to_string(cache.pre.size()) +
                                    " layers, net has " + std::to_string(n_layers));
    if (cache.input.rows() != net.input_dim())
        throw std::invalid_argument("mlp_backward: cache input dim " +
                                    std::to_string(cache.input.rows()) +
                                    " does not match net input dim " +
                                    std::to_string(net.input_dim()));
    if (grad_y.rows() != net.output_dim() || grad_y.cols() != cache.input.cols())
        throw std::invalid_argument("mlp_backward: grad_y is " + shape_str(grad_y) +
                                    ", expected " + std::to_string(net.output_dim()) +
                                    "x" + std::to_string(cache.input.cols()));
    for (std::size_t l = 0; l < n_layers; ++l) {
        if (cache.pre[l].rows() != net.layers[l].weight.rows())
            throw std::invalid_argument("mlp_backward: cache layer " + std::to_string(l) +
                                        " has " + std::to_string(cache.pre[l].rows()) +
                                        " rows, net expects " +
                                        std::to_string(net.layers[l].weight.rows()));
    }

    Mat delta = grad_y;
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = net.layers[l];
        delta = delta.cwiseProduct(
            activation_derivative(layer.act, cache.pre[l], cache.post[l]));
        const Mat& below = (l == 0) ? cache.input : cache.post[l - 1];
        if (grads) {
            grads->weight[l] += delta * below.transpose();
            grads->bias[l] += delta.rowwise().sum();
        }
        delta = (layer.weight.transpose() * delta).eval();
    }
    return delta;
}

Eigen::Index mlp_param_count(const Mlp& net) {
    Eigen::Index n = 0;
    for (const auto& l : net.layers) n += l.weight.size() + l.bias.size();
    return n;
}

Vec mlp_get_params(const Mlp& net) {
    Vec p(mlp_param_count(net));
    Eigen::Index at = 0;
    for (const auto& l : net.layers) {
        for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
            for (Eigen::Index j = 0; j < l.weight.cols(); ++j) p[at++] = l.weight(i, j);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) p[at++] = l.bias[i];
    }
    return p;
}

void mlp_set_params(Mlp& net, const Vec& params) {
    if (params.size() != mlp_param_count(net))
        throw std::invalid_argument("mlp_set_params: got " + std::to_string(params.size()) +
                                    " values, net has " +
                                    std::to_string(mlp_param_count(net)));
    Eigen::Index at = 0;
    for (auto& l : net.layers) {
        for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
            for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = params[at++];
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = params[at++];
    }
}

Vec grads_to_vec(const Mlp& net, const MlpGrads& grads) {
    Vec g(mlp_param_count(net));
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Mat& w = grads.weight[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) g[at++] = w(i, j);
        for (Eigen::Index i = 0; i < grads.bias[l].size(); ++i) g[at++] = grads.bias[l][i];
    }
    return g;
}

void adam_step(AdamState& state, Vec& params, const Vec& grads) {
    if (params.size() != state.m.size() || grads.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch (params " +
                                    std::to_string(params.size()) + ", grads " +
                                    std::to_string(grads.size()) + ", state " +
                                    std::to_string(state.m.size()) + ")");
    if (!grads.allFinite())
        throw std::invalid_argument("adam_step: non-finite gradients");
    const auto& c = state.cfg;
    state.step += 1;
    state.m = c.beta1 * state.m + (1.0 - c.beta1) * grads;
    state.v = c.beta2 * state.v.array().matrix() +
              (1.0 - c.beta2) * grads.array().square().matrix();
    const Scalar bc1 = 1.0 - std::pow(c.beta1, static_cast<Scalar>(state.step));
    const Scalar bc2 = 1.0 - std::pow(c.beta2, static_cast<Scalar>(state.step));
    params.array() -= c.lr * (state.m.array() / bc1) /
                      ((state.v.array() / bc2).sqrt() + c.epsilon);
}

Scalar grad_check(const std::function<Scalar(const Vec&)>& f,
                  const std::function<Vec(const Vec&)>& analytic_grad,
                  const Vec& x, Scalar step) {
    const Vec a = analytic_grad(x);
    Scalar max_rel = 0.0;
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + step;
        const Scalar fp = f(xp);
        xp[i] = x[i] - step;
        const Scalar fm = f(xp);
        xp[i] = x[i];
        const Scalar n = (fp - fm) / (2.0 * step);
        const Scalar rel = std::abs(a[i] - n) /
                           std::max(1e-12, std::abs(a[i]) + std::abs(n));
        if (rel > max_rel) max_rel = rel;
    }
    return max_rel;
}

}  // namespace latentlink
