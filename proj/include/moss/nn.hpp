#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "moss/matrix.hpp"

namespace moss {

enum class Activation { Identity, ReLU, Tanh };

template <class T>
struct DenseLayer {
    Matrix<T> weight;     // [in x out]
    std::vector<T> bias;  // [out]
    Activation activation = Activation::Identity;
};

/// Fixed-topology MLP: y = act_L(... act_1(x W_1 + b_1) ... W_L + b_L).
/// Every network in the agent (actor, critics, projection nets) is one of
/// these; there is no general autodiff graph.
template <class T>
struct Mlp {
    std::vector<DenseLayer<T>> layers;

    std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().weight.rows(); }
    std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().weight.cols(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weight.size() + l.bias.size();
        return n;
    }

    void validate() const {
        if (layers.empty()) throw Error(ErrorCode::Config, "Mlp: no layers");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            if (l.bias.size() != l.weight.cols())
                throw Error(ErrorCode::Config, "Mlp: bias length must equal weight cols");
            if (i > 0 && layers[i - 1].weight.cols() != l.weight.rows())
                throw Error(ErrorCode::Config, "Mlp: adjacent layer dimensions do not chain");
        }
    }
};

/// Gradients (or Adam moments) shaped exactly like an Mlp's parameters.
template <class T>
struct MlpGrads {
    std::vector<Matrix<T>> weight;
    std::vector<std::vector<T>> bias;

    static MlpGrads zeros_like(const Mlp<T>& net) {
        MlpGrads g;
        g.weight.reserve(net.layers.size());
        g.bias.reserve(net.layers.size());
        for (const auto& l : net.layers) {
            g.weight.emplace_back(l.weight.rows(), l.weight.cols());
            g.bias.emplace_back(l.bias.size(), T(0));
        }
        return g;
    }

    void accumulate(const MlpGrads& other) {
        for (std::size_t l = 0; l < weight.size(); ++l) {
            for (std::size_t i = 0; i < weight[l].size(); ++i)
                weight[l].data()[i] += other.weight[l].data()[i];
            for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
        }
    }

    void scale(T factor) {
        for (std::size_t l = 0; l < weight.size(); ++l) {
            for (std::size_t i = 0; i < weight[l].size(); ++i) weight[l].data()[i] *= factor;
            for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] *= factor;
        }
    }

    bool all_finite() const {
        for (const auto& w : weight)
            if (!w.all_finite()) return false;
        for (const auto& b : bias)
            for (T v : b)
                if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    double squared_norm() const {
        double s = 0;
        for (const auto& w : weight)
            for (std::size_t i = 0; i < w.size(); ++i) s += double(w.data()[i]) * w.data()[i];
        for (const auto& b : bias)
            for (T v : b) s += double(v) * v;
        return s;
    }
};

template <class T>
inline T apply_activation(Activation act, T z) {
    switch (act) {
        case Activation::Identity: return z;
        case Activation::ReLU: return z > T(0) ? z : T(0);
        case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

/// Derivative of the activation expressed through the pre-activation z.
template <class T>
inline T activation_grad(Activation act, T z) {
    switch (act) {
        case Activation::Identity: return T(1);
        case Activation::ReLU: return z > T(0) ? T(1) : T(0);
        case Activation::Tanh: {
            T t = std::tanh(z);
            return T(1) - t * t;
        }
    }
    return T(1);
}

/// Intermediate values captured during a forward pass, needed by backward().
template <class T>
struct ForwardCache {
    Matrix<T> input;
    std::vector<Matrix<T>> pre;   // pre-activation per layer
    std::vector<Matrix<T>> post;  // activation output per layer
};

template <class T>
Matrix<T> forward(const Mlp<T>& net, const Matrix<T>& input, ForwardCache<T>* cache) {
    if (net.layers.empty()) throw Error(ErrorCode::Config, "forward: empty network");
    if (input.cols() != net.in_dim())
        throw Error(ErrorCode::Config, "forward: input width does not match first layer");
    if (cache) {
        cache->input = input;
        cache->pre.clear();
        cache->post.clear();
    }
    Matrix<T> x = input;
    for (const auto& layer : net.layers) {
        Matrix<T> z = matmul(x, layer.weight);
        for (std::size_t i = 0; i < z.rows(); ++i) {
            auto row = z.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
        }
        Matrix<T> a = z;
        if (layer.activation != Activation::Identity)
            for (std::size_t i = 0; i < a.size(); ++i)
                a.data()[i] = apply_activation(layer.activation, a.data()[i]);
        if (cache) {
            cache->pre.push_back(z);
            cache->post.push_back(a);
        }
        x = std::move(a);
    }
    return x;
}

template <class T>
Matrix<T> forward(const Mlp<T>& net, const Matrix<T>& input) {
    return forward(net, input, static_cast<ForwardCache<T>*>(nullptr));
}

/// Backpropagates `upstream` (dLoss/dOutput, [batch x out]) through the net.
/// Parameter gradients are ACCUMULATED into `grads`; the return value is
/// dLoss/dInput. Gradients are those of the scalar <upstream, forward(input)>.
template <class T>
Matrix<T> backward(const Mlp<T>& net, const ForwardCache<T>& cache, const Matrix<T>& upstream,
                   MlpGrads<T>& grads) {
    const std::size_t L = net.layers.size();
    if (cache.pre.size() != L)
        throw Error(ErrorCode::Config, "backward: cache does not match network");
    if (upstream.rows() != cache.input.rows() || upstream.cols() != net.out_dim())
        throw Error(ErrorCode::Config, "backward: upstream gradient shape mismatch");

    Matrix<T> delta = upstream;
    for (std::size_t li = L; li-- > 0;) {
        const auto& layer = net.layers[li];
        const Matrix<T>& pre = cache.pre[li];
        if (layer.activation != Activation::Identity)
            for (std::size_t i = 0; i < delta.size(); ++i)
                delta.data()[i] *= activation_grad(layer.activation, pre.data()[i]);

        const Matrix<T>& layer_input = (li == 0) ? cache.input : cache.post[li - 1];
        Matrix<T> dw = matmul_tn(layer_input, delta);
        for (std::size_t i = 0; i < dw.size(); ++i)
            grads.weight[li].data()[i] += dw.data()[i];
        for (std::size_t i = 0; i < delta.rows(); ++i) {
            auto row = delta.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) grads.bias[li][j] += row[j];
        }
        if (li > 0) delta = matmul_nt(delta, layer.weight);
    }
    return matmul_nt(delta, net.layers[0].weight);
}

enum class InitScheme { Orthogonal, UniformFanIn };

/// Orthogonal rows/columns from the QR of a standard normal matrix, the
/// initialization used for actor and critic layers. Computed in double and
/// cast down, so float and double networks built from the same stream match.
template <class T>
Matrix<T> orthogonal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    const std::size_t big = std::max(rows, cols), small = std::min(rows, cols);
    Matrix<double> a(big, small);
    fill_normal(a, rng);
    Eigen::MatrixXd dense = eigen_view(a);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(dense);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                static_cast<Eigen::Index>(big),
                                                static_cast<Eigen::Index>(small));
    Eigen::MatrixXd r = qr.matrixQR().topRows(static_cast<Eigen::Index>(small));
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);

    Matrix<T> out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            out(i, j) = static_cast<T>(rows >= cols ? q(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j))
                                                    : q(static_cast<Eigen::Index>(j),
                                                        static_cast<Eigen::Index>(i)));
    return out;
}

template <class T>
DenseLayer<T> make_layer(std::size_t in, std::size_t out, Activation act, InitScheme scheme,
                         Rng& rng) {
    DenseLayer<T> layer;
    layer.activation = act;
    layer.bias.assign(out, T(0));
    switch (scheme) {
        case InitScheme::Orthogonal:
            layer.weight = orthogonal_matrix<T>(in, out, rng);
            break;
        case InitScheme::UniformFanIn: {
            const double bound = 1.0 / std::sqrt(static_cast<double>(in));
            layer.weight = Matrix<T>(in, out);
            fill_uniform(layer.weight, rng, -bound, bound);
            for (auto& b : layer.bias) b = static_cast<T>(rng.uniform(-bound, bound));
            break;
        }
    }
    return layer;
}

/// dims = {in, hidden..., out}. Hidden layers use `hidden`, the last layer
/// uses `output`.
template <class T>
Mlp<T> make_mlp(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
                InitScheme scheme, Rng& rng) {
    if (dims.size() < 2) throw Error(ErrorCode::Config, "make_mlp: need at least in/out dims");
    Mlp<T> net;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Activation act = (i + 2 == dims.size()) ? output : hidden;
        net.layers.push_back(make_layer<T>(dims[i], dims[i + 1], act, scheme, rng));
    }
    net.validate();
    return net;
}

template <class T, class U>
Mlp<T> cast_mlp(const Mlp<U>& net) {
    Mlp<T> out;
    for (const auto& l : net.layers) {
        DenseLayer<T> layer;
        layer.activation = l.activation;
        layer.weight = cast_matrix<T>(l.weight);
        layer.bias.reserve(l.bias.size());
        for (U v : l.bias) layer.bias.push_back(static_cast<T>(v));
        out.layers.push_back(std::move(layer));
    }
    return out;
}

}  // namespace moss
