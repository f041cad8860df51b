#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "moss/adam.hpp"
#include "moss/matrix.hpp"
#include "moss/nn.hpp"

namespace moss {

/// The three projection networks of the contrastive head plus the softmax
/// temperature. state_net embeds observations, skill_net embeds skills, and
/// pair_net embeds the concatenated (h, h') transition representation. All
/// three share the skill dimension as output width.
template <class T>
struct CpcNets {
    Mlp<T> state_net;  // observation -> R^d
    Mlp<T> skill_net;  // skill -> R^d
    Mlp<T> pair_net;   // (h, h') -> R^d
    T temperature = T(0.5);

    std::size_t embed_dim() const { return state_net.out_dim(); }

    void validate() const {
        state_net.validate();
        skill_net.validate();
        pair_net.validate();
        const std::size_t d = state_net.out_dim();
        if (skill_net.out_dim() != d || pair_net.out_dim() != d)
            throw Error(ErrorCode::Config, "CpcNets: projection output widths disagree");
        if (pair_net.in_dim() != 2 * d)
            throw Error(ErrorCode::Config, "CpcNets: pair net must take concatenated (h, h')");
        if (!(temperature > T(0)))
            throw Error(ErrorCode::Config, "CpcNets: temperature must be positive");
    }
};

template <class T>
struct CpcAdam {
    AdamState<T> state_net;
    AdamState<T> skill_net;
    AdamState<T> pair_net;

    static CpcAdam init(const CpcNets<T>& nets, AdamConfig cfg = {}) {
        return {AdamState<T>::init(nets.state_net, cfg), AdamState<T>::init(nets.skill_net, cfg),
                AdamState<T>::init(nets.pair_net, cfg)};
    }
};

/// Transition-pair embedding g_s(f(s), f(s')): the representation the
/// particle-entropy reward runs on.
template <class T>
Matrix<T> pair_embedding(const CpcNets<T>& nets, const Matrix<T>& states,
                         const Matrix<T>& next_states) {
    Matrix<T> h = forward(nets.state_net, states);
    Matrix<T> h2 = forward(nets.state_net, next_states);
    return forward(nets.pair_net, hcat(h, h2));
}

namespace detail {

/// Row-normalized copy; zero-norm rows stay zero (their cosines are defined
/// as 0). Norms are reported for the gradient path.
template <class T>
Matrix<T> normalized_rows(const Matrix<T>& m, std::vector<T>& norms) {
    Matrix<T> out(m.rows(), m.cols());
    norms.assign(m.rows(), T(0));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        T acc = T(0);
        auto row = m.row(i);
        for (T v : row) acc += v * v;
        const T norm = std::sqrt(acc);
        norms[i] = norm;
        if (norm == T(0)) continue;
        auto dst = out.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) dst[c] = row[c] / norm;
    }
    return out;
}

}  // namespace detail

/// Entry (i, j) = cos(skill_proj_i, pair_proj_j) / temperature. Diagonal
/// entries are the positive pairs.
template <class T>
Matrix<T> similarity_from_embeddings(const Matrix<T>& skill_proj, const Matrix<T>& pair_proj,
                                     T temperature) {
    if (skill_proj.rows() != pair_proj.rows() || skill_proj.cols() != pair_proj.cols())
        throw Error(ErrorCode::InvalidArgument, "similarity: embedding shapes disagree");
    std::vector<T> unorm, vnorm;
    Matrix<T> uhat = detail::normalized_rows(skill_proj, unorm);
    Matrix<T> vhat = detail::normalized_rows(pair_proj, vnorm);
    Matrix<T> sim = matmul_nt(uhat, vhat);
    for (std::size_t i = 0; i < sim.size(); ++i) sim.data()[i] /= temperature;
    return sim;
}

template <class T>
Matrix<T> similarity_matrix(const CpcNets<T>& nets, const Matrix<T>& states,
                            const Matrix<T>& next_states, const Matrix<T>& skills) {
    if (states.rows() < 2)
        throw Error(ErrorCode::InvalidArgument, "similarity_matrix: need at least two rows");
    Matrix<T> u = forward(nets.skill_net, skills);
    Matrix<T> v = pair_embedding(nets, states, next_states);
    return similarity_from_embeddings(u, v, nets.temperature);
}

/// Mean over rows of -log softmax(sim)[i, i], computed with row-max
/// subtraction. The diagonal holds the positive logits.
template <class T>
double nce_loss(const Matrix<T>& sim) {
    if (sim.rows() != sim.cols() || sim.rows() == 0)
        throw Error(ErrorCode::InvalidArgument, "nce_loss: similarity matrix must be square");
    if (!sim.all_finite()) throw Error(ErrorCode::Training, "nce_loss: non-finite similarity");
    const std::size_t n = sim.rows();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = sim.row(i);
        double mx = row[0];
        for (T v : row) mx = std::max(mx, static_cast<double>(v));
        double denom = 0.0;
        for (T v : row) denom += std::exp(static_cast<double>(v) - mx);
        loss += -(static_cast<double>(row[i]) - mx - std::log(denom));
    }
    return loss / static_cast<double>(n);
}

/// Loss plus parameter gradients for all three nets. Exposed separately from
/// cpc_update so gradient tests can check it against finite differences.
template <class T>
double cpc_loss_and_grads(const CpcNets<T>& nets, const Matrix<T>& states,
                          const Matrix<T>& next_states, const Matrix<T>& skills,
                          MlpGrads<T>& g_state, MlpGrads<T>& g_skill, MlpGrads<T>& g_pair) {
    const std::size_t n = states.rows();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "cpc: batch must hold at least two rows");
    if (next_states.rows() != n || skills.rows() != n)
        throw Error(ErrorCode::InvalidArgument, "cpc: batch row counts disagree");

    ForwardCache<T> cache_h, cache_h2, cache_u, cache_v;
    Matrix<T> h = forward(nets.state_net, states, &cache_h);
    Matrix<T> h2 = forward(nets.state_net, next_states, &cache_h2);
    Matrix<T> u = forward(nets.skill_net, skills, &cache_u);
    Matrix<T> v = forward(nets.pair_net, hcat(h, h2), &cache_v);

    const T omega = nets.temperature;
    std::vector<T> unorm, vnorm;
    Matrix<T> uhat = detail::normalized_rows(u, unorm);
    Matrix<T> vhat = detail::normalized_rows(v, vnorm);
    Matrix<T> cos = matmul_nt(uhat, vhat);
    Matrix<T> sim = cos;
    for (std::size_t i = 0; i < sim.size(); ++i) sim.data()[i] /= omega;
    const double loss = nce_loss(sim);

    // dLoss/dcos[i][j] = (softmax_row_i(j) - delta_ij) / (n * omega)
    const std::size_t d = u.cols();
    Matrix<T> gp(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = sim.row(i);
        double mx = row[0];
        for (T s : row) mx = std::max(mx, static_cast<double>(s));
        double denom = 0.0;
        for (T s : row) denom += std::exp(static_cast<double>(s) - mx);
        for (std::size_t j = 0; j < n; ++j) {
            const double p = std::exp(static_cast<double>(row[j]) - mx) / denom;
            gp(i, j) = static_cast<T>((p - (i == j ? 1.0 : 0.0)) /
                                      (static_cast<double>(n) * static_cast<double>(omega)));
        }
    }

    // Cosine backward in matrix form. With unit rows uhat/vhat and
    // C = uhat vhat^T:
    //   dU_i = (1/|u_i|) * ([gp vhat]_i - <gp_i, C_i> uhat_i)
    //   dV_j = (1/|v_j|) * ([gp^T uhat]_j - <gp_.j, C_.j> vhat_j)
    // Zero-norm rows keep zero gradient, matching cos(x, 0) = 0.
    std::vector<T> rowdot(n, T(0)), coldot(n, T(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const T w = gp(i, j) * cos(i, j);
            rowdot[i] += w;
            coldot[j] += w;
        }
    Matrix<T> du = matmul(gp, vhat);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = du.row(i);
        if (unorm[i] == T(0)) {
            std::fill(row.begin(), row.end(), T(0));
            continue;
        }
        for (std::size_t c = 0; c < d; ++c)
            row[c] = (row[c] - rowdot[i] * uhat(i, c)) / unorm[i];
    }
    Matrix<T> dv = matmul_tn(gp, uhat);
    for (std::size_t j = 0; j < n; ++j) {
        auto row = dv.row(j);
        if (vnorm[j] == T(0)) {
            std::fill(row.begin(), row.end(), T(0));
            continue;
        }
        for (std::size_t c = 0; c < d; ++c)
            row[c] = (row[c] - coldot[j] * vhat(j, c)) / vnorm[j];
    }

    backward(nets.skill_net, cache_u, du, g_skill);
    Matrix<T> dhh = backward(nets.pair_net, cache_v, dv, g_pair);
    Matrix<T> dh(n, d), dh2(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) {
            dh(i, c) = dhh(i, c);
            dh2(i, c) = dhh(i, c + d);
        }
    backward(nets.state_net, cache_h, dh, g_state);
    backward(nets.state_net, cache_h2, dh2, g_state);
    return loss;
}

/// One Adam step on all three nets against the NCE loss. Returns the
/// pre-update loss. Skills must be the ones stored with the transitions.
template <class T>
double cpc_update(CpcNets<T>& nets, const Matrix<T>& states, const Matrix<T>& next_states,
                  const Matrix<T>& skills, CpcAdam<T>& adam, double grad_clip = 0.0) {
    MlpGrads<T> g_state = MlpGrads<T>::zeros_like(nets.state_net);
    MlpGrads<T> g_skill = MlpGrads<T>::zeros_like(nets.skill_net);
    MlpGrads<T> g_pair = MlpGrads<T>::zeros_like(nets.pair_net);
    const double loss =
        cpc_loss_and_grads(nets, states, next_states, skills, g_state, g_skill, g_pair);
    clip_grad_norm(g_state, grad_clip);
    clip_grad_norm(g_skill, grad_clip);
    clip_grad_norm(g_pair, grad_clip);
    adam_step(nets.state_net, g_state, adam.state_net);
    adam_step(nets.skill_net, g_skill, adam.skill_net);
    adam_step(nets.pair_net, g_pair, adam.pair_net);
    return loss;
}

}  // namespace moss
