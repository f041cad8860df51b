#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "moss/matrix.hpp"

namespace moss {

namespace detail {

/// Pairwise squared Euclidean distances, full [N x N] with zero diagonal.
/// Each pair's sum runs component-by-component in index order; the blocked
/// layout only batches independent pairs for vectorization, so with
/// contraction disabled (-ffp-contract=off, set project-wide) every value
/// matches a plain scalar loop bit-for-bit, which is what the exhaustive
/// test oracle computes.
template <class T>
std::vector<T> squared_distances(const Matrix<T>& points) {
    const std::size_t n = points.rows(), d = points.cols();
    // Column-major copy so one component of a block of points is contiguous.
    std::vector<T> by_component(n * d);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < d; ++c) by_component[c * n + j] = points(j, c);

    constexpr std::size_t kBlock = 16;
    std::vector<T> dist(n * n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
        const T* pi = points.data() + i * d;
        T* out = dist.data() + i * n;
        std::size_t j = 0;
        for (; j + kBlock <= n; j += kBlock) {
            T acc[kBlock] = {};
            for (std::size_t c = 0; c < d; ++c) {
                const T x = pi[c];
                const T* col = by_component.data() + c * n + j;
                for (std::size_t b = 0; b < kBlock; ++b) {
                    const T diff = x - col[b];
                    acc[b] += diff * diff;
                }
            }
            for (std::size_t b = 0; b < kBlock; ++b) out[j + b] = acc[b];
        }
        for (; j < n; ++j) {
            const T* pj = points.data() + j * d;
            T acc = T(0);
            for (std::size_t c = 0; c < d; ++c) {
                const T diff = pi[c] - pj[c];
                acc += diff * diff;
            }
            out[j] = acc;
        }
        out[i] = T(0);
    }
    return dist;
}

struct NeighborLess {
    template <class P>
    bool operator()(const P& a, const P& b) const {
        return a.first < b.first || (a.first == b.first && a.second < b.second);
    }
};

/// The k nearest (distance, index) pairs of row i in ascending order,
/// selected with a bounded max-heap under the same total order the test
/// oracle's full sort uses.
template <class T>
void select_k_neighbors(const T* row, std::size_t n, std::size_t i, std::size_t k,
                        std::vector<std::pair<T, std::uint32_t>>& out) {
    const NeighborLess less;
    out.clear();
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::pair<T, std::uint32_t> cand{row[j], static_cast<std::uint32_t>(j)};
        if (out.size() < k) {
            out.push_back(cand);
            std::push_heap(out.begin(), out.end(), less);
        } else if (less(cand, out.front())) {
            std::pop_heap(out.begin(), out.end(), less);
            out.back() = cand;
            std::push_heap(out.begin(), out.end(), less);
        }
    }
    std::sort(out.begin(), out.end(), less);
}

}  // namespace detail

/// Mean distance to the k nearest neighbors of each row (self excluded).
/// Ties are broken by original row index, so results are exactly reproducible
/// by an exhaustive sort over all pairs.
template <class T>
std::vector<T> knn_radii(const Matrix<T>& embeddings, std::size_t k) {
    const std::size_t n = embeddings.rows();
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "knn_radii: k must be positive");
    if (n <= k)
        throw Error(ErrorCode::InvalidArgument, "knn_radii: batch must hold more than k rows");

    const std::vector<T> d2 = detail::squared_distances(embeddings);
    std::vector<T> radii(n);
    std::vector<std::pair<T, std::uint32_t>> nearest;
    nearest.reserve(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        detail::select_k_neighbors(d2.data() + i * n, n, i, k, nearest);
        T sum = T(0);
        for (std::size_t r = 0; r < k; ++r) sum += std::sqrt(nearest[r].first);
        radii[i] = sum / static_cast<T>(k);
    }
    return radii;
}

/// Signed particle reward: log(c + radius) for the maximization mode (m = 0),
/// its exact negation for the minimization mode (m = 1).
template <class T>
std::vector<T> intrinsic_reward(std::span<const T> radii, int mode, T c = T(1)) {
    if (mode != 0 && mode != 1)
        throw Error(ErrorCode::InvalidArgument, "intrinsic_reward: mode must be 0 or 1");
    if (c <= T(0)) throw Error(ErrorCode::InvalidArgument, "intrinsic_reward: c must be positive");
    std::vector<T> rewards(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < T(0))
            throw Error(ErrorCode::Internal, "intrinsic_reward: negative radius");
        const T r = std::log(c + radii[i]);
        rewards[i] = (mode == 0) ? r : -r;
    }
    return rewards;
}

/// Monte Carlo entropy estimate from exact k-th neighbor distances, up to the
/// estimator's additive constant:
///   H = log N - log k + log V_d + (d/N) * sum_i log R_k(i)
/// with V_d the unit-ball volume, evaluated in log space. Diagnostic only;
/// the training reward uses knn_radii/intrinsic_reward instead.
template <class T>
double kl_entropy_estimate(const Matrix<T>& embeddings, std::size_t k) {
    static constexpr double kZeroRadiusFloor = 1e-12;
    const std::size_t n = embeddings.rows(), d = embeddings.cols();
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "kl_entropy_estimate: empty dimension");
    if (k == 0 || n <= k)
        throw Error(ErrorCode::InvalidArgument, "kl_entropy_estimate: need more than k rows");

    const std::vector<T> d2 = detail::squared_distances(embeddings);
    std::vector<std::pair<T, std::uint32_t>> nearest;
    nearest.reserve(k + 1);
    double log_radius_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        detail::select_k_neighbors(d2.data() + i * n, n, i, k, nearest);
        const double rk = std::sqrt(static_cast<double>(nearest[k - 1].first));
        log_radius_sum += std::log(std::max(rk, kZeroRadiusFloor));
    }
    const double dd = static_cast<double>(d);
    const double log_unit_ball =
        0.5 * dd * std::log(3.14159265358979323846) - std::lgamma(0.5 * dd + 1.0);
    return std::log(static_cast<double>(n)) - std::log(static_cast<double>(k)) + log_unit_ball +
           dd / static_cast<double>(n) * log_radius_sum;
}

}  // namespace moss
