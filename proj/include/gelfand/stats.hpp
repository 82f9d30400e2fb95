// Deterministic reductions and a minimal parallel map.
#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace gelfand {

/// Pairwise (cascade) summation in index order. The result depends only on
/// the input sequence, never on how it was produced.
template <typename T>
T pairwise_sum(std::span<const T> xs) {
    if (xs.size() <= 16) {
        T s{};
        for (const T& x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanSE {
    double mean = 0.0;
    double std_err = 0.0;
};

struct ComplexMeanSE {
    std::complex<double> mean;
    double std_err_re = 0.0;
    double std_err_im = 0.0;

    /// Standard error of the complex mean, sqrt(se_re^2 + se_im^2).
    double std_err() const { return std::hypot(std_err_re, std_err_im); }
};

inline MeanSE mean_se(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_se: empty sample");
    const double n = static_cast<double>(xs.size());
    const double m = pairwise_sum(xs) / n;
    if (xs.size() < 2) return {m, 0.0};
    std::vector<double> sq(xs.size());
    std::transform(xs.begin(), xs.end(), sq.begin(), [m](double x) { return (x - m) * (x - m); });
    const double var = pairwise_sum(std::span<const double>(sq)) / (n - 1.0);
    return {m, std::sqrt(var / n)};
}

inline ComplexMeanSE mean_se(std::span<const std::complex<double>> zs) {
    std::vector<double> re(zs.size()), im(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) {
        re[i] = zs[i].real();
        im[i] = zs[i].imag();
    }
    const MeanSE r = mean_se(std::span<const double>(re));
    const MeanSE i = mean_se(std::span<const double>(im));
    return {{r.mean, i.mean}, r.std_err, i.std_err};
}

inline unsigned resolve_threads(unsigned threads) {
    if (threads != 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = fn(i) for i in [0, n), evaluated on `threads` workers
/// (0 = hardware concurrency). Each index is computed exactly once and
/// stored by index, so results do not depend on the worker count.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn&& fn) {
    std::vector<T> out(n);
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

} // namespace gelfand
