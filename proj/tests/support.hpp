#pragma once

// Test-only generators of random valid inputs. Everything here is written
// independently of the library's step functions so it can serve as an
// oracle input source.

#include "matchfield/types.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace matchfield::testing {

inline std::filesystem::path scenario_dir()
{
    return MATCHFIELD_SCENARIO_DIR;
}

/// Random symmetric distribution; some cells are zeroed.
inline Distribution random_distribution(int K, std::mt19937_64 &gen)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution zero(0.15);
    Distribution p(K);
    for (int k = 0; k < K; ++k) {
        for (int l = k; l < K; ++l) {
            const double w = zero(gen) ? 0.0 : u(gen);
            p.matched(k, l) = w;
            p.matched(l, k) = w;
        }
        p.unmatched(k) = zero(gen) ? 0.0 : u(gen);
    }
    double total = 0.0;
    for (double x : p.entries())
        total += x;
    if (total == 0.0) {
        p.unmatched(0) = 1.0;
        return p;
    }
    for (double &x : p.entries())
        x /= total;
    return p;
}

inline std::vector<double> random_simplex(int n, std::mt19937_64 &gen)
{
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (auto &x : w) {
        x = e(gen);
        total += x;
    }
    for (auto &x : w)
        x /= total;
    return w;
}

/// Random tables whose theta is consistent with post-mutation distribution
/// of p (the matched mass created for (k,l) and (l,k) agrees).
inline InputMatrices random_inputs(const Distribution &p, std::mt19937_64 &gen)
{
    const int K = p.types();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    InputMatrices m(K);
    for (int k = 0; k < K; ++k) {
        const auto row = random_simplex(K, gen);
        for (int j = 0; j < K; ++j)
            m.eta(k, j) = row[j];
    }

    // Unmatched mass after mutation, computed directly.
    std::vector<double> single(K, 0.0);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l)
            single[k] += p.unmatched(l) * m.eta(l, k);

    std::vector<double> a(static_cast<std::size_t>(K) * K);
    for (int k = 0; k < K; ++k)
        for (int l = k; l < K; ++l)
            a[k * K + l] = a[l * K + k] = u(gen);
    double scale = 1e300;
    for (int k = 0; k < K; ++k) {
        double row = 0.0;
        for (int l = 0; l < K; ++l)
            row += a[k * K + l];
        scale = std::min(scale, single[k] / row);
    }
    scale *= u(gen);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l)
            m.theta(k, l) = single[k] > 0.0 ? a[k * K + l] * scale / single[k] : 0.0;
    m.recompute_b();

    for (int k = 0; k < K; ++k)
        for (int l = k; l < K; ++l) {
            const double x = u(gen);
            m.xi(k, l) = x;
            m.xi(l, k) = x;
            const auto joint = random_simplex(K * K, gen);
            for (int k2 = 0; k2 < K; ++k2)
                for (int l2 = 0; l2 < K; ++l2) {
                    double s = joint[k2 * K + l2];
                    if (k == l)
                        s = 0.5 * (joint[k2 * K + l2] + joint[l2 * K + k2]);
                    m.sigma(k, l, k2, l2) = s;
                    m.sigma(l, k, l2, k2) = s;
                }
        }
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            const auto row = random_simplex(K, gen);
            for (int k2 = 0; k2 < K; ++k2)
                m.varsigma(k, l, k2) = row[k2];
        }
    return m;
}

} // namespace matchfield::testing
