#pragma once

#include <cmath>
#include <stdexcept>

#include "fpkit/operator.hpp"
#include "fpkit/rng.hpp"

namespace fpkit::rof {

/// Grayscale image, row-major, values nominally in [0,1].
struct Image {
    long rows = 0;
    long cols = 0;
    Vec pix;

    Image() = default;
    Image(long r, long c) : rows(r), cols(c), pix(r * c, 0.0) {}
    double& at(long i, long j) { return pix[i * cols + j]; }
    double at(long i, long j) const { return pix[i * cols + j]; }
};

/// Forward-difference gradient with Neumann boundary: the last row/column
/// difference is zero. gx is the horizontal component, gy the vertical one.
inline void grad2d(const Vec& u, long m, long n, Vec& gx, Vec& gy) {
    if (m < 2 || n < 2) throw std::invalid_argument("grad2d: image must be at least 2x2");
    if (static_cast<long>(u.size()) != m * n) throw std::invalid_argument("grad2d: shape mismatch");
    gx.assign(m * n, 0.0);
    gy.assign(m * n, 0.0);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) {
            long k = i * n + j;
            if (j < n - 1) gx[k] = u[k + 1] - u[k];
            if (i < m - 1) gy[k] = u[k + n] - u[k];
        }
}

/// Backward divergence, the negative adjoint of grad2d:
/// <grad u, p> = -<u, div p> exactly (up to rounding).
inline void div2d(const Vec& p1, const Vec& p2, long m, long n, Vec& out) {
    if (static_cast<long>(p1.size()) != m * n || static_cast<long>(p2.size()) != m * n)
        throw std::invalid_argument("div2d: shape mismatch");
    out.assign(m * n, 0.0);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) {
            long k = i * n + j;
            double dx = 0.0, dy = 0.0;
            if (j == 0)
                dx = p1[k];
            else if (j == n - 1)
                dx = -p1[k - 1];
            else
                dx = p1[k] - p1[k - 1];
            if (i == 0)
                dy = p2[k];
            else if (i == m - 1)
                dy = -p2[k - n];
            else
                dy = p2[k] - p2[k - n];
            out[k] = dx + dy;
        }
}

struct Spec {
    Image noisy;       // f
    double lambda = 0.1;
    double tau = 0.2;
    double sigma = 0.2;
    double theta = 1.0;
};

inline void validate(const Spec& s) {
    if (s.noisy.rows < 2 || s.noisy.cols < 2)
        throw std::invalid_argument("rof: image must be at least 2x2");
    if (!(s.lambda > 0.0) || !(s.tau > 0.0) || !(s.sigma > 0.0))
        throw std::invalid_argument("rof: lambda, tau, sigma must be positive");
}

/// State layout of the primal-dual pair (u, p): [u(mn), p1(mn), p2(mn)].
inline std::size_t state_dim(const Spec& s) { return 3 * s.noisy.rows * s.noisy.cols; }

inline Vec initial_state(const Spec& s) {
    std::size_t mn = s.noisy.rows * s.noisy.cols;
    Vec z(3 * mn, 0.0);
    std::copy(s.noisy.pix.begin(), s.noisy.pix.end(), z.begin());
    return z;
}

/// The primal-dual operator whose Krasnoselskii-Mann(1/2) iteration is the
/// Chambolle-Pock update for the ROF dual:
///   u' = (u + tau div p + tau f) / (1 + tau),  ubar = u' + theta (u' - u)
///   F(u, p) = (2u' - u, 2 clamp_inf(p + sigma grad ubar, lambda) - p)
inline Operator build(const Spec& spec) {
    validate(spec);
    const long m = spec.noisy.rows, n = spec.noisy.cols;
    const std::size_t mn = m * n;
    const Vec f = spec.noisy.pix;
    const double tau = spec.tau, sigma = spec.sigma, lambda = spec.lambda, theta = spec.theta;

    auto eval = [m, n, mn, f, tau, sigma, lambda, theta](const Vec& z) {
        Vec u(z.begin(), z.begin() + mn);
        Vec p1(z.begin() + mn, z.begin() + 2 * mn);
        Vec p2(z.begin() + 2 * mn, z.end());

        Vec divp;
        div2d(p1, p2, m, n, divp);
        Vec uprime(mn), ubar(mn);
        for (std::size_t k = 0; k < mn; ++k) {
            uprime[k] = (u[k] + tau * divp[k] + tau * f[k]) / (1.0 + tau);
            ubar[k] = uprime[k] + theta * (uprime[k] - u[k]);
        }
        Vec gx, gy;
        grad2d(ubar, m, n, gx, gy);

        Vec out(3 * mn);
        for (std::size_t k = 0; k < mn; ++k) out[k] = 2.0 * uprime[k] - u[k];
        for (std::size_t k = 0; k < mn; ++k) {
            double q = p1[k] + sigma * gx[k];
            q = std::min(lambda, std::max(-lambda, q));
            out[mn + k] = 2.0 * q - p1[k];
        }
        for (std::size_t k = 0; k < mn; ++k) {
            double q = p2[k] + sigma * gy[k];
            q = std::min(lambda, std::max(-lambda, q));
            out[2 * mn + k] = 2.0 * q - p2[k];
        }
        return out;
    };
    return make_operator(Domain::all_space(3 * mn), eval, "chambolle_pock");
}

/// ROF objective 0.5 ||u-f||^2 + lambda ||grad u||_1 (anisotropic TV),
/// reported alongside the fixed-point residual for reference.
inline double energy(const Spec& spec, const Vec& state) {
    const long m = spec.noisy.rows, n = spec.noisy.cols;
    const std::size_t mn = m * n;
    Vec u(state.begin(), state.begin() + mn);
    double fit = 0.0;
    for (std::size_t k = 0; k < mn; ++k) {
        double d = u[k] - spec.noisy.pix[k];
        fit += d * d;
    }
    Vec gx, gy;
    grad2d(u, m, n, gx, gy);
    double tv = 0.0;
    for (std::size_t k = 0; k < mn; ++k) tv += std::fabs(gx[k]) + std::fabs(gy[k]);
    return 0.5 * fit + spec.lambda * tv;
}

/// Checkerboard-plus-ramp test pattern in [0,1].
inline Image synthetic_image(long rows, long cols, long tile = 8) {
    Image img(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            double cb = static_cast<double>(((i / tile) + (j / tile)) % 2);
            double ramp = cols > 1 ? static_cast<double>(j) / static_cast<double>(cols - 1) : 0.0;
            img.at(i, j) = 0.5 * cb + 0.5 * ramp;
        }
    return img;
}

/// Additive Gaussian noise; values are not clipped back to [0,1].
inline void add_gaussian_noise(Image& img, double stddev, Rng& rng) {
    for (double& v : img.pix) v += stddev * rng.normal();
}

}  // namespace fpkit::rof
