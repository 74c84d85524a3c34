#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "euler2d/errors.hpp"
#include "euler2d/fft.hpp"
#include "euler2d/grid.hpp"

namespace euler2d {

/// Periodic pseudo-spectral vorticity solver on [-L, L)^2. Realizes the
/// exact-smooth-solution route at nu = 0 and the vanishing-viscosity route
/// at nu > 0. Coefficients are Fourier-series normalized (DFT / n^2) and
/// kept 2/3-dealiased at all times.
struct SpectralState {
    double L = 3.0;
    int n = 0;
    double nu = 0.0;
    double t = 0.0;
    std::vector<std::complex<double>> what; // n*n, row-major, x index fastest

    GridSpec grid() const { return GridSpec::centered_square(L, n); }

    /// Signed integer mode for array index m in [0, n).
    int signed_mode(int m) const { return m < n / 2 ? m : m - n; }

    /// Physical wavenumber component for array index m.
    double wavenumber(int m) const { return kPiOverL() * signed_mode(m); }

    double kPiOverL() const { return 3.14159265358979323846 / L; }

    bool mode_masked(int mx, int my) const {
        const int sx = std::abs(signed_mode(mx));
        const int sy = std::abs(signed_mode(my));
        const int cut = n / 3;
        return sx > cut || sy > cut;
    }
};

namespace spectral_detail {

inline void apply_dealias(SpectralState& s) {
    for (int my = 0; my < s.n; ++my)
        for (int mx = 0; mx < s.n; ++mx)
            if (s.mode_masked(mx, my)) s.what[static_cast<std::size_t>(my) * s.n + mx] = 0.0;
}

/// Velocity coefficients from vorticity: psi_hat = -w_hat/|k|^2, u = grad_perp psi.
inline void velocity_hat(const SpectralState& s, std::vector<std::complex<double>>& u1,
                         std::vector<std::complex<double>>& u2) {
    const int n = s.n;
    u1.assign(static_cast<std::size_t>(n) * n, 0.0);
    u2.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int my = 0; my < n; ++my) {
        const double ky = s.wavenumber(my);
        for (int mx = 0; mx < n; ++mx) {
            const double kx = s.wavenumber(mx);
            const double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) continue;
            const std::size_t p = static_cast<std::size_t>(my) * n + mx;
            const std::complex<double> w = s.what[p];
            u1[p] = std::complex<double>(0.0, ky / k2) * w;
            u2[p] = std::complex<double>(0.0, -kx / k2) * w;
        }
    }
}

/// Dealiased nonlinear term N(w_hat) = -(u . grad w)_hat, with the mean mode
/// pinned to zero so the vorticity mean is exactly conserved.
inline std::vector<std::complex<double>> nonlinear_term(const SpectralState& s, const Fft& fft,
                                                        double* max_speed_out = nullptr) {
    const int n = s.n;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const double nn_d = static_cast<double>(nn);
    std::vector<std::complex<double>> u1, u2, w1(nn), w2(nn);
    velocity_hat(s, u1, u2);
    for (int my = 0; my < n; ++my) {
        const double ky = s.wavenumber(my);
        for (int mx = 0; mx < n; ++mx) {
            const double kx = s.wavenumber(mx);
            const std::size_t p = static_cast<std::size_t>(my) * n + mx;
            // Scale by n^2 so the normalized inverse below lands on physical values.
            w1[p] = std::complex<double>(0.0, kx) * s.what[p] * nn_d;
            w2[p] = std::complex<double>(0.0, ky) * s.what[p] * nn_d;
            u1[p] *= nn_d;
            u2[p] *= nn_d;
        }
    }
    fft2d(fft, u1.data(), false);
    fft2d(fft, u2.data(), false);
    fft2d(fft, w1.data(), false);
    fft2d(fft, w2.data(), false);
    double umax = 0.0;
    std::vector<std::complex<double>> nl(nn);
    for (std::size_t p = 0; p < nn; ++p) {
        const double a = u1[p].real(), b = u2[p].real();
        nl[p] = {-(a * w1[p].real() + b * w2[p].real()), 0.0};
        const double sp = a * a + b * b;
        if (sp > umax) umax = sp;
    }
    if (max_speed_out) *max_speed_out = std::sqrt(umax);
    fft2d(fft, nl.data(), true);
    const double scale = 1.0 / nn_d;
    for (int my = 0; my < n; ++my)
        for (int mx = 0; mx < n; ++mx) {
            const std::size_t p = static_cast<std::size_t>(my) * n + mx;
            nl[p] = s.mode_masked(mx, my) ? 0.0 : nl[p] * scale;
        }
    nl[0] = 0.0;
    return nl;
}

} // namespace spectral_detail

/// Kinetic energy (1/2) int |u|^2 via Parseval: (1/2) (2L)^2 sum |w_k|^2/|k|^2.
inline double kinetic_energy(const SpectralState& s) {
    const int n = s.n;
    double acc = 0.0;
    for (int my = 0; my < n; ++my) {
        const double ky = s.wavenumber(my);
        for (int mx = 0; mx < n; ++mx) {
            const double kx = s.wavenumber(mx);
            const double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) continue;
            acc += std::norm(s.what[static_cast<std::size_t>(my) * n + mx]) / k2;
        }
    }
    const double box = 2.0 * s.L;
    return 0.5 * box * box * acc;
}

/// nu ||omega||_{L^2}^2 in Parseval form: nu (2L)^2 sum |w_k|^2. This is the
/// exact dissipation rate of the kinetic energy for periodic flow.
inline double viscous_dissipation_rate(const SpectralState& s) {
    double acc = 0.0;
    for (const auto& c : s.what) acc += std::norm(c);
    const double box = 2.0 * s.L;
    return s.nu * box * box * acc;
}

/// Enstrophy int omega^2 (Parseval).
inline double enstrophy(const SpectralState& s) {
    double acc = 0.0;
    for (const auto& c : s.what) acc += std::norm(c);
    const double box = 2.0 * s.L;
    return box * box * acc;
}

/// Mean vorticity int omega dx = (2L)^2 w_hat(0,0).
inline double spectral_mean_vorticity(const SpectralState& s) {
    const double box = 2.0 * s.L;
    return box * box * s.what[0].real();
}

/// Physical-space vorticity on the solver grid.
inline ScalarField vorticity_field(const SpectralState& s, const Fft& fft) {
    std::vector<std::complex<double>> buf = s.what;
    // Inverse Fourier series: multiply by n^2 then inverse FFT (1/n^2) = plain
    // unnormalized inverse; do it via forward-style loop for clarity.
    const std::size_t nn = buf.size();
    for (auto& c : buf) c *= static_cast<double>(nn);
    fft2d(fft, buf.data(), false);
    ScalarField f(s.grid(), s.t);
    for (std::size_t p = 0; p < nn; ++p) f.data[p] = buf[p].real();
    return f;
}

/// Physical-space velocity on the solver grid; spectrally divergence-free.
inline VectorField spectral_velocity(const SpectralState& s, const Fft& fft) {
    std::vector<std::complex<double>> u1, u2;
    spectral_detail::velocity_hat(s, u1, u2);
    const std::size_t nn = u1.size();
    for (std::size_t p = 0; p < nn; ++p) {
        u1[p] *= static_cast<double>(nn);
        u2[p] *= static_cast<double>(nn);
    }
    fft2d(fft, u1.data(), false);
    fft2d(fft, u2.data(), false);
    VectorField f(s.grid(), s.t);
    for (std::size_t p = 0; p < nn; ++p) {
        f.data[2 * p] = u1[p].real();
        f.data[2 * p + 1] = u2[p].real();
    }
    return f;
}

inline double max_speed(const SpectralState& s, const Fft& fft) {
    const VectorField u = spectral_velocity(s, fft);
    return u.max_abs();
}

/// Initialize from a pointwise initial-vorticity functor. The data is
/// mollified spectrally with a Gaussian filter of width delta (no-op when
/// delta = 0) and dealiased. When check_support is set, enforces the box
/// policy L >= 4 x (support radius at the 1e-6 relative level).
inline SpectralState init_spectral(const std::function<double(Vec2)>& omega0, double L, int n,
                                   double nu, double delta = 0.0, bool check_support = true) {
    if (n < 4 || (n & (n - 1)) != 0)
        throw ConfigError("init_spectral: n must be a power of two >= 4");
    SpectralState s;
    s.L = L;
    s.n = n;
    s.nu = nu;
    s.t = 0.0;
    const GridSpec g = s.grid();
    std::vector<std::complex<double>> buf(g.size());
    double vmax = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double v = omega0(g.node(i, j));
            buf[g.index(i, j)] = {v, 0.0};
            vmax = std::max(vmax, std::abs(v));
        }
    if (check_support && vmax > 0.0) {
        double rs = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (std::abs(buf[g.index(i, j)].real()) > 1e-6 * vmax)
                    rs = std::max(rs, g.node(i, j).norm());
        if (L < 4.0 * rs)
            throw ConfigError("init_spectral: box half-width " + fmt_double(L) +
                              " violates L >= 4 x support radius (" + fmt_double(rs) + ")");
    }
    Fft fft(n);
    fft2d(fft, buf.data(), true);
    const double scale = 1.0 / static_cast<double>(g.size());
    s.what.resize(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) s.what[p] = buf[p] * scale;
    if (delta > 0.0) {
        for (int my = 0; my < n; ++my) {
            const double ky = s.wavenumber(my);
            for (int mx = 0; mx < n; ++mx) {
                const double kx = s.wavenumber(mx);
                const double k2 = kx * kx + ky * ky;
                s.what[static_cast<std::size_t>(my) * n + mx] *=
                    std::exp(-0.25 * k2 * delta * delta);
            }
        }
    }
    spectral_detail::apply_dealias(s);
    return s;
}

/// One integrating-factor RK4 step: the nonlinear term is advanced by RK4
/// while diffusion is integrated exactly by exp(-nu |k|^2 dt) factors.
/// Throws SolverError if dt violates the advective CFL 0.5 dx / max|u|.
inline void step_spectral(SpectralState& s, double dt, const Fft& fft) {
    if (!(dt > 0.0)) throw ConfigError("step_spectral: dt must be positive");
    const int n = s.n;
    const std::size_t nn = static_cast<std::size_t>(n) * n;

    double umax = 0.0;
    auto k1 = spectral_detail::nonlinear_term(s, fft, &umax);
    const double dx = 2.0 * s.L / n;
    if (umax > 0.0 && dt > 0.5 * dx / umax)
        throw SolverError("step_spectral: CFL violation, dt=" + fmt_double(dt) +
                          " exceeds " + fmt_double(0.5 * dx / umax));

    // Integrating factors.
    std::vector<double> e_full(nn), e_half(nn);
    for (int my = 0; my < n; ++my) {
        const double ky = s.wavenumber(my);
        for (int mx = 0; mx < n; ++mx) {
            const double kx = s.wavenumber(mx);
            const double k2 = kx * kx + ky * ky;
            const std::size_t p = static_cast<std::size_t>(my) * n + mx;
            e_half[p] = std::exp(-0.5 * s.nu * k2 * dt);
            e_full[p] = e_half[p] * e_half[p];
        }
    }

    SpectralState stage = s;
    const auto w0 = s.what;

    for (std::size_t p = 0; p < nn; ++p)
        stage.what[p] = (w0[p] + 0.5 * dt * k1[p]) * e_half[p];
    auto k2v = spectral_detail::nonlinear_term(stage, fft);

    for (std::size_t p = 0; p < nn; ++p) stage.what[p] = w0[p] * e_half[p] + 0.5 * dt * k2v[p];
    auto k3 = spectral_detail::nonlinear_term(stage, fft);

    for (std::size_t p = 0; p < nn; ++p)
        stage.what[p] = w0[p] * e_full[p] + dt * e_half[p] * k3[p];
    auto k4 = spectral_detail::nonlinear_term(stage, fft);

    for (std::size_t p = 0; p < nn; ++p) {
        s.what[p] = w0[p] * e_full[p] +
                    (dt / 6.0) * (e_full[p] * k1[p] + 2.0 * e_half[p] * (k2v[p] + k3[p]) + k4[p]);
    }
    spectral_detail::apply_dealias(s);
    s.t += dt;
}

} // namespace euler2d
