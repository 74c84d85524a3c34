#include "euler2d/kernel.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace euler2d;
using testutil::Rng;

namespace {

/// Oracle: (K * phi_eps)(x) by 2D quadrature in polar coordinates around the
/// singularity, where K(x-y) rho dy reduces to a smooth integrand:
///   (K*phi)(x) = -1/(2 pi) int_0^{2pi} int_0^R e_perp(th) phi(x + r e(th)) dr dth.
Vec2 convolution_oracle(const Vec2& x, double eps, const BlobProfile& prof) {
    const double rmax = x.norm() + eps * prof.far_radius_factor() + 1.0;
    const int nth = 2048;
    const int nr_panels = 128;
    Vec2 acc{0.0, 0.0};
    for (int it = 0; it < nth; ++it) {
        const double th = kTwoPi * it / nth;
        const Vec2 e{std::cos(th), std::sin(th)};
        const Vec2 ep = e.perp();
        const double radial = testutil::gauss_integrate(
            [&](double r) { return prof.density((x + r * e).norm(), eps); }, 0.0, rmax,
            nr_panels);
        acc += ep * radial;
    }
    return acc * (-1.0 / (2.0 * kPi)) * (kTwoPi / nth);
}

} // namespace

TEST(BiotSavart, ClosedFormExamples) {
    const Vec2 a = biot_savart({1.0, 0.0});
    EXPECT_DOUBLE_EQ(a.x, 0.0);
    EXPECT_NEAR(a.y, 1.0 / kTwoPi, 1e-15);
    EXPECT_NEAR(a.y, 0.1591549, 1e-7);

    const Vec2 b = biot_savart({0.0, 2.0});
    EXPECT_NEAR(b.x, -1.0 / (4.0 * kPi), 1e-15);
    EXPECT_NEAR(b.x, -0.0795775, 1e-7);
    EXPECT_DOUBLE_EQ(b.y, 0.0);
}

TEST(BiotSavart, AntisymmetryExactAndMagnitude) {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const Vec2 x = rng.point(-10.0, 10.0);
        if (x.norm() < 1e-6) continue;
        const Vec2 k = biot_savart(x);
        const Vec2 km = biot_savart(-x);
        // Exact IEEE antisymmetry: all intermediates are sign-symmetric.
        EXPECT_EQ(k.x, -km.x);
        EXPECT_EQ(k.y, -km.y);
        EXPECT_NEAR(k.norm(), 1.0 / (kTwoPi * x.norm()), 1e-13 / x.norm());
        // Orthogonal to x (perp structure).
        EXPECT_NEAR(k.dot(x), 0.0, 1e-15 * (1.0 + x.norm()));
    }
}

TEST(BiotSavart, OriginIsDomainError) {
    EXPECT_THROW(biot_savart({0.0, 0.0}), DomainError);
    EXPECT_THROW(biot_savart({1e-310, 0.0}), DomainError);
    EXPECT_NO_THROW(biot_savart({1e-290, 0.0}));
}

TEST(BiotSavart, GradientMatchesFiniteDifferences) {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        Vec2 x = rng.point(-3.0, 3.0);
        if (x.norm() < 0.3) x = x + Vec2{0.5, 0.5};
        const double d = 1e-6;
        const Mat2 g = biot_savart_grad(x);
        const Vec2 fx = (biot_savart({x.x + d, x.y}) - biot_savart({x.x - d, x.y})) / (2 * d);
        const Vec2 fy = (biot_savart({x.x, x.y + d}) - biot_savart({x.x, x.y - d})) / (2 * d);
        EXPECT_NEAR(g.a11, fx.x, 1e-7);
        EXPECT_NEAR(g.a21, fx.y, 1e-7);
        EXPECT_NEAR(g.a12, fy.x, 1e-7);
        EXPECT_NEAR(g.a22, fy.y, 1e-7);
        // Divergence-free: d1 K1 + d2 K2 = 0 analytically.
        EXPECT_NEAR(g.a11 + g.a22, 0.0, 1e-14 / x.norm2());
    }
}

TEST(BiotSavart, HessianMatchesFiniteDifferencesAndHarmonicity) {
    Rng rng(13);
    for (int i = 0; i < 30; ++i) {
        Vec2 x = rng.point(-3.0, 3.0);
        if (x.norm() < 0.5) x = x + Vec2{1.0, 1.0};
        const auto h = biot_savart_hess(x);
        const double d = 1e-5;
        for (int comp = 0; comp < 2; ++comp) {
            auto ki = [&](const Vec2& p) {
                const Vec2 k = biot_savart(p);
                return comp == 0 ? k.x : k.y;
            };
            const double dxx =
                (ki({x.x + d, x.y}) - 2 * ki(x) + ki({x.x - d, x.y})) / (d * d);
            const double dyy =
                (ki({x.x, x.y + d}) - 2 * ki(x) + ki({x.x, x.y - d})) / (d * d);
            const double dxy = (ki({x.x + d, x.y + d}) - ki({x.x + d, x.y - d}) -
                                ki({x.x - d, x.y + d}) + ki({x.x - d, x.y - d})) /
                               (4 * d * d);
            EXPECT_NEAR(h[comp].a11, dxx, 2e-4);
            EXPECT_NEAR(h[comp].a22, dyy, 2e-4);
            EXPECT_NEAR(h[comp].a12, dxy, 2e-4);
            EXPECT_NEAR(h[comp].a12, h[comp].a21, 1e-14);
            // K is harmonic away from the origin.
            EXPECT_NEAR(h[comp].a11 + h[comp].a22, 0.0, 1e-12);
        }
    }
}

TEST(BlobProfile, UnitMassByQuadrature) {
    for (ProfileKind kind : {ProfileKind::gaussian, ProfileKind::bump}) {
        BlobProfile prof{kind};
        const double eps = 0.7;
        const double rmax = eps * prof.far_radius_factor() + 0.5;
        const double mass = testutil::gauss_integrate(
            [&](double r) { return kTwoPi * r * prof.density(r, eps); }, 0.0, rmax, 160);
        EXPECT_NEAR(mass, 1.0, 1e-10) << to_string(kind);
    }
}

TEST(BlobProfile, BumpNormalizationConstant) {
    // c = 1 / (2 pi int_0^1 exp(-1/(1-s^2)) s ds); the radial integral is
    // 0.07424775338796102, giving c = 2.1435657757922366.
    BlobProfile bump{ProfileKind::bump};
    EXPECT_NEAR(bump.normalization(), 2.1435657757922366, 1e-9);
}

TEST(BlobProfile, EnclosedMassMatchesQuadrature) {
    for (ProfileKind kind : {ProfileKind::gaussian, ProfileKind::bump}) {
        BlobProfile prof{kind};
        for (double rho : {0.1, 0.25, 0.5, 0.9, 1.3}) {
            const double direct = testutil::gauss_integrate(
                [&](double r) { return kTwoPi * r * prof.density(r, 1.0); }, 0.0, rho, 128);
            EXPECT_NEAR(prof.enclosed_mass(rho), direct, 1e-9)
                << to_string(kind) << " rho=" << rho;
        }
        EXPECT_DOUBLE_EQ(prof.enclosed_mass(0.0), 0.0);
    }
}

TEST(BlobProfile, DensityDerivMatchesFiniteDifference) {
    for (ProfileKind kind : {ProfileKind::gaussian, ProfileKind::bump}) {
        BlobProfile prof{kind};
        const double eps = 0.4;
        for (double r : {0.05, 0.1, 0.2, 0.3, 0.35}) {
            const double d = 1e-6;
            const double fd = (prof.density(r + d, eps) - prof.density(r - d, eps)) / (2 * d);
            EXPECT_NEAR(prof.density_deriv(r, eps), fd, 1e-4) << to_string(kind);
        }
    }
}

TEST(MollifiedKernel, ZeroAtOriginAndOddSymmetry) {
    BlobProfile prof;
    const Vec2 z = mollified_kernel({0.0, 0.0}, 0.3, prof);
    EXPECT_EQ(z.x, 0.0);
    EXPECT_EQ(z.y, 0.0);
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 x = rng.point(-2.0, 2.0);
        const Vec2 a = mollified_kernel(x, 0.3, prof);
        const Vec2 b = mollified_kernel(-x, 0.3, prof);
        EXPECT_EQ(a.x, -b.x);
        EXPECT_EQ(a.y, -b.y);
    }
}

TEST(MollifiedKernel, GaussianEnclosedMassFactor) {
    BlobProfile prof;
    const double eps = 0.25;
    const Vec2 x{eps, 0.0}; // |x| = eps
    const Vec2 ke = mollified_kernel(x, eps, prof);
    const Vec2 k = biot_savart(x);
    const double factor = 1.0 - std::exp(-1.0);
    EXPECT_NEAR(ke.y / k.y, factor, 1e-12);
    EXPECT_NEAR(factor, 0.6321206, 1e-7);

    // Far field: relative deviation from K below 1e-40 at |x| = 10 eps.
    const Vec2 xf{10.0 * eps, 0.0};
    const Vec2 kf = mollified_kernel(xf, eps, prof);
    const Vec2 kk = biot_savart(xf);
    EXPECT_LT(std::abs(kf.y - kk.y) / std::abs(kk.y), 1e-40);
}

TEST(MollifiedKernel, EnclosedMassIdentityAgainstConvolutionQuadrature) {
    for (ProfileKind kind : {ProfileKind::gaussian, ProfileKind::bump}) {
        BlobProfile prof{kind};
        for (double eps : {1.0, 0.37}) {
            for (double ratio : {0.25, 1.0, 4.0}) {
                const Vec2 x = Vec2{0.6, -0.8} * (ratio * eps); // |x| = ratio * eps
                const Vec2 got = mollified_kernel(x, eps, prof);
                const Vec2 oracle = convolution_oracle(x, eps, prof);
                EXPECT_NEAR(got.x, oracle.x, 1e-8)
                    << to_string(kind) << " eps=" << eps << " ratio=" << ratio;
                EXPECT_NEAR(got.y, oracle.y, 1e-8)
                    << to_string(kind) << " eps=" << eps << " ratio=" << ratio;
            }
        }
    }
}

TEST(Kernels, DivergenceFreeOnGrid) {
    // Finite-difference divergence of K and K_eps fields away from the origin
    // (|x| >= 1, where the O(h^2 |D^3 K|) truncation stays below 1e-6).
    BlobProfile prof;
    const double spacing = 1e-3;
    Rng rng(17);
    double worst_k = 0.0, worst_ke = 0.0;
    for (int i = 0; i < 200; ++i) {
        Vec2 x = rng.point(-3.0, 3.0);
        if (x.norm() < 1.0) continue;
        auto div_of = [&](auto&& f) {
            const Vec2 fx1 = f({x.x + spacing, x.y});
            const Vec2 fx0 = f({x.x - spacing, x.y});
            const Vec2 fy1 = f({x.x, x.y + spacing});
            const Vec2 fy0 = f({x.x, x.y - spacing});
            return (fx1.x - fx0.x + fy1.y - fy0.y) / (2.0 * spacing);
        };
        worst_k = std::max(worst_k, std::abs(div_of([](const Vec2& p) { return biot_savart(p); })));
        worst_ke = std::max(worst_ke, std::abs(div_of([&](const Vec2& p) {
            return mollified_kernel(p, 0.3, prof);
        })));
    }
    EXPECT_LT(worst_k, 1e-6);
    EXPECT_LT(worst_ke, 1e-6);
}

TEST(Cutoff, PiecewiseValuesAndMonotonicity) {
    CutoffPair cut;
    EXPECT_DOUBLE_EQ(cutoff_eval(cut, {0.3, 0.4}), 1.0); // |x| = 0.5
    EXPECT_DOUBLE_EQ(cutoff_eval(cut, {3.0, 0.0}), 0.0);
    const double mid = cutoff_eval(cut, {1.5, 0.0});
    EXPECT_GT(mid, 0.0);
    EXPECT_LT(mid, 1.0);
    EXPECT_NEAR(mid, 0.5, 1e-12); // quintic smoothstep is symmetric about the midpoint
    double prev = 1.0;
    for (double r = 1.0; r <= 2.0; r += 0.01) {
        const double v = cut.value(r);
        EXPECT_LE(v, prev + 1e-15);
        prev = v;
    }
}

TEST(Cutoff, DerivativesAreC2AtJunctions) {
    CutoffPair cut;
    const double d = 1e-7;
    for (double r : {1.0, 2.0}) {
        // value, first and second derivative continuous across the junction
        EXPECT_NEAR(cut.value(r - d), cut.value(r + d), 1e-12);
        EXPECT_NEAR(cut.deriv(r - d), cut.deriv(r + d), 1e-5);
        EXPECT_NEAR(cut.deriv2(r - d), cut.deriv2(r + d), 1e-2);
    }
    // Interior: analytic derivatives match finite differences.
    for (double r : {1.2, 1.5, 1.8}) {
        const double dd = 1e-6;
        EXPECT_NEAR(cut.deriv(r), (cut.value(r + dd) - cut.value(r - dd)) / (2 * dd), 1e-6);
        EXPECT_NEAR(cut.deriv2(r), (cut.deriv(r + dd) - cut.deriv(r - dd)) / (2 * dd), 1e-5);
    }
    EXPECT_THROW(CutoffPair(2.0, 1.0), ConfigError);
}

TEST(SerfatiFarKernel, ZeroInsideInnerRadius) {
    CutoffPair cut;
    const auto m = serfati_far_kernel({0.5, 0.3}, cut);
    for (int i = 0; i < 2; ++i) {
        EXPECT_EQ(m[i].a11, 0.0);
        EXPECT_EQ(m[i].a12, 0.0);
        EXPECT_EQ(m[i].a21, 0.0);
        EXPECT_EQ(m[i].a22, 0.0);
    }
}

TEST(SerfatiFarKernel, PureKernelHessianBeyondOuterRadius) {
    CutoffPair cut;
    const Vec2 x{2.5, -1.4};
    const auto m = serfati_far_kernel(x, cut);
    const auto h = biot_savart_hess(x);
    for (int i = 0; i < 2; ++i) {
        // M[i](j,k) = d_j (grad_perp K_i)_k = (k=1: -d_j d_2 K_i, k=2: d_j d_1 K_i)
        EXPECT_NEAR(m[i].a11, -h[i].a12, 1e-15);
        EXPECT_NEAR(m[i].a12, h[i].a11, 1e-15);
        EXPECT_NEAR(m[i].a21, -h[i].a22, 1e-15);
        EXPECT_NEAR(m[i].a22, h[i].a21, 1e-15);
    }
    // |x|^-3 decay: doubling the radius shrinks the tensor by ~8.
    const Vec2 x2 = x * 2.0;
    const auto m2 = serfati_far_kernel(x2, cut);
    EXPECT_NEAR(std::abs(m2[0].a11 / m[0].a11), 1.0 / 8.0, 0.02);
}

TEST(SerfatiFarKernel, MatchesFiniteDifferencesOnAnnulus) {
    CutoffPair cut;
    Rng rng(23);
    auto f = [&](int i, const Vec2& p) {
        const double a = cutoff_eval(cut, p);
        const Vec2 k = biot_savart(p);
        return (1.0 - a) * (i == 0 ? k.x : k.y);
    };
    for (int trial = 0; trial < 20; ++trial) {
        const double r = rng.uniform(1.05, 1.95);
        const double th = rng.uniform(0.0, kTwoPi);
        const Vec2 x{r * std::cos(th), r * std::sin(th)};
        const auto m = serfati_far_kernel(x, cut);
        const double d = 1e-4;
        for (int i = 0; i < 2; ++i) {
            auto gperp = [&](const Vec2& p, int k) {
                // (grad_perp f)_1 = -d2 f, (grad_perp f)_2 = d1 f
                if (k == 0)
                    return -(f(i, {p.x, p.y + d}) - f(i, {p.x, p.y - d})) / (2 * d);
                return (f(i, {p.x + d, p.y}) - f(i, {p.x - d, p.y})) / (2 * d);
            };
            for (int j = 0; j < 2; ++j) {
                for (int k = 0; k < 2; ++k) {
                    const Vec2 ej = j == 0 ? Vec2{d, 0.0} : Vec2{0.0, d};
                    const double fd = (gperp(x + ej, k) - gperp(x - ej, k)) / (2 * d);
                    const double got = j == 0 ? (k == 0 ? m[i].a11 : m[i].a12)
                                             : (k == 0 ? m[i].a21 : m[i].a22);
                    EXPECT_NEAR(got, fd, 5e-5) << "i=" << i << " j=" << j << " k=" << k;
                }
            }
        }
    }
}

TEST(SerfatiFarKernel, L2NormConvergesWithTruncationRadius) {
    CutoffPair cut;
    auto band = [&](double rin, double rout) {
        // polar quadrature of sum_{i,j,k} M[i](j,k)^2 over the annulus
        const int nth = 64;
        double acc = 0.0;
        for (int it = 0; it < nth; ++it) {
            const double th = kTwoPi * (it + 0.5) / nth;
            acc += testutil::gauss_integrate(
                [&](double r) {
                    const auto m = serfati_far_kernel({r * std::cos(th), r * std::sin(th)}, cut);
                    double s = 0.0;
                    for (int i = 0; i < 2; ++i)
                        s += m[i].a11 * m[i].a11 + m[i].a12 * m[i].a12 +
                             m[i].a21 * m[i].a21 + m[i].a22 * m[i].a22;
                    return s * r;
                },
                rin, rout, 64);
        }
        return acc * kTwoPi / nth;
    };
    const double core = band(1.0, 10.0);
    const double band1 = band(10.0, 20.0);
    const double band2 = band(20.0, 40.0);
    EXPECT_GT(core, 0.0);
    EXPECT_GT(band1, 0.0);
    EXPECT_GT(band2, 0.0);
    // |x|^-3 decay: each doubling band shrinks the tail like R^-4.
    EXPECT_LT(band2, 0.2 * band1);
    EXPECT_LT(band2 / core, 1e-3);
}

TEST(ViscousFarKernel, SupportedInAnnulusOnly) {
    CutoffPair cut;
    const Vec2 inside = viscous_far_kernel({0.3, 0.4}, cut);
    EXPECT_EQ(inside.x, 0.0);
    EXPECT_EQ(inside.y, 0.0);
    const Vec2 outside = viscous_far_kernel({4.0, 3.0}, cut); // |x| = 5
    EXPECT_EQ(outside.x, 0.0);
    EXPECT_EQ(outside.y, 0.0);
    const Vec2 annulus = viscous_far_kernel({1.5, 0.0}, cut);
    EXPECT_TRUE(std::isfinite(annulus.x));
    EXPECT_TRUE(std::isfinite(annulus.y));
    EXPECT_GT(std::abs(annulus.x) + std::abs(annulus.y), 0.0);
}

TEST(ViscousFarKernel, HarmonicityOutsideByFiniteDifferenceLaplacian) {
    // Delta[(1-a)K_i] = Delta K_i = 0 for |x| >= r2; verified by a
    // finite-difference Laplacian of (1-a)K_i at |x| = 5.
    CutoffPair cut;
    const Vec2 x{3.0, 4.0};
    const double d = 1e-3;
    for (int i = 0; i < 2; ++i) {
        auto f = [&](const Vec2& p) {
            const Vec2 k = biot_savart(p);
            return (1.0 - cutoff_eval(cut, p)) * (i == 0 ? k.x : k.y);
        };
        const double lap = (f({x.x + d, x.y}) + f({x.x - d, x.y}) + f({x.x, x.y + d}) +
                            f({x.x, x.y - d}) - 4.0 * f(x)) /
                           (d * d);
        EXPECT_LT(std::abs(lap), 1e-6);
    }
}

TEST(ViscousFarKernel, MatchesFiniteDifferenceLaplacianInAnnulus) {
    CutoffPair cut;
    for (double r : {1.1, 1.5, 1.9}) {
        const Vec2 x{r * 0.8, r * 0.6};
        const Vec2 got = viscous_far_kernel(x, cut);
        const double d = 1e-4;
        for (int i = 0; i < 2; ++i) {
            auto f = [&](const Vec2& p) {
                const Vec2 k = biot_savart(p);
                return (1.0 - cutoff_eval(cut, p)) * (i == 0 ? k.x : k.y);
            };
            const double lap = (f({x.x + d, x.y}) + f({x.x - d, x.y}) + f({x.x, x.y + d}) +
                                f({x.x, x.y - d}) - 4.0 * f(x)) /
                               (d * d);
            EXPECT_NEAR(i == 0 ? got.x : got.y, lap, 5e-5);
        }
    }
}

TEST(ViscousFarKernel, L2Finite) {
    CutoffPair cut;
    const int nth = 64;
    double acc = 0.0;
    for (int it = 0; it < nth; ++it) {
        const double th = kTwoPi * (it + 0.5) / nth;
        acc += testutil::gauss_integrate(
            [&](double r) {
                const Vec2 v = viscous_far_kernel({r * std::cos(th), r * std::sin(th)}, cut);
                return (v.x * v.x + v.y * v.y) * r;
            },
            1.0, 2.0, 64);
    }
    acc *= kTwoPi / nth;
    EXPECT_TRUE(std::isfinite(acc));
    EXPECT_GT(acc, 0.0);
}

TEST(GradFarKernel, MatchesFiniteDifferences) {
    CutoffPair cut;
    for (const Vec2& x : {Vec2{1.3, 0.4}, Vec2{0.0, 1.7}, Vec2{2.5, 2.5}}) {
        const Mat2 g = grad_far_kernel(x, cut);
        const double d = 1e-5;
        auto f = [&](int i, const Vec2& p) {
            const Vec2 k = biot_savart(p);
            return (1.0 - cutoff_eval(cut, p)) * (i == 0 ? k.x : k.y);
        };
        EXPECT_NEAR(g.a11, (f(0, {x.x + d, x.y}) - f(0, {x.x - d, x.y})) / (2 * d), 1e-6);
        EXPECT_NEAR(g.a12, (f(0, {x.x, x.y + d}) - f(0, {x.x, x.y - d})) / (2 * d), 1e-6);
        EXPECT_NEAR(g.a21, (f(1, {x.x + d, x.y}) - f(1, {x.x - d, x.y})) / (2 * d), 1e-6);
        EXPECT_NEAR(g.a22, (f(1, {x.x, x.y + d}) - f(1, {x.x, x.y - d})) / (2 * d), 1e-6);
    }
    const Mat2 zero = grad_far_kernel({0.2, 0.1}, cut);
    EXPECT_EQ(zero.a11, 0.0);
    EXPECT_EQ(zero.a22, 0.0);
}

TEST(GepsL1, ClosedFormAndQuadratureAgree) {
    // alpha = 1, eps = 0.05: 2 pi / log(10) = 2.7287527076836827.
    EXPECT_NEAR(g_eps_l1(0.05, 1.0), 2.7287527076836827, 1e-12);
    EXPECT_NEAR(g_eps_l1(0.05, 1.0), 2.728753, 1e-5);
    for (double alpha : {0.6, 1.0, 2.0}) {
        for (double eps : {0.2, 0.05, 0.01}) {
            const double exact = g_eps_l1(eps, alpha);
            const double quad = g_eps_l1_quadrature(eps, alpha);
            EXPECT_LT(std::abs(exact - quad) / exact, 1e-6)
                << "alpha=" << alpha << " eps=" << eps;
        }
    }
}

TEST(GepsL1, VanishesAsEpsShrinksAndDivergesBelowHalf) {
    const double a = 1.0;
    double prev = g_eps_l1(0.1, a);
    for (double eps : {0.05, 0.01, 1e-4, 1e-8}) {
        const double v = g_eps_l1(eps, a);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, 0.4);
    EXPECT_THROW(g_eps_l1(0.05, 0.5), DomainError);
    EXPECT_THROW(g_eps_l1(0.05, 0.3), DomainError);
    EXPECT_THROW(g_eps_l1(0.6, 1.0), DomainError);
}
