#include "spad_ofdm/channel.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace spad_ofdm;

namespace {

double integrate_pdf(const GammaGammaShape& s, double power)
{
    // tanh-sinh near the (possibly singular) origin, exp-sinh for the tail
    auto f = [&](double x) { return std::pow(x, power) * gamma_gamma_pdf(x, s); };
    boost::math::quadrature::tanh_sinh<double> head;
    boost::math::quadrature::exp_sinh<double> tail;
    // the two-argument form passes the exact distance to the nearer end, so the
    // abscissae near 0 never round onto the pole
    auto g = [&](double x, double xc) { return f(x < 0.5 ? -xc : x); };
    return head.integrate(g, 0.0, 1.0, 1e-14) + tail.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-14);
}

const GammaGammaShape kShapes[] = {{12.882815617339107, 18.337500379638900}, {4.2, 1.4}, {2.5, 0.8}, {3.0, 3.0}};

} // namespace

TEST(FsoGeometricLoss, Limits)
{
    FsoParams p;
    p.aperture = 100.0;
    EXPECT_NEAR(fso_geometric_loss(p), 1.0, 1e-15);
    p = FsoParams{};
    p.distance = 1e9;
    EXPECT_LT(fso_geometric_loss(p), 1e-10);
}

TEST(FsoGeometricLoss, ReferenceLink)
{
    // erf(sqrt(pi) 0.1 / (2 sqrt(2) 1e-3 1000))^2 evaluated at 40 digits
    FsoParams p;
    EXPECT_NEAR(fso_geometric_loss(p) / 0.0049869339846683625, 1.0, 1e-13);
}

TEST(FsoGeometricLoss, Monotone)
{
    FsoParams p;
    double prev = 1.0;
    for (double l = 100.0; l < 1e5; l *= 1.5)
    {
        p.distance = l;
        const double h = fso_geometric_loss(p);
        EXPECT_LT(h, prev);
        EXPECT_GT(h, 0.0);
        prev = h;
    }
    p = FsoParams{};
    const double base = fso_geometric_loss(p);
    p.divergence *= 2.0;
    EXPECT_LT(fso_geometric_loss(p), base);
    p = FsoParams{};
    p.aperture *= 2.0;
    EXPECT_GT(fso_geometric_loss(p), base);
    p.aperture = -1.0;
    EXPECT_THROW(fso_geometric_loss(p), std::invalid_argument);
}

TEST(GammaGammaShape, WeakTurbulenceReference)
{
    const auto s = gamma_gamma_shape_from(0.2, 1.0);
    EXPECT_NEAR(s.rho / 12.882815617339107, 1.0, 1e-13);
    EXPECT_NEAR(s.beta / 18.337500379638900, 1.0, 1e-13);
}

TEST(GammaGammaShape, NoTurbulenceCap)
{
    const auto s = gamma_gamma_shape_from(0.0, 1.0);
    EXPECT_EQ(s.rho, kNoTurbulenceShape);
    EXPECT_EQ(s.beta, kNoTurbulenceShape);
    FsoParams p;
    p.cn2 = 1e-40;
    const auto q = gamma_gamma_shape(p);
    EXPECT_GT(q.rho, 1e6);
    EXPECT_GT(q.beta, 1e6);
}

TEST(GammaGammaShape, PositiveOverParameterRange)
{
    for (double chi2 : {1e-6, 0.01, 0.2, 1.0, 5.0, 30.0})
        for (double xi2 : {0.0, 0.1, 1.0, 10.0})
        {
            const auto s = gamma_gamma_shape_from(chi2, xi2);
            EXPECT_GT(s.rho, 0.0);
            EXPECT_GT(s.beta, 0.0);
        }
    EXPECT_THROW(gamma_gamma_shape_from(-1.0, 1.0), std::domain_error);
}

TEST(GammaGammaPdf, NormalizedWithUnitMean)
{
    for (const auto& s : kShapes)
    {
        EXPECT_NEAR(integrate_pdf(s, 0.0), 1.0, 1e-6) << s.rho << ' ' << s.beta;
        EXPECT_NEAR(integrate_pdf(s, 1.0), 1.0, 1e-6) << s.rho << ' ' << s.beta;
    }
}

TEST(GammaGammaPdf, NonNegativeAndOriginLimit)
{
    for (const auto& s : kShapes)
        for (double x = 0.0; x < 8.0; x += 0.01)
            EXPECT_GE(gamma_gamma_pdf(x, s), 0.0);
    EXPECT_EQ(gamma_gamma_pdf(0.0, {4.2, 1.4}), 0.0);
    EXPECT_TRUE(std::isinf(gamma_gamma_pdf(0.0, {2.5, 0.8})));
    // min shape exactly 1: finite, equal to the limit from the right
    const GammaGammaShape one{3.0, 1.0};
    EXPECT_NEAR(gamma_gamma_pdf(0.0, one), gamma_gamma_pdf(1e-9, one), 1e-3);
    EXPECT_EQ(gamma_gamma_pdf(-1.0, one), 0.0);
}

TEST(GammaGammaPdf, LogBesselKAcrossBranchPoint)
{
    for (double nu : {0.0, 0.4, 3.5, 11.0})
        for (double z : {499.0, 500.0, 500.5, 650.0})
        {
            const double ref = std::log(boost::math::cyl_bessel_k(nu, z));
            EXPECT_NEAR(detail::log_bessel_k(nu, z), ref, 1e-12 * std::abs(ref)) << nu << ' ' << z;
        }
    EXPECT_NEAR(detail::log_bessel_k(1.7, 1e-200), std::lgamma(1.7) - std::log(2.0) + 1.7 * std::log(2e200), 1e-12 * 782);
    EXPECT_TRUE(std::isfinite(gamma_gamma_pdf(1e-300, {2.5, 0.8})));
    EXPECT_NO_THROW(gamma_gamma_pdf(1e6, {2.5, 0.8}));
    EXPECT_GE(gamma_gamma_pdf(1e4, {12.9, 18.3}), 0.0);
}

TEST(GammaGammaSampler, MeanAndKolmogorovSmirnov)
{
    const GammaGammaShape s{4.2, 1.4};
    std::mt19937_64 rng(321);
    const int n = 1000000;
    std::vector<double> draws(n);
    double sum = 0.0;
    for (auto& d : draws)
    {
        d = sample_gamma_gamma(s, rng);
        sum += d;
    }
    EXPECT_NEAR(sum / n, 1.0, 0.01);
    std::sort(draws.begin(), draws.end());

    // CDF by piecewise Gauss-Kronrod at every 1000th order statistic
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto pdf = [&](double x) { return gamma_gamma_pdf(x, s); };
    double cdf = 0.0, lo = 0.0, ks = 0.0;
    for (int i = 999; i < n; i += 1000)
    {
        const double hi = draws[i];
        cdf += gk::integrate(pdf, lo, hi, 8, 1e-10);
        lo = hi;
        ks = std::max({ks, std::abs(cdf - (i + 1.0) / n), std::abs(cdf - static_cast<double>(i) / n)});
    }
    EXPECT_LT(ks, 0.005);
}

TEST(VlcLosLoss, Examples)
{
    VlcParams p; // 1 cm^2 at 2 m, Lambertian m = 1, normal incidence
    EXPECT_NEAR(vlc_los_loss(p) / (1e-4 / 4.0 * 2.0 / (2.0 * std::numbers::pi)), 1.0, 1e-15);
    const double base = vlc_los_loss(p);
    p.distance = 4.0;
    EXPECT_NEAR(vlc_los_loss(p), base / 4.0, 1e-20);
    p = VlcParams{};
    p.incidence_angle = std::numbers::pi / 2;
    EXPECT_NEAR(vlc_los_loss(p), 0.0, 1e-20);
    p = VlcParams{};
    p.pattern = ConstantIntensity{0.5};
    EXPECT_NEAR(vlc_los_loss(p), 1e-4 / 4.0 * 0.5, 1e-20);
    p.distance = 0.0;
    EXPECT_THROW(vlc_los_loss(p), std::invalid_argument);
}
