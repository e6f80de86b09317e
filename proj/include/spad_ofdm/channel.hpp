#pragma once

// Channel-loss models: FSO geometric loss with Gamma-Gamma turbulence fading,
// and line-of-sight VLC loss.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <variant>

namespace spad_ofdm {

struct FsoParams
{
    double aperture = 0.1;      // receiver aperture diameter, m
    double divergence = 1e-3;   // beam divergence, rad
    double distance = 1000.0;   // m
    double cn2 = 1e-14;         // refraction structure parameter, m^-2/3
    double wavelength = 450e-9; // m

    void validate() const
    {
        if (!(aperture > 0 && divergence > 0 && distance > 0 && cn2 > 0 && wavelength > 0))
            throw std::invalid_argument("FsoParams: all fields must be strictly positive");
    }
};

/// Squared erf aperture-capture fraction of a diverging Gaussian beam.
inline double fso_geometric_loss(const FsoParams& p)
{
    p.validate();
    const double arg = std::sqrt(std::numbers::pi) * p.aperture /
                       (2.0 * std::sqrt(2.0) * p.divergence * p.distance);
    const double e = std::erf(arg);
    return e * e;
}

/// Gamma-Gamma shape parameters: large-scale (rho) and small-scale (beta)
/// effective eddy counts.
struct GammaGammaShape
{
    double rho = 0.0;
    double beta = 0.0;
};

/// Shapes this large stand in for the no-turbulence limit.
inline constexpr double kNoTurbulenceShape = 1e12;

namespace detail {

inline double shape_from_exponent(double exponent)
{
    if (!std::isfinite(exponent) || exponent < 0.0)
        throw std::domain_error("gamma_gamma_shape: parameters outside the model range");
    const double denom = std::expm1(exponent);
    if (!(denom > 1.0 / kNoTurbulenceShape))
        return kNoTurbulenceShape;
    return 1.0 / denom;
}

// log K_nu(z). Past z = 500 the recurrence inside std::cyl_bessel_k gives up,
// so switch to the large-argument expansion, truncated at its smallest term;
// where K overflows (tiny z) use its leading small-argument term.
inline double log_bessel_k(double nu, double z)
{
    if (z <= 500.0)
    {
        const double k = std::cyl_bessel_k(nu, z);
        if (std::isinf(k) && nu > 0.0)
            return std::lgamma(nu) - std::log(2.0) + nu * std::log(2.0 / z); // small-z leading term
        return k > 0.0 ? std::log(k) : -std::numeric_limits<double>::infinity();
    }
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < 60; ++j)
    {
        const double next = term * (mu - (2.0 * j - 1) * (2.0 * j - 1)) / (8.0 * j * z);
        if (std::abs(next) >= std::abs(term))
            break;
        term = next;
        sum += term;
    }
    return 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z + std::log(sum);
}

} // namespace detail

inline GammaGammaShape gamma_gamma_shape_from(double chi2, double xi2)
{
    if (!(chi2 >= 0.0) || !(xi2 >= 0.0))
        throw std::domain_error("gamma_gamma_shape: negative scintillation parameter");
    const double chi_125 = std::pow(chi2, 6.0 / 5.0); // chi^{12/5}
    const double rho_exp = 0.49 * chi2 / std::pow(1.0 + 0.18 * xi2 + 0.56 * chi_125, 7.0 / 6.0);
    const double beta_exp = 0.51 * chi2 * std::pow(1.0 + 0.69 * chi_125, -5.0 / 6.0) /
                            std::pow(1.0 + 0.9 * xi2 + 0.62 * xi2 * chi_125, 5.0 / 6.0);
    return {detail::shape_from_exponent(rho_exp), detail::shape_from_exponent(beta_exp)};
}

inline GammaGammaShape gamma_gamma_shape(const FsoParams& p)
{
    p.validate();
    const double k = 2.0 * std::numbers::pi / p.wavelength;
    const double chi2 = 0.5 * p.cn2 * std::pow(k, 7.0 / 6.0) * std::pow(p.distance, 11.0 / 6.0);
    const double xi2 = k * p.aperture * p.aperture / (4.0 * p.distance);
    return gamma_gamma_shape_from(chi2, xi2);
}

/// Unit-mean Gamma-Gamma density.
inline double gamma_gamma_pdf(double x, const GammaGammaShape& s)
{
    if (!(s.rho > 0.0 && s.beta > 0.0))
        throw std::invalid_argument("gamma_gamma_pdf: shapes must be positive");
    const double order = std::abs(s.rho - s.beta);
    const double half_sum = 0.5 * (s.rho + s.beta);
    const double log_norm = std::log(2.0) + half_sum * std::log(s.rho * s.beta) -
                            std::lgamma(s.rho) - std::lgamma(s.beta);
    if (x < 0.0)
        return 0.0;
    if (x == 0.0)
    {
        // density ~ x^{min(rho,beta)-1} near the origin
        const double lo = std::min(s.rho, s.beta);
        if (lo > 1.0)
            return 0.0;
        if (lo < 1.0)
            return std::numeric_limits<double>::infinity();
        // K_nu(z) ~ Gamma(nu)/2 (2/z)^nu with z = 2 sqrt(rho beta x)
        if (order == 0.0)
            return std::numeric_limits<double>::infinity();
        return std::exp(log_norm + std::lgamma(order) - std::log(2.0) -
                        0.5 * order * std::log(s.rho * s.beta));
    }
    const double z = 2.0 * std::sqrt(s.rho * s.beta * x);
    return std::exp(log_norm + (half_sum - 1.0) * std::log(x) + detail::log_bessel_k(order, z));
}

/// Product of independent unit-mean Gamma(rho) and Gamma(beta) variates.
template <typename Rng>
double sample_gamma_gamma(const GammaGammaShape& s, Rng& rng)
{
    std::gamma_distribution<double> large(s.rho, 1.0 / s.rho);
    std::gamma_distribution<double> small(s.beta, 1.0 / s.beta);
    return large(rng) * small(rng);
}

/// Generalized Lambertian emitter of order m: (m+1)/(2 pi) cos^m(angle).
struct LambertianEmitter
{
    double order = 1.0;
};

/// Radiant intensity given directly in 1/sr, independent of angle.
struct ConstantIntensity
{
    double value = 0.0;
};

using RadiationPattern = std::variant<LambertianEmitter, ConstantIntensity>;

inline double radiant_intensity(const RadiationPattern& pattern, double angle)
{
    struct Visitor
    {
        double angle;
        double operator()(const LambertianEmitter& e) const
        {
            return (e.order + 1.0) / (2.0 * std::numbers::pi) * std::pow(std::cos(angle), e.order);
        }
        double operator()(const ConstantIntensity& c) const { return c.value; }
    };
    return std::visit(Visitor{angle}, pattern);
}

struct VlcParams
{
    double detector_area = 1e-4; // m^2
    double distance = 2.0;       // m
    double radiance_angle = 0.0; // rad
    double incidence_angle = 0.0;
    RadiationPattern pattern = LambertianEmitter{1.0};
    double concentrator_gain = 1.0;
};

inline double vlc_los_loss(const VlcParams& p)
{
    if (!(p.detector_area > 0.0) || !(p.distance > 0.0))
        throw std::invalid_argument("VlcParams: detector_area and distance must be positive");
    const double cos_in = std::max(std::cos(p.incidence_angle), 0.0);
    return p.detector_area / (p.distance * p.distance) * radiant_intensity(p.pattern, p.radiance_angle) *
           p.concentrator_gain * cos_in;
}

} // namespace spad_ofdm
