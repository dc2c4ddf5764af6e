#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "mfcrit/spectral.hpp"

using namespace mfcrit::spectral;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(CCoefficient, KnownValues) {
    EXPECT_NEAR(c_coefficient(0.5), 1.0, 1e-15);
    EXPECT_NEAR(c_coefficient(0.75), 3.0 * std::sqrt(2.0 * kPi) / 8.0, 1e-12);
    EXPECT_NEAR(c_coefficient(0.75), 0.9399856, 5e-8);
    EXPECT_NEAR(critical_k(), c_coefficient(0.75), 0.0);
}

TEST(CCoefficient, LgammaRoute) {
    const double oracle = std::exp(std::lgamma(2.2)) * std::sin(0.6 * kPi);
    EXPECT_LT(rel(c_coefficient(0.6), oracle), 1e-12);
}

TEST(CCoefficient, RejectsOutsideUnitInterval) {
    EXPECT_THROW(c_coefficient(0.0), std::domain_error);
    EXPECT_THROW(c_coefficient(1.0), std::domain_error);
    EXPECT_THROW(c_coefficient(-0.2), std::domain_error);
    EXPECT_THROW(c_log_derivative(1.5), std::domain_error);
}

TEST(CLogDerivative, CriticalBeta) {
    EXPECT_NEAR(c_log_derivative(0.75), -1.735279, 1e-6);
    EXPECT_NEAR(critical_beta(), critical_beta_elementary(), 1e-12);
    EXPECT_NEAR(critical_beta(), c_log_derivative(0.75), 1e-14);
}

TEST(CLogDerivative, MatchesFiniteDifferenceOnGrid) {
    const double h = 1e-6;
    for (double hurst = 0.55; hurst <= 0.95 + 1e-12; hurst += 0.05) {
        const double fd = (std::log(c_coefficient(hurst + h)) - std::log(c_coefficient(hurst - h))) / (2.0 * h);
        EXPECT_LT(rel(c_log_derivative(hurst), fd), 1e-5) << "H = " << hurst;
    }
}

TEST(FgnSpectralDensity, Even) {
    EXPECT_DOUBLE_EQ(fgn_spectral_density(0.3, 0.75), fgn_spectral_density(-0.3, 0.75));
    EXPECT_DOUBLE_EQ(fgn_spectral_density_dH(0.3, 0.75), fgn_spectral_density_dH(-0.3, 0.75));
    EXPECT_GT(fgn_spectral_density(2.0, 0.6), 0.0);
}

TEST(FgnSpectralDensity, LowFrequencyCoefficient) {
    const double lambda = 0.001;
    EXPECT_LT(rel(fgn_spectral_density(lambda, 0.75) * std::sqrt(lambda), 0.93999), 1e-3);
}

TEST(FgnSpectralDensity, RejectsSingularPoint) {
    EXPECT_THROW(fgn_spectral_density(0.0, 0.75), std::domain_error);
    EXPECT_THROW(fgn_spectral_density_dH(0.0, 0.75), std::domain_error);
    EXPECT_THROW(fgn_spectral_density(4.0, 0.75), std::domain_error);
}

TEST(FgnSpectralDensity, IntegratesToUnitVariance) {
    boost::math::quadrature::tanh_sinh<double> rule;
    for (double hurst : {0.55, 0.65, 0.75, 0.85, 0.95}) {
        auto f = [hurst](double l) { return fgn_spectral_density(l, hurst); };
        const double half = rule.integrate(f, 0.0, kPi, 1e-13);
        EXPECT_NEAR(2.0 * half / (2.0 * kPi), 1.0, 1e-8) << "H = " << hurst;
    }
}

TEST(FgnSpectralDensityDH, MatchesFiniteDifference) {
    const double h = 1e-6;
    const double fd = (fgn_spectral_density(0.5, 0.75 + h) - fgn_spectral_density(0.5, 0.75 - h)) / (2.0 * h);
    EXPECT_LT(rel(fgn_spectral_density_dH(0.5, 0.75), fd), 1e-6);
}

TEST(FgnSpectralDensityDH, LowFrequencyLogDerivative) {
    const double lambda = 1e-4;
    const double ratio = fgn_spectral_density_dH(lambda, 0.75) / fgn_spectral_density(lambda, 0.75);
    EXPECT_LT(rel(ratio, critical_beta() - 2.0 * std::log(lambda)), 0.02);
}

TEST(WeightProfile, TailAndMidpoint) {
    const double eta = 0.9;
    const double u = 1e12;
    EXPECT_LT(rel(weight_profile(u, eta) * std::sqrt(u), eta), 1e-5);
    EXPECT_NEAR(weight_profile(eta * eta, eta), 0.5, 1e-15);
    EXPECT_NEAR(weight_profile(-eta * eta, eta), 0.5, 1e-15);
}

TEST(WeightProfile, MonotoneInsideUnitInterval) {
    double previous = 1.0;
    for (double u = 1e-6; u < 1e8; u *= 1.7) {
        const double w = weight_profile(u, 0.94);
        EXPECT_GT(w, 0.0);
        EXPECT_LT(w, 1.0);
        EXPECT_LT(w, previous);
        previous = w;
    }
}

TEST(WeightProfile, RejectsBadArguments) {
    EXPECT_THROW(weight_profile(0.0, 1.0), std::domain_error);
    EXPECT_THROW(weight_profile(1.0, 0.0), std::domain_error);
    EXPECT_THROW(profiles(0.0, 1.0, 2.0, critical_beta(), 1.0), std::domain_error);
}

TEST(Profiles, AlphaProfileEnergy) {
    boost::math::quadrature::exp_sinh<double> rule;
    for (double alpha : {0.5, 1.0, 2.0}) {
        auto g2 = [alpha](double u) {
            const double g = *profiles(u, 1.0, 1.0, critical_beta(), 1.0, alpha).g_alpha;
            return g * g;
        };
        const double half = rule.integrate(g2, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
        EXPECT_NEAR(2.0 * half, 2.0 * kPi / alpha, 1e-8) << "alpha = " << alpha;
    }
}

TEST(Profiles, HurstProfileAtUnitFrequency) {
    const double eta = 0.94;
    const double L = 3.0;
    const Profiles p = profiles(1.0, eta, L, critical_beta(), 1.5);
    EXPECT_DOUBLE_EQ(p.g_hurst, weight_profile(1.0, eta) * (2.0 * L + critical_beta()));
    EXPECT_DOUBLE_EQ(p.g_sigma, 2.0 * weight_profile(1.0, eta) / 1.5);
    EXPECT_FALSE(p.g_alpha.has_value());
}

TEST(Profiles, CrossProductTail) {
    const double sigma = 1.0;
    const double eta = sigma * sigma * critical_k();
    const double L = 3.0;
    const double u = 1e5;
    const Profiles p = profiles(u, eta, L, critical_beta(), sigma);
    const double tail = 2.0 * eta * eta / sigma / u * (2.0 * L + critical_beta() - 2.0 * std::log(u));
    EXPECT_LT(rel(p.g_sigma * p.g_hurst, tail), 0.05);
}

TEST(JIntegrals, CriticalValuesAtLTwo) {
    const JIntegrals j = j_integrals(critical_beta(), 2.0);
    EXPECT_NEAR(j.j0, 4.0, 1e-14);
    EXPECT_NEAR(j.j1, 1.05888, 1e-5);
    EXPECT_NEAR(j.j2, 5.61364, 1e-5);
}

TEST(JIntegrals, PureLogCase) {
    const double L = 1.7;
    const JIntegrals j = j_integrals(0.0, L);
    EXPECT_NEAR(j.j1, 2.0 * L * L, 1e-13);
    EXPECT_NEAR(j.j2, 8.0 / 3.0 * L * L * L, 1e-13);
}

TEST(JIntegrals, LogarithmicPrimitives) {
    // int_1^{e^L} u^{-1} log^k u du = L^{k+1} / (k+1)
    const double beta = critical_beta();
    const double L = 2.5;
    const double a = 2.0 * L + beta;
    const double p0 = L, p1 = L * L / 2.0, p2 = L * L * L / 3.0;
    const JIntegrals j = j_integrals(beta, L);
    EXPECT_NEAR(j.j1, 2.0 * (a * p0 - 2.0 * p1), 1e-12);
    EXPECT_NEAR(j.j2, 2.0 * (a * a * p0 - 4.0 * a * p1 + 4.0 * p2), 1e-12);
}

TEST(JIntegrals, QuadratureOracleOnGrid) {
    boost::math::quadrature::tanh_sinh<double> rule;
    for (double beta : {-1.735279, 0.0, 0.8}) {
        for (double L : {0.5, 2.0, 4.0, 7.0}) {
            const JIntegrals j = j_integrals(beta, L);
            const double values[] = {j.j0, j.j1, j.j2};
            for (int k = 0; k < 3; ++k) {
                // substitute s = log u
                auto f = [=](double s) { return 2.0 * std::pow(2.0 * L + beta - 2.0 * s, k); };
                const double q = rule.integrate(f, 0.0, L, 1e-14);
                const double scale = 2.0 * std::pow(2.0 * L + std::abs(beta), k) * L;
                EXPECT_LT(std::abs(values[k] - q), 1e-9 * std::max(std::abs(q), scale))
                    << "beta " << beta << " L " << L << " k " << k;
            }
        }
    }
    EXPECT_THROW(j_integrals(critical_beta(), 0.0), std::domain_error);
}

TEST(GammaCrit, SigmaThree) {
    const GammaCrit g(3.0);
    EXPECT_NEAR(g(0, 0), 5.0625, 1e-12);
    EXPECT_NEAR(g(0, 1), 7.59375, 1e-12);
    EXPECT_NEAR(g(1, 0), 7.59375, 1e-12);
    EXPECT_NEAR(g(1, 1), 15.1875, 1e-12);
    EXPECT_NEAR(g.efficient_information(), 3.0 * 81.0 / 64.0, 1e-12);
}

TEST(GammaCrit, ClosedFormsOnSigmaGrid) {
    for (double sigma : {0.1, 0.5, 1.0, 2.0, 3.0, 7.5}) {
        const GammaCrit g(sigma);
        const double s2 = sigma * sigma;
        EXPECT_LT(rel(g(0, 0), 9.0 * s2 / 16.0), 1e-12);
        EXPECT_LT(rel(g(0, 1), 9.0 * s2 * sigma / 32.0), 1e-12);
        EXPECT_LT(rel(g(1, 1), 3.0 * s2 * s2 / 16.0), 1e-12);
        EXPECT_NEAR(g.sigma_hurst_correlation(), std::sqrt(3.0) / 2.0, 1e-12);
        EXPECT_LT(rel(g.efficient_information(), 3.0 * s2 * s2 / 64.0), 1e-12);
        EXPECT_LT(rel(efficient_information(sigma), 3.0 * s2 * s2 / 64.0), 1e-15);
        EXPECT_TRUE(g.positive_definite());
        EXPECT_TRUE(g.matrix().isApprox(g.matrix().transpose(), 0.0));
    }
}

TEST(GammaCrit, MfouBlock) {
    const GammaCrit g(2.0, 0.5);
    ASSERT_EQ(g.size(), 3);
    EXPECT_TRUE(g.has_alpha());
    EXPECT_EQ(g(0, 2), 0.0);
    EXPECT_EQ(g(1, 2), 0.0);
    EXPECT_EQ(g(2, 0), 0.0);
    EXPECT_NEAR(g(2, 2), 1.0, 1e-15);
    EXPECT_TRUE(g.positive_definite());
    EXPECT_NEAR(g.efficient_information(), 3.0 * 16.0 / 64.0, 1e-12);
}

TEST(GammaCrit, RejectsNonPositiveParameters) {
    EXPECT_THROW(GammaCrit(0.0), std::domain_error);
    EXPECT_THROW(GammaCrit(1.0, 0.0), std::domain_error);
    EXPECT_THROW(GammaCrit(-1.0, 1.0), std::domain_error);
}

TEST(CriticalConstants, Bundle) {
    const CriticalConstants c = critical_constants(3.0);
    EXPECT_NEAR(c.i_eff, 3.796875, 1e-12);
    EXPECT_NEAR(c.eta, 9.0 * c.k, 1e-14);
    EXPECT_NEAR(c.c_hurst, c.k, 0.0);
    EXPECT_NEAR(critical_constants(1.0, 0.5).c_hurst, 1.0, 1e-15);
}
