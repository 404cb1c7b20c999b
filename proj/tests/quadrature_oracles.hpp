#pragma once

// Brute-force quadrature references shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace bayescal::fuzz {

/// Pr(U <= a, V <= b) by nested adaptive quadrature of the bivariate density.
inline double bvn_bruteforce(double a, double b, double rho) {
    namespace bq = boost::math::quadrature;
    const double s = std::sqrt(1.0 - rho * rho);
    const double norm = 1.0 / (2.0 * std::numbers::pi * s);
    const double inf = std::numeric_limits<double>::infinity();
    auto inner = [&](double u) {
        auto dens = [&](double v) { return norm * std::exp(-(u * u - 2.0 * rho * u * v + v * v) / (2.0 * s * s)); };
        return bq::gauss_kronrod<double, 61>::integrate(dens, -inf, b, 15, 1e-14);
    };
    return bq::gauss_kronrod<double, 61>::integrate(inner, -inf, a, 15, 1e-13);
}

/// Lower quadrant with relative precision: 50-digit arithmetic, so tails far
/// below the double range stay representable until the final conversion.
inline double bvn_tail_oracle(double a, double b, double rho) {
    using Real = boost::multiprecision::cpp_bin_float_50;
    const Real lo = std::min(a, b), hi = std::max(a, b), r = rho;
    const Real s = sqrt(1 - r * r);
    const Real root2 = sqrt(Real(2));
    const Real norm = 1 / sqrt(2 * boost::math::constants::pi<Real>());
    auto f = [&](const Real& x) { return norm * exp(-x * x / 2) * boost::math::erfc(-(hi - r * x) / s / root2) / 2; };
    // The density factor drops by more than e^-36 over 12 units below lo <= -3.
    constexpr int panels = 400;
    Real acc = 0;
    for (int p = 0; p < panels; ++p) {
        const Real x0 = lo - 12 + Real(12) * p / panels;
        acc += boost::math::quadrature::gauss<Real, 20>::integrate(f, x0, x0 + Real(12) / panels);
    }
    return static_cast<double>(acc);
}

}  // namespace bayescal::fuzz
