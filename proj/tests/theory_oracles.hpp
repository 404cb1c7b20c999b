#pragma once

// Independent check of the prior-odds PID bound. The effect takes finitely many
// values; the design prior reweights the analysis prior by one factor above the
// margin and another below it, so both conditional priors agree while the prior
// odds differ by R.

#include <cmath>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "fuzz_designs.hpp"

namespace bayescal::fuzz {

struct BoundCase {
    double pid = 0.0;  // NaN when no outcome leads to success
    double gamma1_design = 0.0;
    double gamma1_analysis = 0.0;
    double c = 0.0;
};

struct FiniteSupportPrior {
    std::vector<double> theta;
    std::vector<double> w_a;
    std::vector<double> w_d;
    double delta = 0.0;
};

inline FiniteSupportPrior finite_support(DesignFuzzer& fz, double lo, double hi, double delta) {
    FiniteSupportPrior p;
    p.delta = delta;
    const int k = fz.integer(2, 12);
    const double up = std::exp(fz.uniform(std::log(0.1), std::log(10.0)));
    const double down = std::exp(fz.uniform(std::log(0.1), std::log(10.0)));
    for (int i = 0; i < k; ++i) p.theta.push_back(fz.uniform(lo, hi));
    // Both sides of the margin must carry mass.
    p.theta[0] = delta + 0.5 * (hi - delta);
    p.theta[1] = delta - 0.5 * (delta - lo);
    for (int i = 0; i < k; ++i) {
        const double w = fz.uniform(0.05, 1.0);
        p.w_a.push_back(w);
        p.w_d.push_back(w * (p.theta[i] > delta ? up : down));
    }
    double za = 0, zd = 0;
    for (int i = 0; i < k; ++i) {
        za += p.w_a[i];
        zd += p.w_d[i];
    }
    for (int i = 0; i < k; ++i) {
        p.w_a[i] /= za;
        p.w_d[i] /= zd;
    }
    return p;
}

template <class Lik>
BoundCase accumulate(const FiniteSupportPrior& p, double c, const std::vector<double>& outcomes, Lik lik) {
    BoundCase b;
    b.c = c;
    for (std::size_t i = 0; i < p.theta.size(); ++i) {
        if (p.theta[i] > p.delta) {
            b.gamma1_design += p.w_d[i];
            b.gamma1_analysis += p.w_a[i];
        }
    }
    double false_succ = 0, succ = 0;
    for (double y : outcomes) {
        double a1 = 0, a = 0, d0 = 0, d = 0;
        for (std::size_t i = 0; i < p.theta.size(); ++i) {
            const double f = lik(y, p.theta[i]);
            a += p.w_a[i] * f;
            d += p.w_d[i] * f;
            if (p.theta[i] > p.delta) {
                a1 += p.w_a[i] * f;
            } else {
                d0 += p.w_d[i] * f;
            }
        }
        if (a > 0 && a1 / a > c) {
            succ += d;
            false_succ += d0;
        }
    }
    b.pid = succ > 0 ? false_succ / succ : std::nan("");
    return b;
}

/// Normal sampling model for the estimate, outcomes on a fine grid.
inline BoundCase normal_bound_case(DesignFuzzer& fz) {
    const double delta = fz.uniform(-0.3, 0.3);
    const FiniteSupportPrior p = finite_support(fz, delta - 1.0, delta + 1.0, delta);
    const double v = fz.uniform(0.05, 0.6);
    const double c = fz.uniform(0.5, 0.995);
    std::vector<double> ys;
    for (int j = 0; j <= 4000; ++j) ys.push_back(delta - 1.0 - 8 * v + j * (2.0 + 16 * v) / 4000.0);
    boost::math::normal_distribution<double> z;
    return accumulate(p, c, ys, [&](double y, double th) { return boost::math::pdf(z, (y - th) / v); });
}

/// Binomial sampling model, all outcomes enumerated.
inline BoundCase binomial_bound_case(DesignFuzzer& fz) {
    const double delta = fz.uniform(0.1, 0.9);
    const FiniteSupportPrior p = finite_support(fz, 0.01, 0.99, delta);
    const int n = fz.integer(1, 60);
    const double c = fz.uniform(0.5, 0.995);
    std::vector<double> xs;
    for (int x = 0; x <= n; ++x) xs.push_back(x);
    return accumulate(p, c, xs, [&](double x, double th) {
        return boost::math::pdf(boost::math::binomial_distribution<double>(n, th), x);
    });
}

}  // namespace bayescal::fuzz
