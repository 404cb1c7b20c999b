#pragma once

// Bounds and threshold conditions relating PID, Bayesian and frequentist
// Type I error, and a prevalence scan of PID - FT1E.

#include <cmath>
#include <utility>
#include <vector>

#include "bayescal/continuous_oc.hpp"
#include "bayescal/design_model.hpp"

namespace bayescal {

struct PriorOddsRatio {
    double oe_design = 1.0;
    double oe_analysis = 1.0;
    double R = 1.0;
};

/// R = (design prior odds of effectiveness) / (analysis prior odds).
inline PriorOddsRatio prior_odds_ratio(double gamma1_design, double gamma1_analysis) {
    detail::require(gamma1_design > 0.0 && gamma1_design < 1.0, "prior_odds_ratio: design prevalence must lie in (0,1)");
    detail::require(gamma1_analysis > 0.0 && gamma1_analysis < 1.0,
                    "prior_odds_ratio: analysis prevalence must lie in (0,1)");
    PriorOddsRatio r;
    r.oe_design = gamma1_design / (1.0 - gamma1_design);
    r.oe_analysis = gamma1_analysis / (1.0 - gamma1_analysis);
    r.R = r.oe_design / r.oe_analysis;
    return r;
}

/// Upper bound on PID at threshold c: 1 / (R c / (1 - c) + 1). Equals 1 - c at R = 1.
inline double pid_upper_bound(double R, double c) {
    detail::require(R > 0.0, "pid_upper_bound: R must be positive");
    detail::require(c > 0.0 && c < 1.0, "pid_upper_bound: c must lie in (0,1)");
    return 1.0 / (R * c / (1.0 - c) + 1.0);
}

/// Critical threshold c* solving c / (1 - c) = (bcp / bt1e) (gamma1 / gamma0);
/// in large samples PID < FT1E exactly when c < c*.
inline double pid_below_t1e_threshold(double bcp, double bt1e, double gamma1) {
    detail::require(gamma1 > 0.0 && gamma1 < 1.0, "pid_below_t1e_threshold: gamma1 must lie in (0,1)");
    detail::require(bt1e >= 0.0 && bcp >= 0.0, "pid_below_t1e_threshold: rates must be non-negative");
    if (bt1e == 0.0) return 1.0;
    const double odds = (bcp / bt1e) * (gamma1 / (1.0 - gamma1));
    return odds / (1.0 + odds);
}

/// Approximate bounds on PID(c) - FT1E(c): (-(1 - c), c).
inline std::pair<double, double> pid_t1e_difference_bounds(double c) {
    detail::require(c > 0.0 && c < 1.0, "pid_t1e_difference_bounds: c must lie in (0,1)");
    return {-(1.0 - c), c};
}

/// Large-sample starting threshold for a frequentist Type I error target.
inline double asymptotic_threshold(double alpha_star) {
    detail::require(alpha_star > 0.0 && alpha_star < 1.0, "asymptotic_threshold: level must lie in (0,1)");
    return 1.0 - alpha_star;
}

struct DifferencePoint {
    double gamma1 = 0.0;
    double difference = 0.0;  // PID - FT1E
};

struct DifferenceScan {
    std::vector<DifferencePoint> points;
    std::vector<double> crossings;  // prevalences where PID - FT1E changes sign
};

/// Design prior Normal(theta_d, sigma_d) whose prevalence above delta is gamma1.
inline PriorSpec prior_for_prevalence(double gamma1, double sigma_d, double delta) {
    detail::require(gamma1 > 0.0 && gamma1 < 1.0, "prior_for_prevalence: gamma1 must lie in (0,1)");
    detail::require(sigma_d > 0.0, "prior_for_prevalence: sigma_d must be positive");
    return PriorSpec::normal(delta + sigma_d * phi_inv(gamma1), sigma_d);
}

/// PID - FT1E at threshold c as the design-prior prevalence varies with sigma_d held fixed.
inline DifferenceScan difference_scan(double c, double sigma_d, const DesignSpec& tmpl,
                                      const std::vector<double>& gamma1_grid) {
    detail::require(tmpl.endpoint == Endpoint::continuous_single || tmpl.endpoint == Endpoint::continuous_two_arm,
                    "difference_scan: template must be a continuous design");
    detail::require(tmpl.analysis_prior.non_informative(), "difference_scan: template needs a flat analysis prior");
    detail::require(c > 0.0 && c < 1.0, "difference_scan: c must lie in (0,1)");
    DesignSpec base = tmpl;
    base.rule.c = c;
    const NormalModel proto = continuous_model(base);

    auto diff = [&](double g1) {
        NormalModel m = proto;
        m.design = prior_for_prevalence(g1, sigma_d, m.delta);
        const OCResult r = m.at(c);
        return r.pid - r.ft1e;
    };

    DifferenceScan out;
    for (double g1 : gamma1_grid) out.points.push_back({g1, diff(g1)});
    for (std::size_t i = 1; i < out.points.size(); ++i) {
        double lo = out.points[i - 1].gamma1;
        double hi = out.points[i].gamma1;
        double f_lo = out.points[i - 1].difference;
        const double f_hi = out.points[i].difference;
        if (f_lo == 0.0) {
            if (out.crossings.empty() || out.crossings.back() != lo) out.crossings.push_back(lo);
            continue;
        }
        if ((f_lo < 0.0) == (f_hi < 0.0) || f_hi == 0.0) {
            if (f_hi == 0.0) out.crossings.push_back(hi);
            continue;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double f_mid = diff(mid);
            if ((f_mid < 0.0) == (f_lo < 0.0)) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        out.crossings.push_back(0.5 * (lo + hi));
    }
    return out;
}

}  // namespace bayescal
