#pragma once

// Closed-form operating characteristics for normal-outcome designs under
// normal-normal conjugacy, plus the Jeffreys-prior one-sample t rule.

#include <cmath>

#include "bayescal/design_model.hpp"
#include "bayescal/special_fn.hpp"

namespace bayescal {

struct PosteriorNormal {
    double mu_post = 0.0;
    double sigma_post = 1.0;
    double w = 1.0;
};

struct StandardizedBoundaries {
    double a = 0.0;
    double b = 0.0;
    double rho = 0.0;
    double y_c = 0.0;
};

/// Posterior of the effect given a sample mean with standard error v.
inline PosteriorNormal posterior_params(double ybar, double v, const PriorSpec& analysis_prior) {
    detail::require(v > 0.0 && std::isfinite(v), "posterior_params: v must be positive");
    if (analysis_prior.kind == PriorSpec::Kind::flat) return {ybar, v, 1.0};
    detail::require(analysis_prior.kind == PriorSpec::Kind::normal && analysis_prior.sd > 0.0,
                    "posterior_params: analysis prior must be normal or flat");
    const double v2 = v * v;
    const double s2 = 1.0 / (1.0 / (analysis_prior.sd * analysis_prior.sd) + 1.0 / v2);
    const double w = s2 / v2;
    return {w * ybar + (1.0 - w) * analysis_prior.mean, std::sqrt(s2), w};
}

/// One normal effect observed with standard error v; success iff Pr(theta > delta | ybar) > c.
/// Shared by the continuous and (after a sign flip) time-to-event engines.
struct NormalModel {
    double v = 1.0;
    PriorSpec analysis = PriorSpec::flat();
    PriorSpec design = PriorSpec::normal(0.0, 1.0);
    double delta = 0.0;

    [[nodiscard]] PosteriorNormal posterior(double ybar) const { return posterior_params(ybar, v, analysis); }

    [[nodiscard]] double posterior_prob(double ybar) const {
        const PosteriorNormal p = posterior(ybar);
        return detail::phi((p.mu_post - delta) / p.sigma_post);
    }

    /// Sample-mean boundary: success iff ybar > y_c.
    [[nodiscard]] double boundary(double c) const {
        detail::require(c > 0.0 && c < 1.0, "decision_boundary: c must lie in (0,1)");
        const PosteriorNormal p = posterior(0.0);
        if (analysis.kind == PriorSpec::Kind::flat) return delta + phi_inv(c) * v;
        return (delta - (1.0 - p.w) * analysis.mean + phi_inv(c) * p.sigma_post) / p.w;
    }

    [[nodiscard]] StandardizedBoundaries standardized(double c) const {
        detail::require(design.kind == PriorSpec::Kind::normal && design.sd > 0.0,
                        "degenerate design prior: use point_mass_power for a point-mass design prior");
        StandardizedBoundaries s;
        s.y_c = boundary(c);
        const double tot = std::sqrt(design.sd * design.sd + v * v);
        s.rho = design.sd / tot;
        s.a = (delta - design.mean) / design.sd;
        s.b = (s.y_c - design.mean) / tot;
        return s;
    }

    [[nodiscard]] double ft1e(double c) const {
        if (analysis.kind == PriorSpec::Kind::flat) return 1.0 - c;
        return detail::phi(-(boundary(c) - delta) / v);
    }

    [[nodiscard]] DecisionMasses masses(double c) const {
        const StandardizedBoundaries s = standardized(c);
        DecisionMasses m;
        m.tp = bvn_cdf(-s.a, -s.b, s.rho);
        m.fp = bvn_cdf(s.a, -s.b, -s.rho);
        m.fn = bvn_cdf(-s.a, s.b, -s.rho);
        m.tn = bvn_cdf(s.a, s.b, s.rho);
        m.bp = detail::phi(-s.b);
        m.gamma1 = gamma1_of(design, delta, Direction::greater);
        m.gamma0 = gamma0_of(design, delta, Direction::greater);
        m.ft1e = ft1e(c);
        return m;
    }

    [[nodiscard]] OCResult at(double c) const { return oc_from_masses(masses(c)); }

    /// Power at a fixed true effect (point-mass design prior).
    [[nodiscard]] double power_at(double theta, double c) const { return detail::phi(-(boundary(c) - theta) / v); }
};

/// Sampling standard error of the effect estimate.
inline double sampling_sd(const DesignSpec& s) {
    switch (s.endpoint) {
        case Endpoint::continuous_single:
            return *s.sigma_T / std::sqrt(static_cast<double>(*s.n_T));
        case Endpoint::continuous_two_arm:
            return std::sqrt(*s.sigma_T * *s.sigma_T / *s.n_T + *s.sigma_C * *s.sigma_C / *s.n_C);
        default:
            throw DomainError("sampling_sd: not a continuous endpoint");
    }
}

inline NormalModel continuous_model(const DesignSpec& s) {
    detail::require(s.endpoint == Endpoint::continuous_single || s.endpoint == Endpoint::continuous_two_arm,
                    "continuous engine: endpoint must be continuous");
    require_valid(s);
    return NormalModel{sampling_sd(s), s.analysis_prior, s.design_prior, s.rule.delta};
}

inline double decision_boundary(const DesignSpec& s) { return continuous_model(s).boundary(s.rule.c); }

inline OCResult oc_continuous(const DesignSpec& s) { return continuous_model(s).at(s.rule.c); }

/// Frequentist power 1 - Phi(Phi^{-1}(c) - (theta_A - delta)/v) for a point-mass design prior
/// (general analysis prior: success probability of ybar > y_c at theta_A).
inline double point_mass_power(const DesignSpec& s) {
    NormalModel m = continuous_model(s);
    detail::require(s.design_prior.kind == PriorSpec::Kind::point, "point_mass_power: design prior must be a point mass");
    return m.power_at(s.design_prior.value, s.rule.c);
}

struct JeffreysDecision {
    bool success = false;
    double posterior_prob = 0.0;
};

/// Single-arm rule under the Jeffreys prior with unknown variance; coincides with
/// the one-sided one-sample t-test at level 1 - c.
inline JeffreysDecision jeffreys_t_success(double ybar, double s, int n, double delta, double c) {
    detail::require(n >= 2, "jeffreys_t_success: need n >= 2");
    detail::require(s > 0.0, "jeffreys_t_success: s must be positive");
    const double t = (ybar - delta) / (s / std::sqrt(static_cast<double>(n)));
    const double p = student_t_cdf(t, n - 1.0);
    return {p > c, p};
}

}  // namespace bayescal
