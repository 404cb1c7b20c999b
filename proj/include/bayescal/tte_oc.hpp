#pragma once

// Time-to-event designs: the log hazard ratio estimate is treated as normal with
// the Schoenfeld variance, and benefit (theta < delta) is mapped onto the
// continuous engine by negating the effect axis.

#include <cmath>

#include "bayescal/continuous_oc.hpp"
#include "bayescal/design_model.hpp"

namespace bayescal {

struct TteApprox {
    double v2 = 0.0;
    int D = 0;
    double r = 0.5;
};

/// Sampling variance of the log hazard ratio estimate, 1 / (D r (1 - r)).
inline double schoenfeld_variance(int D, double r) {
    detail::require(D >= 1, "schoenfeld_variance: need at least one event");
    detail::require(r > 0.0 && r < 1.0, "schoenfeld_variance: allocation must lie in (0,1)");
    return 1.0 / (D * r * (1.0 - r));
}

inline PriorSpec mirror_prior(const PriorSpec& p) {
    PriorSpec q = p;
    q.mean = -p.mean;
    q.value = -p.value;
    return q;
}

/// The equivalent single-arm continuous design on the negated effect axis.
/// The standard error is carried as sigma_T with n_T = 1.
inline DesignSpec flip(const DesignSpec& s) {
    detail::require(s.endpoint == Endpoint::tte, "flip: endpoint must be tte");
    DesignSpec f;
    f.endpoint = Endpoint::continuous_single;
    f.n_T = 1;
    f.sigma_T = std::sqrt(schoenfeld_variance(*s.events, *s.allocation));
    f.analysis_prior = mirror_prior(s.analysis_prior);
    f.design_prior = mirror_prior(s.design_prior);
    f.rule = {-s.rule.delta, s.rule.c, Direction::greater};
    return f;
}

inline NormalModel tte_model(const DesignSpec& s) {
    require_valid(s);
    return continuous_model(flip(s));
}

inline OCResult oc_tte(const DesignSpec& s) { return tte_model(s).at(s.rule.c); }

}  // namespace bayescal
