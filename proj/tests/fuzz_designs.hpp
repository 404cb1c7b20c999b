#pragma once

// Random valid designs for property checks, one generator per endpoint family.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bayescal/design_model.hpp"

namespace bayescal::fuzz {

class DesignFuzzer {
public:
    explicit DesignFuzzer(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::mt19937_64& engine() { return rng_; }

    PriorSpec normal_prior(double mean_span, double sd_lo, double sd_hi) {
        return PriorSpec::normal(uniform(-mean_span, mean_span), std::exp(uniform(std::log(sd_lo), std::log(sd_hi))));
    }

    PriorSpec beta_prior(double lo, double hi) { return PriorSpec::beta_dist(uniform(lo, hi), uniform(lo, hi)); }

    /// Flat, vague or informative normal analysis prior.
    PriorSpec analysis_normal() {
        switch (integer(0, 2)) {
            case 0: return PriorSpec::flat();
            case 1: return PriorSpec::normal(0.0, kNonInformativeSd);
            default: return normal_prior(0.5, 0.05, 2.0);
        }
    }

    DesignSpec continuous_single() {
        DesignSpec s;
        s.endpoint = Endpoint::continuous_single;
        s.n_T = integer(5, 500);
        s.sigma_T = uniform(0.5, 3.0);
        s.analysis_prior = analysis_normal();
        s.design_prior = normal_prior(0.5, 0.03, 1.0);
        s.rule = {uniform(-0.3, 0.3), uniform(0.5, 0.995), Direction::greater};
        return s;
    }

    DesignSpec continuous_two_arm() {
        DesignSpec s = continuous_single();
        s.endpoint = Endpoint::continuous_two_arm;
        s.n_C = integer(5, 500);
        s.sigma_C = uniform(0.5, 3.0);
        return s;
    }

    DesignSpec tte() {
        DesignSpec s;
        s.endpoint = Endpoint::tte;
        s.events = integer(20, 800);
        s.allocation = uniform(0.2, 0.8);
        s.analysis_prior = analysis_normal();
        s.design_prior = normal_prior(0.4, 0.03, 0.8);
        s.rule = {uniform(-0.3, 0.2), uniform(0.5, 0.995), Direction::less};
        return s;
    }

    DesignSpec binary_single() {
        DesignSpec s;
        s.endpoint = Endpoint::binary_single;
        s.n_T = integer(1, 150);
        s.analysis_prior = beta_prior(0.5, 10.0);
        s.design_prior = beta_prior(0.5, 20.0);
        s.rule = {uniform(0.05, 0.95), uniform(0.5, 0.995), Direction::greater};
        return s;
    }

    DesignSpec binary_two_arm(int max_n = 60) {
        DesignSpec s;
        s.endpoint = Endpoint::binary_two_arm;
        s.n_T = integer(1, max_n);
        s.n_C = integer(1, max_n);
        s.null_rate = uniform(0.1, 0.9);
        s.benefit = coin() ? Benefit::higher : Benefit::lower;
        s.analysis_arms = {beta_prior(1.0, 10.0), beta_prior(1.0, 10.0)};
        s.design_arms = {beta_prior(1.0, 30.0), beta_prior(1.0, 30.0)};
        s.rule = {uniform(-0.2, 0.2), uniform(0.5, 0.995), Direction::greater};
        return s;
    }

    DesignSpec of(Endpoint e) {
        switch (e) {
            case Endpoint::continuous_single: return continuous_single();
            case Endpoint::continuous_two_arm: return continuous_two_arm();
            case Endpoint::tte: return tte();
            case Endpoint::binary_single: return binary_single();
            case Endpoint::binary_two_arm: return binary_two_arm();
        }
        return continuous_single();
    }

    /// Same design with the analysis prior set equal to the design prior.
    static DesignSpec matched(DesignSpec s) {
        if (s.endpoint == Endpoint::binary_two_arm) {
            s.analysis_arms = s.design_arms;
        } else {
            s.analysis_prior = s.design_prior;
        }
        return s;
    }

private:
    std::mt19937_64 rng_;
};

inline const std::vector<Endpoint>& all_endpoints() {
    static const std::vector<Endpoint> e = {Endpoint::continuous_single, Endpoint::continuous_two_arm, Endpoint::tte,
                                            Endpoint::binary_single, Endpoint::binary_two_arm};
    return e;
}

}  // namespace bayescal::fuzz
