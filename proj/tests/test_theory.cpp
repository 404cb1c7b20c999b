#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bayescal/binary_oc.hpp"
#include "bayescal/calibrate.hpp"
#include "bayescal/oc.hpp"
#include "bayescal/theory.hpp"
#include "fuzz_designs.hpp"
#include "theory_oracles.hpp"

using namespace bayescal;

namespace {

DesignSpec fig1_flat() {
    DesignSpec s;
    s.endpoint = Endpoint::continuous_single;
    s.n_T = 74;
    s.sigma_T = 1.0;
    s.analysis_prior = PriorSpec::flat();
    s.design_prior = PriorSpec::normal(0.0, 0.15);
    s.rule = {0.0, 0.975, Direction::greater};
    return s;
}

}  // namespace

TEST(PidUpperBound, Values) {
    EXPECT_NEAR(pid_upper_bound(1.0, 0.975), 0.025, 1e-15);
    EXPECT_NEAR(pid_upper_bound(2.0, 0.9), 1.0 / 19.0, 1e-15);
    EXPECT_THROW(pid_upper_bound(0.0, 0.9), DomainError);
    EXPECT_THROW(pid_upper_bound(1.0, 1.0), DomainError);
}

TEST(PidUpperBound, DecreasingInOddsRatioAndThreshold) {
    for (double R = 0.1; R < 10; R *= 1.3) {
        for (double c = 0.05; c < 0.95; c += 0.05) {
            EXPECT_GT(pid_upper_bound(R, c), pid_upper_bound(R * 1.3, c));
            EXPECT_GT(pid_upper_bound(R, c), pid_upper_bound(R, c + 0.05));
        }
    }
}

TEST(PriorOddsRatio, Definition) {
    const PriorOddsRatio r = prior_odds_ratio(0.75, 0.5);
    EXPECT_DOUBLE_EQ(r.oe_design, 3.0);
    EXPECT_DOUBLE_EQ(r.oe_analysis, 1.0);
    EXPECT_DOUBLE_EQ(r.R, 3.0);
    EXPECT_THROW(prior_odds_ratio(1.0, 0.5), DomainError);
}

TEST(PidBelowT1eThreshold, WorkedExamples) {
    EXPECT_NEAR(pid_below_t1e_threshold(0.80, 0.02, 0.5), 0.9756, 1e-4);
    EXPECT_NEAR(pid_below_t1e_threshold(0.80, 0.02, 0.7), 0.9894, 1e-4);
    EXPECT_NEAR(pid_below_t1e_threshold(0.80, 0.02, 0.1), 0.8163, 1e-4);
    EXPECT_EQ(pid_below_t1e_threshold(0.80, 0.0, 0.3), 1.0);
}

TEST(DifferenceBounds, Values) {
    const auto [lo, hi] = pid_t1e_difference_bounds(0.975);
    EXPECT_NEAR(lo, -0.025, 1e-15);
    EXPECT_EQ(hi, 0.975);
    const auto [l5, h5] = pid_t1e_difference_bounds(0.5);
    EXPECT_EQ(l5, -0.5);
    EXPECT_EQ(h5, 0.5);
}

TEST(AsymptoticThreshold, Values) {
    EXPECT_DOUBLE_EQ(asymptotic_threshold(0.025), 0.975);
    EXPECT_DOUBLE_EQ(asymptotic_threshold(0.5), 0.5);
    EXPECT_DOUBLE_EQ(asymptotic_threshold(0.01), 0.99);
}

TEST(PriorOddsBound, FiniteSupportNormalModel) {
    fuzz::DesignFuzzer fz(97);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const fuzz::BoundCase b = fuzz::normal_bound_case(fz);
        if (std::isnan(b.pid)) continue;
        const double R = prior_odds_ratio(b.gamma1_design, b.gamma1_analysis).R;
        EXPECT_LE(b.pid, pid_upper_bound(R, b.c) + 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 900);
}

TEST(PriorOddsBound, FiniteSupportBinomialModel) {
    fuzz::DesignFuzzer fz(101);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const fuzz::BoundCase b = fuzz::binomial_bound_case(fz);
        if (std::isnan(b.pid)) continue;
        const double R = prior_odds_ratio(b.gamma1_design, b.gamma1_analysis).R;
        EXPECT_LE(b.pid, pid_upper_bound(R, b.c) + 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 500);
}

TEST(PrevalenceFormulas, RecomputedFromOcFields) {
    fuzz::DesignFuzzer fz(103);
    for (Endpoint e : fuzz::all_endpoints()) {
        const int reps = e == Endpoint::binary_two_arm ? 40 : 300;
        for (int i = 0; i < reps; ++i) {
            const DesignSpec s = e == Endpoint::binary_two_arm ? fz.binary_two_arm(30) : fz.of(e);
            const OCResult r = evaluate(s);
            if (std::isnan(r.pid) || std::isnan(r.for_)) continue;
            // Absolute error in the recomputed masses, divided by the denominators.
            // Two-arm prevalences come from a separate quadrature.
            const double eps = e == Endpoint::binary_two_arm ? 10 * kQuadratureTolerance : 1e-12;
            if (r.bp < 1e-6 || 1 - r.bp < 1e-6) continue;
            const double pid = r.bt1e * r.gamma0 / (r.bcp * r.gamma1 + r.bt1e * r.gamma0);
            const double fo = r.gamma1 * (1 - r.bcp) / (r.gamma1 * (1 - r.bcp) + r.gamma0 * (1 - r.bt1e));
            EXPECT_NEAR(r.pid, pid, std::max(1e-9, eps / r.bp));
            EXPECT_NEAR(r.for_, fo, std::max(1e-9, eps / (1 - r.bp)));
        }
    }
}

TEST(DifferenceBounds, HoldForFlatAnalysisPriors) {
    fuzz::DesignFuzzer fz(107);
    for (int i = 0; i < 1000; ++i) {
        DesignSpec s = fz.coin() ? fz.continuous_single() : fz.continuous_two_arm();
        s.analysis_prior = PriorSpec::flat();
        const OCResult r = evaluate(s);
        if (std::isnan(r.pid)) continue;
        const auto [lo, hi] = pid_t1e_difference_bounds(s.rule.c);
        EXPECT_GE(r.pid - r.ft1e, lo - 1e-6);
        EXPECT_LE(r.pid - r.ft1e, hi + 1e-6);
    }
}

TEST(DifferenceScan, PrevalenceLimits) {
    for (double c : {0.9, 0.95, 0.975}) {
        const DifferenceScan scan = difference_scan(c, 0.15, fig1_flat(), {1e-12, 1.0 - 1e-12});
        EXPECT_NEAR(scan.points[0].difference, c, 0.01);
        EXPECT_NEAR(scan.points[1].difference, -(1.0 - c), 0.002);
    }
}

TEST(DifferenceScan, CrossingRisesWithThreshold) {
    const std::vector<double> grid = linear_grid(0.01, 0.99, 99);
    double prev = 0.0;
    for (double c : {0.9, 0.95, 0.975}) {
        const DifferenceScan scan = difference_scan(c, 0.15, fig1_flat(), grid);
        ASSERT_EQ(scan.crossings.size(), 1u) << c;
        EXPECT_GT(scan.crossings[0], prev);
        prev = scan.crossings[0];
        // Above the crossing PID falls below the frequentist error.
        for (const auto& p : scan.points) {
            if (p.gamma1 < scan.crossings[0] - 1e-9) {
                EXPECT_GT(p.difference, 0.0);
            } else if (p.gamma1 > scan.crossings[0] + 1e-9) {
                EXPECT_LT(p.difference, 0.0);
            }
        }
    }
}

TEST(DifferenceScan, RejectsInformativeTemplate) {
    DesignSpec s = fig1_flat();
    s.analysis_prior = PriorSpec::normal(0.0, 1.0);
    EXPECT_THROW(difference_scan(0.9, 0.15, s, {0.5}), DomainError);
}

TEST(PidFt1eSign, ConsistentInLargeSamples) {
    fuzz::DesignFuzzer fz(109);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        DesignSpec s = fz.continuous_single();
        s.n_T = fz.integer(500, 5000);
        s.analysis_prior = fz.coin() ? PriorSpec::flat() : PriorSpec::normal(0.0, kNonInformativeSd);
        const OCResult r = evaluate(s);
        if (std::isnan(r.pid) || !(r.gamma1 > 0.0 && r.gamma1 < 1.0)) continue;
        const double c_star = pid_below_t1e_threshold(r.bcp, r.bt1e, r.gamma1);
        if (std::abs(s.rule.c - c_star) < 0.002) continue;
        EXPECT_EQ(r.pid < r.ft1e, s.rule.c < c_star) << s.rule.c << ' ' << c_star;
        ++checked;
    }
    EXPECT_GT(checked, 900);
}
