#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>

#include "bayescal/mc_oracle.hpp"
#include "bayescal/presets.hpp"
#include "fuzz_designs.hpp"

using namespace bayescal;

namespace {

DesignSpec fig1_point(double theta) {
    DesignSpec s;
    s.endpoint = Endpoint::continuous_single;
    s.n_T = 74;
    s.sigma_T = 1.0;
    s.analysis_prior = PriorSpec::flat();
    s.design_prior = PriorSpec::point(theta);
    s.rule = {0.0, 0.975, Direction::greater};
    return s;
}

}  // namespace

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Xoshiro256 a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    bool differ_stream = false, differ_seed = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differ_stream |= x != c.next();
        differ_seed |= x != d.next();
    }
    EXPECT_TRUE(differ_stream);
    EXPECT_TRUE(differ_seed);
    EXPECT_STREQ(kRngVersion, "xoshiro256ss/splitmix64/v1");
}

TEST(Rng, UniformInUnitInterval) {
    Xoshiro256 r(7, 0);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
}

TEST(Rng, BetaAndBinomialMoments) {
    Xoshiro256 r(11, 0);
    const int n = 200000;
    for (auto [a, b] : {std::pair{0.5, 0.5}, {2.0, 5.0}, {67.0, 59.0}}) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += r.beta(a, b);
        const boost::math::beta_distribution<double> dist(a, b);
        EXPECT_NEAR(s / n, boost::math::mean(dist), 4 * boost::math::standard_deviation(dist) / std::sqrt(n));
    }
    for (auto [m, p] : {std::pair{10, 0.3}, {344, 0.52}, {1000, 0.02}}) {
        double s = 0;
        for (int i = 0; i < n; ++i) {
            const int x = r.binomial(m, p);
            ASSERT_GE(x, 0);
            ASSERT_LE(x, m);
            s += x;
        }
        const boost::math::binomial_distribution<double> dist(m, p);
        EXPECT_NEAR(s / n, boost::math::mean(dist), 4 * boost::math::standard_deviation(dist) / std::sqrt(n));
    }
}

TEST(Simulate, DeterministicForSeed) {
    const DesignSpec s = load_preset("figS2-neutral");
    const SimReport a = simulate_oc(s, 150000, 42);
    const SimReport b = simulate_oc(s, 150000, 42);
    const SimReport c = simulate_oc(s, 150000, 43);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    EXPECT_NE(to_json(a).dump(), to_json(c).dump());
    EXPECT_EQ(a.rng_version, kRngVersion);
}

TEST(Simulate, PrefixBatchesAreShared) {
    // The first batch of a longer run uses the same stream as a one-batch run.
    const DesignSpec s = load_preset("fig1-neutral");
    const SimReport one = simulate_oc(s, kSimBatch, 5);
    const SimReport two = simulate_oc(s, 2 * kSimBatch, 5);
    EXPECT_LE(one.counts.tp, two.counts.tp);
    EXPECT_LE(one.counts.null_success, two.counts.null_success);
}

TEST(Simulate, TalliesAddUp) {
    fuzz::DesignFuzzer fz(149);
    for (Endpoint e : fuzz::all_endpoints()) {
        const DesignSpec s = e == Endpoint::binary_two_arm ? fz.binary_two_arm(20) : fz.of(e);
        const SimReport r = simulate_oc(s, 10000, 1);
        const auto& k = r.counts;
        EXPECT_EQ(k.tp + k.fp + k.tn + k.fn, 10000u);
        EXPECT_EQ(k.null_sims, 10000u);
        EXPECT_NEAR(r.estimates.gamma1 + r.estimates.gamma0, 1.0, 1e-15);
        if (!std::isnan(r.estimates.bcp)) {
            EXPECT_NEAR(r.estimates.bp, r.estimates.gamma1 * r.estimates.bcp + r.estimates.gamma0 * r.estimates.bt1e,
                        1e-12);
        }
    }
}

TEST(Simulate, PointMassPowerMatchesClosedForm) {
    for (double theta : {0.0, 0.2, 0.4}) {
        const DesignSpec s = fig1_point(theta);
        const SimReport r = simulate_oc(s, 400000, 17);
        const double power = point_mass_power(s);
        EXPECT_LE(std::abs(r.estimates.bp - power), 3.29 * std::sqrt(power * (1 - power) / 400000) + 1e-12) << theta;
    }
}

TEST(Simulate, ReportFromCountsMarksUndefined) {
    SimCounts k;
    k.tp = 10;
    k.fn = 5;
    k.null_sims = 15;
    k.null_success = 3;
    const SimReport r = report_from_counts(k, 15, 0);
    EXPECT_TRUE(std::isnan(r.estimates.bt1e));
    EXPECT_TRUE(std::isnan(r.standard_errors.bt1e));
    EXPECT_EQ(r.estimates.pid, 0.0);
    EXPECT_DOUBLE_EQ(r.estimates.bcp, 10.0 / 15.0);
    ASSERT_EQ(r.undefined.size(), 1u);
    EXPECT_EQ(r.undefined[0], "bt1e");
    EXPECT_TRUE(to_json(r)["estimates"]["bt1e"].is_null());
}

TEST(Simulate, RejectsBadInput) {
    EXPECT_THROW(simulate_oc(load_preset("fig1-neutral"), 0, 1), DomainError);
    DesignSpec s = load_preset("fig1-neutral");
    s.rule.c = 1.5;
    EXPECT_THROW(simulate_oc(s, 10, 1), ValidationError);
}

TEST(Convergence, DeviationShrinks) {
    const DesignSpec s = load_preset("fig1-neutral");
    const auto pts = convergence_check(s, {1000, 1000000}, 9);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[1].n_sims, 1000000u);
    // Three standard errors at each size.
    EXPECT_LT(pts[0].abs_diff.bp, 3 * std::sqrt(0.25 / 1000));
    EXPECT_LT(pts[1].abs_diff.bp, 3 * std::sqrt(0.25 / 1000000));
    EXPECT_LT(pts[1].abs_diff.gamma1, 3 * std::sqrt(0.25 / 1000000));
}
