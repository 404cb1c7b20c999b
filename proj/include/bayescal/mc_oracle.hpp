#pragma once

// Forward-simulation estimates of every OC metric: draw the effect from the
// design prior, draw data, apply the analysis-prior decision rule, tally the
// decision table.

#include <cmath>
#include <cstdint>
#include <vector>

#include "bayescal/binary_oc.hpp"
#include "bayescal/continuous_oc.hpp"
#include "bayescal/design_model.hpp"
#include "bayescal/oc.hpp"
#include "bayescal/parallel.hpp"
#include "bayescal/rng.hpp"
#include "bayescal/tte_oc.hpp"

namespace bayescal {

struct SimCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    std::uint64_t null_success = 0;  // successes in the point-null run
    std::uint64_t null_sims = 0;

    SimCounts& operator+=(const SimCounts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        null_success += o.null_success;
        null_sims += o.null_sims;
        return *this;
    }
};

struct SimReport {
    OCResult estimates;
    OCResult standard_errors;  // same fields, holding standard errors
    std::uint64_t n_sims = 0;
    std::uint64_t seed = 0;
    SimCounts counts;
    std::vector<std::string> undefined;  // metrics with a zero denominator
    std::string rng_version = kRngVersion;
};

inline constexpr std::uint64_t kSimBatch = 1u << 16;
inline constexpr std::uint64_t kNullStreamOffset = 1ULL << 40;

namespace detail {

inline double binom_se(double p, double n) { return n > 0.0 ? std::sqrt(p * (1.0 - p) / n) : kNaN; }

// One simulated trial: returns {effective, success}.
class TrialSimulator {
public:
    explicit TrialSimulator(const DesignSpec& s) : s_(s) {
        switch (s.endpoint) {
            case Endpoint::continuous_single:
            case Endpoint::continuous_two_arm:
                v_ = sampling_sd(s);
                break;
            case Endpoint::tte:
                v_ = std::sqrt(schoenfeld_variance(*s.events, *s.allocation));
                break;
            case Endpoint::binary_single: {
                const int n = *s.n_T;
                single_post_.resize(static_cast<std::size_t>(n) + 1);
                for (int x = 0; x <= n; ++x) {
                    single_post_[static_cast<std::size_t>(x)] =
                        posterior_prob_single(x, n, s.analysis_prior, s.rule.delta);
                }
                break;
            }
            case Endpoint::binary_two_arm:
                tables_ = build_tables(*s.n_T, *s.n_C, s.analysis_arms, s.rule.delta, s.benefit_or_default(),
                                       cached_rule(kDefaultNodes));
                break;
        }
    }

    static double draw(Xoshiro256& rng, const PriorSpec& p) {
        switch (p.kind) {
            case PriorSpec::Kind::normal: return rng.normal(p.mean, p.sd);
            case PriorSpec::Kind::beta: return rng.beta(p.alpha, p.beta);
            case PriorSpec::Kind::point: return p.value;
            case PriorSpec::Kind::flat: break;
        }
        throw DomainError("simulate_oc: cannot draw from a flat prior");
    }

    // Posterior probability of benefit for a normal estimate, in the design's own direction.
    [[nodiscard]] double normal_posterior(double estimate) const {
        const PosteriorNormal p = posterior_params(estimate, v_, s_.analysis_prior);
        const double z = (p.mu_post - s_.rule.delta) / p.sigma_post;
        return s_.rule.direction == Direction::greater ? phi(z) : phi(-z);
    }

    struct Outcome {
        bool effective;
        bool success;
    };

    Outcome design_trial(Xoshiro256& rng) const {
        const double c = s_.rule.c;
        const double delta = s_.rule.delta;
        switch (s_.endpoint) {
            case Endpoint::continuous_single:
            case Endpoint::continuous_two_arm:
            case Endpoint::tte: {
                const double theta = draw(rng, s_.design_prior);
                const double est = rng.normal(theta, v_);
                const bool eff = s_.rule.direction == Direction::greater ? theta > delta : theta < delta;
                return {eff, normal_posterior(est) > c};
            }
            case Endpoint::binary_single: {
                const double theta = draw(rng, s_.design_prior);
                const int x = rng.binomial(*s_.n_T, theta);
                return {theta > delta, single_post_[static_cast<std::size_t>(x)] > c};
            }
            case Endpoint::binary_two_arm: {
                const double t = draw(rng, s_.design_arms.treatment);
                const double u = draw(rng, s_.design_arms.control);
                const int x_T = rng.binomial(*s_.n_T, t);
                const int x_C = rng.binomial(*s_.n_C, u);
                const double effect = s_.benefit_or_default() == Benefit::higher ? t - u : u - t;
                return {effect > delta, tables_.eval(x_T, x_C) > c};
            }
        }
        return {false, false};
    }

    // Success with the effect pinned at the point null.
    bool null_trial(Xoshiro256& rng) const {
        const double c = s_.rule.c;
        switch (s_.endpoint) {
            case Endpoint::continuous_single:
            case Endpoint::continuous_two_arm:
            case Endpoint::tte:
                return normal_posterior(rng.normal(s_.rule.delta, v_)) > c;
            case Endpoint::binary_single:
                return single_post_[static_cast<std::size_t>(rng.binomial(*s_.n_T, s_.rule.delta))] > c;
            case Endpoint::binary_two_arm: {
                const double th = *s_.null_rate;
                const int x_T = rng.binomial(*s_.n_T, th);
                const int x_C = rng.binomial(*s_.n_C, th);
                return tables_.eval(x_T, x_C) > c;
            }
        }
        return false;
    }

private:
    DesignSpec s_;
    double v_ = 1.0;
    std::vector<double> single_post_;
    PosteriorTables tables_;
};

}  // namespace detail

/// Estimates recomputed from tallies; undefined ratios are NaN.
inline SimReport report_from_counts(const SimCounts& k, std::uint64_t n_sims, std::uint64_t seed) {
    SimReport r;
    r.n_sims = n_sims;
    r.seed = seed;
    r.counts = k;
    const double n = static_cast<double>(n_sims);
    const double tp = static_cast<double>(k.tp);
    const double fp = static_cast<double>(k.fp);
    const double tn = static_cast<double>(k.tn);
    const double fn = static_cast<double>(k.fn);
    auto ratio = [&](double num, double den, const char* name) {
        if (den > 0.0) return num / den;
        r.undefined.emplace_back(name);
        return kNaN;
    };
    OCResult& e = r.estimates;
    e.bp = (tp + fp) / n;
    e.gamma1 = (tp + fn) / n;
    e.gamma0 = (fp + tn) / n;
    e.bcp = ratio(tp, tp + fn, "bcp");
    e.bt1e = ratio(fp, fp + tn, "bt1e");
    e.pid = ratio(fp, tp + fp, "pid");
    e.for_ = ratio(fn, fn + tn, "for");
    e.ft1e = ratio(static_cast<double>(k.null_success), static_cast<double>(k.null_sims), "ft1e");

    OCResult& se = r.standard_errors;
    se.bp = detail::binom_se(e.bp, n);
    se.gamma1 = detail::binom_se(e.gamma1, n);
    se.gamma0 = se.gamma1;
    se.bcp = std::isfinite(e.bcp) ? detail::binom_se(e.bcp, tp + fn) : kNaN;
    se.bt1e = std::isfinite(e.bt1e) ? detail::binom_se(e.bt1e, fp + tn) : kNaN;
    se.pid = std::isfinite(e.pid) ? detail::binom_se(e.pid, tp + fp) : kNaN;
    se.for_ = std::isfinite(e.for_) ? detail::binom_se(e.for_, fn + tn) : kNaN;
    se.ft1e = std::isfinite(e.ft1e) ? detail::binom_se(e.ft1e, static_cast<double>(k.null_sims)) : kNaN;
    return r;
}

/// Seeded simulation of n_sims design-prior trials plus n_sims point-null trials.
/// Batches of kSimBatch draw from independent streams (seed, batch), so results
/// do not depend on the thread count.
inline SimReport simulate_oc(const DesignSpec& spec, std::uint64_t n_sims, std::uint64_t seed) {
    detail::require(n_sims >= 1, "simulate_oc: need at least one simulation");
    require_valid(spec);
    const detail::TrialSimulator sim(spec);
    const std::uint64_t batches = (n_sims + kSimBatch - 1) / kSimBatch;
    std::vector<SimCounts> per(batches);
    parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
        const std::uint64_t begin = b * kSimBatch;
        const std::uint64_t count = std::min<std::uint64_t>(kSimBatch, n_sims - begin);
        SimCounts k;
        Xoshiro256 rng(seed, b);
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto o = sim.design_trial(rng);
            if (o.effective) {
                (o.success ? k.tp : k.fn) += 1;
            } else {
                (o.success ? k.fp : k.tn) += 1;
            }
        }
        Xoshiro256 null_rng(seed, b + kNullStreamOffset);
        for (std::uint64_t i = 0; i < count; ++i) k.null_success += sim.null_trial(null_rng) ? 1 : 0;
        k.null_sims = count;
        per[b] = k;
    });
    SimCounts total;
    for (const auto& k : per) total += k;
    return report_from_counts(total, n_sims, seed);
}

struct ConvergencePoint {
    std::uint64_t n_sims = 0;
    OCResult abs_diff;  // |estimate - closed form| per metric
};

/// Per-metric absolute deviation from the closed form along a simulation schedule.
inline std::vector<ConvergencePoint> convergence_check(const DesignSpec& spec,
                                                       const std::vector<std::uint64_t>& schedule,
                                                       std::uint64_t seed) {
    const OCResult exact = evaluate(spec);
    std::vector<ConvergencePoint> out;
    for (std::uint64_t n : schedule) {
        const SimReport r = simulate_oc(spec, n, seed);
        ConvergencePoint p;
        p.n_sims = n;
        p.abs_diff.bp = std::abs(r.estimates.bp - exact.bp);
        p.abs_diff.bcp = std::abs(r.estimates.bcp - exact.bcp);
        p.abs_diff.bt1e = std::abs(r.estimates.bt1e - exact.bt1e);
        p.abs_diff.ft1e = std::abs(r.estimates.ft1e - exact.ft1e);
        p.abs_diff.pid = std::abs(r.estimates.pid - exact.pid);
        p.abs_diff.for_ = std::abs(r.estimates.for_ - exact.for_);
        p.abs_diff.gamma1 = std::abs(r.estimates.gamma1 - exact.gamma1);
        p.abs_diff.gamma0 = std::abs(r.estimates.gamma0 - exact.gamma0);
        out.push_back(p);
    }
    return out;
}

inline json to_json(const SimReport& r) {
    json j;
    j["estimates"] = to_json(r.estimates);
    j["estimates"].erase("warnings");
    j["standard_errors"] = to_json(r.standard_errors);
    j["standard_errors"].erase("warnings");
    j["n_sims"] = r.n_sims;
    j["seed"] = r.seed;
    j["counts"] = {{"tp", r.counts.tp},
                   {"fp", r.counts.fp},
                   {"tn", r.counts.tn},
                   {"fn", r.counts.fn},
                   {"null_success", r.counts.null_success},
                   {"null_sims", r.counts.null_sims}};
    j["undefined"] = r.undefined;
    j["rng_version"] = r.rng_version;
    return j;
}

}  // namespace bayescal
