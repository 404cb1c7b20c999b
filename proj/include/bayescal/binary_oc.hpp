#pragma once

// Exact operating characteristics for binary endpoints. Single-arm designs sum
// over the Beta-Binomial predictive; two-arm designs enumerate the joint
// outcome grid with Gauss-Legendre posteriors for the risk difference.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bayescal/design_model.hpp"
#include "bayescal/parallel.hpp"
#include "bayescal/special_fn.hpp"

namespace bayescal {

inline constexpr int kDefaultNodes = 256;
inline constexpr int kRefinedNodes = 512;
inline constexpr double kQuadratureTolerance = 1e-7;

// ---------------------------------------------------------------------------
// Decision grid: every outcome cell with its posterior, shared by both designs
// ---------------------------------------------------------------------------

struct GridCell {
    double post = 0.0;       // analysis-prior posterior probability of benefit
    double m = 0.0;          // design-prior predictive mass
    double mq = 0.0;         // m times design-posterior probability of benefit
    double mnq = 0.0;        // m times its complement
    double null_mass = 0.0;  // sampling mass at the point null
};

/// Outcome cells sorted by posterior with suffix sums, so the OC for any
/// threshold is a binary search away. Immutable once built.
class DecisionGrid {
public:
    DecisionGrid() = default;

    DecisionGrid(std::vector<GridCell> cells, double gamma1, double gamma0, std::vector<std::string> warnings = {})
        : gamma1_(gamma1), gamma0_(gamma0), warnings_(std::move(warnings)) {
        std::stable_sort(cells.begin(), cells.end(),
                         [](const GridCell& a, const GridCell& b) { return a.post < b.post; });
        const std::size_t n = cells.size();
        post_.resize(n);
        s_m_.assign(n + 1, 0.0L);
        s_mq_.assign(n + 1, 0.0L);
        s_mnq_.assign(n + 1, 0.0L);
        s_null_.assign(n + 1, 0.0L);
        p_mq_.assign(n + 1, 0.0L);
        p_mnq_.assign(n + 1, 0.0L);
        for (std::size_t i = 0; i < n; ++i) {
            p_mq_[i + 1] = p_mq_[i] + cells[i].mq;
            p_mnq_[i + 1] = p_mnq_[i] + cells[i].mnq;
        }
        for (std::size_t i = n; i-- > 0;) {
            post_[i] = cells[i].post;
            s_m_[i] = s_m_[i + 1] + cells[i].m;
            s_mq_[i] = s_mq_[i + 1] + cells[i].mq;
            s_mnq_[i] = s_mnq_[i + 1] + cells[i].mnq;
            s_null_[i] = s_null_[i + 1] + cells[i].null_mass;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == 0 || post_[i] != post_[i - 1]) {
                starts_.push_back(i);
                values_.push_back(post_[i]);
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return post_.size(); }

    /// Distinct achievable posterior values, ascending.
    [[nodiscard]] const std::vector<double>& achievable() const noexcept { return values_; }

    /// Index of the first cell of each distinct posterior value.
    [[nodiscard]] const std::vector<std::size_t>& group_starts() const noexcept { return starts_; }

    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    [[nodiscard]] double gamma1() const noexcept { return gamma1_; }
    [[nodiscard]] double gamma0() const noexcept { return gamma0_; }

    /// Sum of m over all cells and of m q over all cells (normalization checks).
    [[nodiscard]] double total_mass() const noexcept { return static_cast<double>(s_m_.empty() ? 0.0L : s_m_[0]); }
    [[nodiscard]] double total_mq() const noexcept { return static_cast<double>(s_mq_.empty() ? 0.0L : s_mq_[0]); }

    /// First cell index whose posterior strictly exceeds c.
    [[nodiscard]] std::size_t first_success(double c) const {
        return static_cast<std::size_t>(std::upper_bound(post_.begin(), post_.end(), c) - post_.begin());
    }

    /// OC when exactly the cells [idx, size) succeed.
    [[nodiscard]] OCResult at_index(std::size_t idx) const {
        DecisionMasses d;
        d.gamma1 = gamma1_;
        d.gamma0 = gamma0_;
        d.bp = static_cast<double>(s_m_[idx]);
        d.tp = static_cast<double>(s_mq_[idx]);
        d.fp = static_cast<double>(s_mnq_[idx]);
        // Failure masses summed directly: subtracting from gamma loses digits
        // when nearly every cell succeeds.
        d.fn = static_cast<double>(p_mq_[idx]);
        d.tn = static_cast<double>(p_mnq_[idx]);
        d.ft1e = static_cast<double>(s_null_[idx]);
        OCResult r = oc_from_masses(d);
        r.warnings = warnings_;
        return r;
    }

    [[nodiscard]] OCResult at(double c) const { return at_index(first_success(c)); }

private:
    std::vector<double> post_;
    std::vector<long double> s_m_, s_mq_, s_mnq_, s_null_;
    std::vector<long double> p_mq_, p_mnq_;
    std::vector<std::size_t> starts_;
    std::vector<double> values_;
    double gamma1_ = kNaN;
    double gamma0_ = kNaN;
    std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// Single arm
// ---------------------------------------------------------------------------

/// Pr(theta > delta | x of n) under the conjugate Beta posterior.
inline double posterior_prob_single(int x, int n, const PriorSpec& prior, double delta) {
    detail::require(n >= 0 && x >= 0 && x <= n, "posterior_prob_single: need 0 <= x <= n");
    detail::require(delta > 0.0 && delta < 1.0, "posterior_prob_single: delta must lie in (0,1)");
    detail::require(prior.kind == PriorSpec::Kind::beta, "posterior_prob_single: analysis prior must be beta");
    return reg_inc_beta_upper(delta, prior.alpha + x, prior.beta + (n - x));
}

/// Smallest x whose posterior exceeds c; n + 1 when none does.
inline int critical_count(int n, const PriorSpec& prior, double delta, double c) {
    for (int x = 0; x <= n; ++x) {
        if (posterior_prob_single(x, n, prior, delta) > c) return x;
    }
    return n + 1;
}

struct SingleArmGrid {
    int x_c = 0;
    std::vector<double> m_d;
    std::vector<double> q_d;
    std::vector<double> post;
};

inline SingleArmGrid single_arm_grid(const DesignSpec& s) {
    detail::require(s.endpoint == Endpoint::binary_single, "single_arm_grid: endpoint must be binary_single");
    require_valid(s);
    detail::require(s.design_prior.kind == PriorSpec::Kind::beta, "single_arm_grid: design prior must be beta");
    const int n = *s.n_T;
    const double delta = s.rule.delta;
    const PriorSpec& d = s.design_prior;
    SingleArmGrid g;
    g.m_d.resize(static_cast<std::size_t>(n) + 1);
    g.q_d.resize(g.m_d.size());
    g.post.resize(g.m_d.size());
    for (int x = 0; x <= n; ++x) {
        const auto i = static_cast<std::size_t>(x);
        g.m_d[i] = beta_binomial_pmf(x, n, d.alpha, d.beta);
        g.q_d[i] = reg_inc_beta_upper(delta, d.alpha + x, d.beta + (n - x));
        g.post[i] = posterior_prob_single(x, n, s.analysis_prior, delta);
    }
    g.x_c = n + 1;
    for (int x = 0; x <= n; ++x) {
        if (g.post[static_cast<std::size_t>(x)] > s.rule.c) {
            g.x_c = x;
            break;
        }
    }
    return g;
}

inline DecisionGrid binary_single_grid(const DesignSpec& s) {
    const SingleArmGrid g = single_arm_grid(s);
    const int n = *s.n_T;
    const double delta = s.rule.delta;
    const PriorSpec& d = s.design_prior;
    std::vector<GridCell> cells(g.m_d.size());
    for (int x = 0; x <= n; ++x) {
        const auto i = static_cast<std::size_t>(x);
        const double nq = reg_inc_beta(delta, d.alpha + x, d.beta + (n - x));
        cells[i] = {g.post[i], g.m_d[i], g.m_d[i] * g.q_d[i], g.m_d[i] * nq, binomial_pmf(x, n, delta)};
    }
    return DecisionGrid(std::move(cells), gamma1_of(d, delta, Direction::greater),
                        gamma0_of(d, delta, Direction::greater));
}

inline OCResult oc_binary_single(const DesignSpec& s) { return binary_single_grid(s).at(s.rule.c); }

// ---------------------------------------------------------------------------
// Two arms: risk difference by quadrature
// ---------------------------------------------------------------------------

namespace detail {

// Pr(effect > delta) for one treatment-arm Beta evaluated at control rate u,
// where effect = theta_T - theta_C (higher) or theta_C - theta_T (lower).
inline double arm_tail(double a_t, double b_t, double u, double delta, Benefit benefit) {
    if (benefit == Benefit::higher) {
        const double z = u + delta;  // need theta_T > z
        if (z <= 0.0) return 1.0;
        if (z >= 1.0) return 0.0;
        return ibetac(a_t, b_t, z, (1.0 - u) - delta);
    }
    const double z = u - delta;  // need theta_T < z
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return ibeta(a_t, b_t, z, (1.0 - u) + delta);
}

inline const QuadratureRule& cached_rule(int nodes) {
    static const QuadratureRule r256 = gauss_legendre(kDefaultNodes);
    static const QuadratureRule r512 = gauss_legendre(kRefinedNodes);
    if (nodes == kDefaultNodes) return r256;
    if (nodes == kRefinedNodes) return r512;
    thread_local QuadratureRule other;
    if (static_cast<int>(other.size()) != nodes) other = gauss_legendre(nodes);
    return other;
}

// Control rates where the treatment tail is neither identically 0 nor 1.
// Integrating only over this span keeps the integrand free of kinks.
struct TailSpan {
    double lo = 0.0;
    double hi = 1.0;
    [[nodiscard]] double width() const { return std::max(0.0, hi - lo); }
    [[nodiscard]] double node(const QuadratureRule& r, std::size_t k) const { return lo + width() * r.nodes[k]; }
};

inline TailSpan tail_span(double delta, Benefit benefit) {
    const double shift = benefit == Benefit::higher ? delta : -delta;
    return {std::max(0.0, -shift), std::min(1.0, 1.0 - shift)};
}

// Control mass where the treatment tail equals one.
inline double certain_mass(double a_c, double b_c, const TailSpan& sp, Benefit benefit) {
    if (benefit == Benefit::higher) return sp.lo > 0.0 ? reg_inc_beta(std::min(sp.lo, 1.0), a_c, b_c) : 0.0;
    return sp.hi < 1.0 ? reg_inc_beta_upper(std::max(sp.hi, 0.0), a_c, b_c) : 0.0;
}

inline double diff_prob(double a_t, double b_t, double a_c, double b_c, double delta, Benefit benefit,
                        const QuadratureRule& rule) {
    const TailSpan sp = tail_span(delta, benefit);
    long double acc = certain_mass(a_c, b_c, sp, benefit);
    if (sp.width() > 0.0) {
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double u = sp.node(rule, k);
            const double f = beta_pdf(u, a_c, b_c);
            if (f == 0.0) continue;
            acc += static_cast<long double>(rule.weights[k] * sp.width() * f) * arm_tail(a_t, b_t, u, delta, benefit);
        }
    }
    return std::clamp(static_cast<double>(acc), 0.0, 1.0);
}

}  // namespace detail

struct QuadratureValue {
    double value = 0.0;
    double refined = 0.0;
    bool precise = true;
};

/// Pr(theta_T - theta_C > delta) (benefit higher) or Pr(theta_C - theta_T > delta) (benefit lower)
/// for independent Beta(a_t, b_t) and Beta(a_c, b_c) rates.
inline QuadratureValue risk_difference_prob(double a_t, double b_t, double a_c, double b_c, double delta,
                                            Benefit benefit, int nodes = kDefaultNodes) {
    detail::require(a_t > 0 && b_t > 0 && a_c > 0 && b_c > 0, "risk_difference_prob: shapes must be positive");
    QuadratureValue q;
    q.value = detail::diff_prob(a_t, b_t, a_c, b_c, delta, benefit, detail::cached_rule(nodes));
    q.refined = detail::diff_prob(a_t, b_t, a_c, b_c, delta, benefit, detail::cached_rule(2 * nodes));
    q.precise = std::abs(q.value - q.refined) <= kQuadratureTolerance;
    return q;
}

/// Posterior probability of benefit beyond delta after x_T/n_T and x_C/n_C events.
inline QuadratureValue posterior_prob_two_arm(int x_T, int n_T, int x_C, int n_C, const ArmPriors& analysis,
                                              double delta, Benefit benefit, int nodes = kDefaultNodes) {
    detail::require(n_T >= 0 && x_T >= 0 && x_T <= n_T, "posterior_prob_two_arm: need 0 <= x_T <= n_T");
    detail::require(n_C >= 0 && x_C >= 0 && x_C <= n_C, "posterior_prob_two_arm: need 0 <= x_C <= n_C");
    detail::require(analysis.treatment.kind == PriorSpec::Kind::beta && analysis.control.kind == PriorSpec::Kind::beta,
                    "posterior_prob_two_arm: analysis priors must be beta");
    return risk_difference_prob(analysis.treatment.alpha + x_T, analysis.treatment.beta + (n_T - x_T),
                                analysis.control.alpha + x_C, analysis.control.beta + (n_C - x_C), delta, benefit,
                                nodes);
}

/// Design-prior prevalence of benefit for a two-arm binary design.
inline double gamma1_two_arm(const DesignSpec& s) {
    const auto& d = s.design_arms;
    return risk_difference_prob(d.treatment.alpha, d.treatment.beta, d.control.alpha, d.control.beta, s.rule.delta,
                                s.benefit_or_default())
        .value;
}

/// Full outcome grid for a two-arm binary design (row-major in x_T, then x_C).
struct TwoArmGrid {
    int n_T = 0;
    int n_C = 0;
    std::vector<double> post;
    std::vector<double> m_d;
    std::vector<double> q_d;
    std::vector<double> null_mass;
    double gamma1 = kNaN;
    double gamma0 = kNaN;
    double max_refinement_gap = 0.0;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t index(int x_T, int x_C) const {
        return static_cast<std::size_t>(x_T) * static_cast<std::size_t>(n_C + 1) + static_cast<std::size_t>(x_C);
    }
    [[nodiscard]] bool success(int x_T, int x_C, double c) const { return post[index(x_T, x_C)] > c; }
};

namespace detail {

// Tables for posterior(x_T, x_C) = certain[x_C] + sum_k outer[x_C][k] * inner[x_T][k].
struct PosteriorTables {
    std::vector<double> inner;    // (n_T+1) x K
    std::vector<double> outer;    // (n_C+1) x K, weight times control density
    std::vector<double> certain;  // (n_C+1), control mass where the tail is one
    std::size_t K = 0;

    [[nodiscard]] double eval(int x_T, int x_C) const {
        const double* in = &inner[static_cast<std::size_t>(x_T) * K];
        const double* out = &outer[static_cast<std::size_t>(x_C) * K];
        long double acc = certain[static_cast<std::size_t>(x_C)];
        for (std::size_t k = 0; k < K; ++k) acc += static_cast<long double>(in[k] * out[k]);
        return std::clamp(static_cast<double>(acc), 0.0, 1.0);
    }
};

inline PosteriorTables build_tables(int n_T, int n_C, const ArmPriors& priors, double delta, Benefit benefit,
                                    const QuadratureRule& rule) {
    const TailSpan sp = tail_span(delta, benefit);
    PosteriorTables t;
    t.K = sp.width() > 0.0 ? rule.size() : 0;
    t.inner.resize(static_cast<std::size_t>(n_T + 1) * t.K);
    t.outer.resize(static_cast<std::size_t>(n_C + 1) * t.K);
    t.certain.resize(static_cast<std::size_t>(n_C + 1));
    parallel_for(static_cast<std::size_t>(n_T + 1), [&](std::size_t xt) {
        const double a = priors.treatment.alpha + static_cast<double>(xt);
        const double b = priors.treatment.beta + static_cast<double>(n_T - static_cast<int>(xt));
        for (std::size_t k = 0; k < t.K; ++k) {
            t.inner[xt * t.K + k] = arm_tail(a, b, sp.node(rule, k), delta, benefit);
        }
    });
    parallel_for(static_cast<std::size_t>(n_C + 1), [&](std::size_t xc) {
        const double a = priors.control.alpha + static_cast<double>(xc);
        const double b = priors.control.beta + static_cast<double>(n_C - static_cast<int>(xc));
        t.certain[xc] = certain_mass(a, b, sp, benefit);
        for (std::size_t k = 0; k < t.K; ++k) {
            t.outer[xc * t.K + k] = rule.weights[k] * sp.width() * beta_pdf(sp.node(rule, k), a, b);
        }
    });
    return t;
}

}  // namespace detail

inline TwoArmGrid two_arm_grid(const DesignSpec& s) {
    detail::require(s.endpoint == Endpoint::binary_two_arm, "two_arm_grid: endpoint must be binary_two_arm");
    require_valid(s);
    TwoArmGrid g;
    g.n_T = *s.n_T;
    g.n_C = *s.n_C;
    const double delta = s.rule.delta;
    const Benefit benefit = s.benefit_or_default();
    const double theta0 = *s.null_rate;
    const auto& rule = detail::cached_rule(kDefaultNodes);
    const auto& fine = detail::cached_rule(kRefinedNodes);

    const auto post_t = detail::build_tables(g.n_T, g.n_C, s.analysis_arms, delta, benefit, rule);
    const auto post_f = detail::build_tables(g.n_T, g.n_C, s.analysis_arms, delta, benefit, fine);
    const auto des_t = detail::build_tables(g.n_T, g.n_C, s.design_arms, delta, benefit, rule);
    const auto des_f = detail::build_tables(g.n_T, g.n_C, s.design_arms, delta, benefit, fine);

    std::vector<double> m_t(static_cast<std::size_t>(g.n_T) + 1), m_c(static_cast<std::size_t>(g.n_C) + 1);
    std::vector<double> b_t(m_t.size()), b_c(m_c.size());
    for (int x = 0; x <= g.n_T; ++x) {
        m_t[static_cast<std::size_t>(x)] =
            beta_binomial_pmf(x, g.n_T, s.design_arms.treatment.alpha, s.design_arms.treatment.beta);
        b_t[static_cast<std::size_t>(x)] = binomial_pmf(x, g.n_T, theta0);
    }
    for (int x = 0; x <= g.n_C; ++x) {
        m_c[static_cast<std::size_t>(x)] =
            beta_binomial_pmf(x, g.n_C, s.design_arms.control.alpha, s.design_arms.control.beta);
        b_c[static_cast<std::size_t>(x)] = binomial_pmf(x, g.n_C, theta0);
    }

    const std::size_t cells = static_cast<std::size_t>(g.n_T + 1) * static_cast<std::size_t>(g.n_C + 1);
    g.post.resize(cells);
    g.m_d.resize(cells);
    g.q_d.resize(cells);
    g.null_mass.resize(cells);
    std::vector<double> gaps(static_cast<std::size_t>(g.n_T) + 1, 0.0);
    parallel_for(static_cast<std::size_t>(g.n_T + 1), [&](std::size_t xt) {
        const int x_T = static_cast<int>(xt);
        double gap = 0.0;
        for (int x_C = 0; x_C <= g.n_C; ++x_C) {
            const std::size_t i = g.index(x_T, x_C);
            const double p = post_t.eval(x_T, x_C);
            const double q = des_t.eval(x_T, x_C);
            gap = std::max({gap, std::abs(p - post_f.eval(x_T, x_C)), std::abs(q - des_f.eval(x_T, x_C))});
            g.post[i] = p;
            g.q_d[i] = q;
            g.m_d[i] = m_t[xt] * m_c[static_cast<std::size_t>(x_C)];
            g.null_mass[i] = b_t[xt] * b_c[static_cast<std::size_t>(x_C)];
        }
        gaps[xt] = gap;
    });
    g.max_refinement_gap = *std::max_element(gaps.begin(), gaps.end());
    if (g.max_refinement_gap > kQuadratureTolerance) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "quadrature: %d vs %d node posteriors differ by %.3g (> %.0e)", kDefaultNodes,
                      kRefinedNodes, g.max_refinement_gap, kQuadratureTolerance);
        g.warnings.emplace_back(buf);
    }

    const auto& d = s.design_arms;
    const QuadratureValue g1 =
        risk_difference_prob(d.treatment.alpha, d.treatment.beta, d.control.alpha, d.control.beta, delta, benefit);
    // The complement is its own integral: ineffective means the opposite-signed difference reaches -delta.
    const Benefit other = benefit == Benefit::higher ? Benefit::lower : Benefit::higher;
    const QuadratureValue g0 =
        risk_difference_prob(d.treatment.alpha, d.treatment.beta, d.control.alpha, d.control.beta, -delta, other);
    g.gamma1 = g1.value;
    g.gamma0 = g0.value;
    if (!g1.precise || !g0.precise) g.warnings.emplace_back("quadrature: design-prior prevalence refinement check failed");
    return g;
}

inline DecisionGrid binary_two_arm_grid(const DesignSpec& s) {
    const TwoArmGrid g = two_arm_grid(s);
    std::vector<GridCell> cells(g.post.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double q = g.q_d[i];
        cells[i] = {g.post[i], g.m_d[i], g.m_d[i] * q, g.m_d[i] * (1.0 - q), g.null_mass[i]};
    }
    return DecisionGrid(std::move(cells), g.gamma1, g.gamma0, g.warnings);
}

inline OCResult oc_binary_two_arm(const DesignSpec& s) { return binary_two_arm_grid(s).at(s.rule.c); }

}  // namespace bayescal
