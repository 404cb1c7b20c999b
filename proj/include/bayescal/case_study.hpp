#pragma once

// Retrospective re-design of a two-arm mortality trial (172/344 events on
// culprit-only PCI, 194/341 on multivessel PCI): calibrated thresholds under
// frequentist and PID targets, design-prior sensitivity, and the resulting
// decisions, each compared with reference values.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "bayescal/calibrate.hpp"

namespace bayescal {

struct CaseStudyData {
    int n_T = 344;
    int events_T = 172;
    int n_C = 341;
    int events_C = 194;
};

/// Published value for one table cell, or absent where the table has none.
struct Reference {
    std::optional<double> c, ft1e, bt1e, for_, bcp, bp;
};

inline constexpr double kCaseStudyCTol = 0.01;
inline constexpr double kCaseStudyMetricTol = 0.015;
inline constexpr double kCaseStudyPosteriorTol = 0.001;

struct CaseStudyRow {
    std::string target_label;
    std::string analysis_label;
    std::string design_label;
    CalibrationResult result;
    Reference reference;
    DecisionRecord decision;
    bool reference_success = true;
    std::vector<std::string> failures;  // cells outside tolerance

    [[nodiscard]] bool pass() const { return failures.empty(); }
};

struct CaseStudyReport {
    double posterior_flat = kNaN;
    double posterior_matched = kNaN;
    std::vector<CaseStudyRow> rows;
    std::vector<std::string> failures;

    [[nodiscard]] bool posterior_flat_pass() const { return std::abs(posterior_flat - 0.965) <= kCaseStudyPosteriorTol; }
    [[nodiscard]] bool posterior_matched_pass() const {
        return std::abs(posterior_matched - 0.966) <= kCaseStudyPosteriorTol;
    }
    [[nodiscard]] bool pass() const {
        if (!posterior_flat_pass() || !posterior_matched_pass()) return false;
        for (const auto& r : rows) {
            if (!r.pass()) return false;
        }
        return true;
    }
};

inline ArmPriors case_study_flat_priors() { return {PriorSpec::beta_dist(1, 1), PriorSpec::beta_dist(1, 1)}; }

inline ArmPriors case_study_historical_priors() {
    return {PriorSpec::beta_dist(67, 59), PriorSpec::beta_dist(23, 16)};
}

/// Planned design with the observed arm sizes, the pooled event rate as point null,
/// and lower mortality as benefit.
inline DesignSpec case_study_design(const CaseStudyData& d = {}) {
    DesignSpec s;
    s.endpoint = Endpoint::binary_two_arm;
    s.n_T = d.n_T;
    s.n_C = d.n_C;
    s.null_rate = static_cast<double>(d.events_T + d.events_C) / (d.n_T + d.n_C);
    s.benefit = Benefit::lower;
    s.analysis_arms = case_study_flat_priors();
    s.design_arms = case_study_historical_priors();
    s.rule = {0.0, 0.975, Direction::greater};
    return s;
}

namespace detail {

inline void check_cell(CaseStudyRow& row, const char* name, std::optional<double> ref, double got, double tol) {
    if (!ref) return;
    if (!(std::abs(got - *ref) <= tol)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: %.4f vs reference %.4f (tol %.3f)", name, got, *ref, tol);
        row.failures.emplace_back(buf);
    }
}

}  // namespace detail

inline CaseStudyReport run_case_study(const CaseStudyData& data = {}) {
    CaseStudyReport rep;
    const DesignSpec base = case_study_design(data);
    const ObservedData observed{std::nullopt, data.events_T, data.events_C};

    rep.posterior_flat = decide(base, observed).posterior_prob;
    DesignSpec matched = base;
    matched.analysis_arms = case_study_historical_priors();
    rep.posterior_matched = decide(matched, observed).posterior_prob;

    struct Job {
        std::string target_label, analysis_label, design_label;
        DesignSpec spec;
        CalibrationTarget target;
        Reference ref;
        bool success;
    };
    auto with_treatment = [&](DesignSpec s, double a, double b) {
        s.design_arms.treatment = PriorSpec::beta_dist(a, b);
        return s;
    };
    const DesignSpec hist = base;
    const DesignSpec neutral = with_treatment(base, 74, 52);
    const DesignSpec pess = with_treatment(base, 81, 45);
    const std::string flat = "Beta(1,1) x Beta(1,1)";
    std::vector<Job> jobs = {
        {"FT1E=0.025", flat, "-", hist, {Metric::ft1e, 0.025}, {0.975, 0.025, {}, {}, {}, {}}, false},
        {"PID=0.025", "Beta(67,59) x Beta(23,16)", "historical Beta(67,59)", matched, {Metric::pid, 0.025},
         {0.8145, 0.218, 0.061, 0.341, 0.832, 0.633}, true},
        {"PID=0.025", flat, "historical Beta(67,59)", hist, {Metric::pid, 0.025},
         {0.772, 0.221, 0.060, 0.357, 0.817, 0.621}, true},
        {"PID=0.025", flat, "neutral Beta(74,52)", neutral, {Metric::pid, 0.025},
         {0.898, 0.102, 0.017, 0.290, 0.620, 0.327}, true},
        {"PID=0.025", flat, "pessimistic Beta(81,45)", pess, {Metric::pid, 0.025},
         {0.954, 0.046, 0.004, 0.187, 0.410, 0.117}, true},
        {"PID=0.010", flat, "historical Beta(67,59)", hist, {Metric::pid, 0.010},
         {0.909, 0.095, 0.021, 0.453, 0.716, 0.536}, true},
        {"PID=0.010", flat, "neutral Beta(74,52)", neutral, {Metric::pid, 0.010},
         {0.960, 0.040, 0.005, 0.345, 0.505, 0.262}, true},
        {"PID=0.010", flat, "pessimistic Beta(81,45)", pess, {Metric::pid, 0.010},
         {0.983, 0.017, 0.001, 0.211, 0.309, 0.087}, false},
    };

    // Models depend only on the design, not on the target; build each once.
    std::vector<const DesignSpec*> distinct;
    std::vector<std::size_t> model_of(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        std::size_t k = 0;
        while (k < distinct.size() && !(*distinct[k] == jobs[i].spec)) ++k;
        if (k == distinct.size()) distinct.push_back(&jobs[i].spec);
        model_of[i] = k;
    }
    std::vector<std::optional<OcModel>> models(distinct.size());
    parallel_for(distinct.size(), [&](std::size_t k) { models[k].emplace(*distinct[k]); });

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& j = jobs[i];
        CaseStudyRow row;
        row.target_label = j.target_label;
        row.analysis_label = j.analysis_label;
        row.design_label = j.design_label;
        row.reference = j.ref;
        row.reference_success = j.success;
        row.result = calibrate_threshold(*models[model_of[i]], j.target);
        DesignSpec at_c = j.spec;
        at_c.rule.c = row.result.c_star;
        row.decision = decide(at_c, observed);
        const OCResult& a = row.result.achieved;
        detail::check_cell(row, "c", j.ref.c, row.result.c_star, kCaseStudyCTol);
        detail::check_cell(row, "FT1E", j.ref.ft1e, a.ft1e, kCaseStudyMetricTol);
        detail::check_cell(row, "BT1E", j.ref.bt1e, a.bt1e, kCaseStudyMetricTol);
        detail::check_cell(row, "FOR", j.ref.for_, a.for_, kCaseStudyMetricTol);
        detail::check_cell(row, "BCP", j.ref.bcp, a.bcp, kCaseStudyMetricTol);
        detail::check_cell(row, "BP", j.ref.bp, a.bp, kCaseStudyMetricTol);
        if (!row.result.feasible) row.failures.emplace_back("calibration infeasible: " + row.result.message);
        if (row.decision.success != j.success) {
            row.failures.emplace_back(std::string("decision: ") + (row.decision.success ? "SUCCESS" : "FAIL") +
                                      " vs reference " + (j.success ? "SUCCESS" : "FAIL"));
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline json to_json(const CaseStudyReport& r) {
    json j;
    j["posterior_flat"] = {{"value", r.posterior_flat}, {"reference", 0.965}, {"pass", r.posterior_flat_pass()}};
    j["posterior_matched"] = {
        {"value", r.posterior_matched}, {"reference", 0.966}, {"pass", r.posterior_matched_pass()}};
    json rows = json::array();
    for (const auto& row : r.rows) {
        json x;
        x["target"] = row.target_label;
        x["analysis_prior"] = row.analysis_label;
        x["design_prior"] = row.design_label;
        x["calibration"] = to_json(row.result);
        auto ref = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
        x["reference"] = {{"c", ref(row.reference.c)},       {"ft1e", ref(row.reference.ft1e)},
                          {"bt1e", ref(row.reference.bt1e)}, {"for", ref(row.reference.for_)},
                          {"bcp", ref(row.reference.bcp)},   {"bp", ref(row.reference.bp)}};
        x["decision"] = {{"posterior_prob", row.decision.posterior_prob},
                         {"success", row.decision.success},
                         {"reference_success", row.reference_success}};
        x["failures"] = row.failures;
        x["pass"] = row.pass();
        rows.push_back(x);
    }
    j["rows"] = rows;
    j["pass"] = r.pass();
    return j;
}

}  // namespace bayescal
