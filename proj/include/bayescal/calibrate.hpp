#pragma once

// Threshold calibration, OC curves, design-prior sensitivity tables, and the
// decision for observed data.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bayescal/oc.hpp"
#include "bayescal/parallel.hpp"
#include "bayescal/theory.hpp"

namespace bayescal {

enum class Metric { ft1e, pid, bt1e };

inline const char* to_string(Metric m) {
    switch (m) {
        case Metric::ft1e: return "ft1e";
        case Metric::pid: return "pid";
        case Metric::bt1e: return "bt1e";
    }
    return "?";
}

inline std::optional<Metric> parse_metric(const std::string& s) {
    if (s == "ft1e") return Metric::ft1e;
    if (s == "pid") return Metric::pid;
    if (s == "bt1e") return Metric::bt1e;
    return std::nullopt;
}

inline double metric_value(const OCResult& r, Metric m) {
    switch (m) {
        case Metric::ft1e: return r.ft1e;
        case Metric::pid: return r.pid;
        case Metric::bt1e: return r.bt1e;
    }
    return kNaN;
}

struct CalibrationTarget {
    Metric metric = Metric::ft1e;
    double level = 0.025;
};

/// Parses "metric=level", e.g. "pid=0.025".
inline CalibrationTarget parse_target(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw DomainError("target must look like metric=level, got '" + text + "'");
    const auto metric = parse_metric(text.substr(0, eq));
    if (!metric) throw DomainError("target metric must be one of ft1e|pid|bt1e, got '" + text.substr(0, eq) + "'");
    const std::string lv = text.substr(eq + 1);
    std::size_t used = 0;
    double level = 0.0;
    try {
        level = std::stod(lv, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != lv.size()) throw DomainError("target level is not a number: '" + lv + "'");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("target level must lie in (0,1)");
    return {*metric, level};
}

struct CalibrationResult {
    CalibrationTarget target;
    bool feasible = true;
    double c_star = kNaN;
    OCResult achieved;
    int iterations = 0;
    double granularity = 0.0;
    bool at_boundary = false;
    double infimum = kNaN;  // smallest attainable metric value when infeasible
    std::string message;
};

/// Largest increase tolerated between consecutive pre-scan points before a
/// metric is declared non-monotone in c.
inline constexpr double kMonotoneTolContinuous = 1e-9;
inline constexpr double kMonotoneTolDiscrete = 1e-6;
inline constexpr double kCalibrationCTol = 1e-12;
inline constexpr int kMaxBisection = 200;

/// Checks that the target metric does not increase over c = 0.01, ..., 0.99.
inline void monotonicity_prescan(const OcModel& model, Metric metric) {
    const double tol = model.discrete() ? kMonotoneTolDiscrete : kMonotoneTolContinuous;
    double prev = kNaN;
    for (int i = 1; i <= 99; ++i) {
        const double c = i / 100.0;
        const double v = metric_value(model.at(c), metric);
        if (std::isfinite(prev) && std::isfinite(v) && v > prev + tol) {
            std::ostringstream os;
            os << "calibration: " << to_string(metric) << " increases with c near c=" << c << " (" << prev << " -> "
               << v << ")";
            throw DomainError(os.str());
        }
        if (std::isfinite(v)) prev = v;
    }
}

namespace detail {

inline CalibrationResult calibrate_discrete(const DecisionGrid& g, CalibrationTarget t) {
    CalibrationResult res;
    res.target = t;
    const auto& starts = g.group_starts();
    const auto& values = g.achievable();
    double best = kInf;
    // Group k succeeds for thresholds c in [values[k-1], values[k]).
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const OCResult r = g.at_index(starts[k]);
        const double v = metric_value(r, t.metric);
        ++res.iterations;
        if (!std::isfinite(v)) continue;
        best = std::min(best, v);
        if (v <= t.level) {
            res.achieved = r;
            if (k == 0) {
                res.c_star = 0.0;
                res.granularity = values[0];
                res.at_boundary = true;
            } else {
                res.c_star = values[k - 1];
                res.granularity = values[k] - values[k - 1];
            }
            return res;
        }
    }
    res.feasible = false;
    res.infimum = best;
    res.achieved = g.at_index(g.size());
    res.message = "target unreachable: smallest attainable value is " + std::to_string(best);
    return res;
}

inline CalibrationResult calibrate_normal(const OcModel& model, const NormalModel& nm, CalibrationTarget t) {
    CalibrationResult res;
    res.target = t;
    if (t.metric == Metric::ft1e) {
        // Invert the boundary directly: ft1e(c) = level at y_c = delta + v z_{1-level}.
        res.c_star = nm.analysis.kind == PriorSpec::Kind::flat
                         ? 1.0 - t.level
                         : nm.posterior_prob(nm.delta + nm.v * phi_inv(1.0 - t.level));
        res.iterations = 1;
        if (!(res.c_star > 0.0 && res.c_star < 1.0)) {
            res.feasible = false;
            res.infimum = 0.0;
            res.message = "target unreachable within (0,1)";
            return res;
        }
        res.achieved = model.at(res.c_star);
        return res;
    }

    const auto metric = [&](double c) { return metric_value(model.at(c), t.metric); };
    constexpr double c_min = 1e-9;
    double c_max = 1.0 - 1e-9;
    if (!std::isfinite(metric(c_max)) && std::isfinite(metric(c_min))) {
        // The success mass underflows near c = 1; search only where the metric is defined.
        double ok = c_min, bad = c_max;
        while (bad - ok > kCalibrationCTol) {
            const double mid = 0.5 * (ok + bad);
            (std::isfinite(metric(mid)) ? ok : bad) = mid;
        }
        c_max = ok;
    }
    const double m_hi = metric(c_max);
    if (!(m_hi <= t.level)) {
        res.feasible = false;
        res.infimum = m_hi;
        res.achieved = model.at(c_max);
        res.message = "target unreachable: metric stays above level as c -> 1 (limit " + std::to_string(m_hi) + ")";
        return res;
    }
    if (metric(c_min) <= t.level) {
        res.c_star = c_min;
        res.at_boundary = true;
        res.achieved = model.at(c_min);
        return res;
    }
    double lo = c_min;
    double hi = c_max;
    const double seed = std::min(asymptotic_threshold(t.level), c_max);
    if (metric(seed) <= t.level) {
        hi = seed;
    } else {
        lo = seed;
    }
    res.iterations = 1;
    while (hi - lo > kCalibrationCTol && res.iterations < kMaxBisection) {
        const double mid = 0.5 * (lo + hi);
        if (metric(mid) <= t.level) {
            hi = mid;
        } else {
            lo = mid;
        }
        ++res.iterations;
    }
    res.c_star = hi;
    res.granularity = 0.0;
    res.achieved = model.at(hi);
    return res;
}

}  // namespace detail

/// c* = inf { c : metric(c) <= level } for a prebuilt model.
inline CalibrationResult calibrate_threshold(const OcModel& model, CalibrationTarget target) {
    detail::require(target.level > 0.0 && target.level < 1.0, "calibration level must lie in (0,1)");
    monotonicity_prescan(model, target.metric);
    if (const DecisionGrid* g = model.grid()) return detail::calibrate_discrete(*g, target);
    return detail::calibrate_normal(model, *model.normal(), target);
}

/// Calibrates a design whose rule.c is ignored.
inline CalibrationResult calibrate_threshold(const DesignSpec& spec, CalibrationTarget target) {
    return calibrate_threshold(OcModel(spec), target);
}

/// One OCResult per grid point, reusing the design's cached model.
inline std::vector<std::pair<double, OCResult>> oc_curve(const DesignSpec& spec, const std::vector<double>& c_grid) {
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        detail::require(c_grid[i] > 0.0 && c_grid[i] < 1.0, "oc_curve: grid values must lie in (0,1)");
        detail::require(i == 0 || c_grid[i] > c_grid[i - 1], "oc_curve: grid must be strictly increasing");
    }
    const OcModel model(spec);
    std::vector<std::pair<double, OCResult>> out(c_grid.size());
    for (std::size_t i = 0; i < c_grid.size(); ++i) out[i] = {c_grid[i], model.at(c_grid[i])};
    return out;
}

/// Evenly spaced grid from c_min to c_max inclusive.
inline std::vector<double> linear_grid(double c_min, double c_max, int steps) {
    detail::require(c_min > 0.0 && c_min < c_max && c_max < 1.0, "grid: need 0 < c_min < c_max < 1");
    detail::require(steps >= 2, "grid: need at least two steps");
    std::vector<double> g(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) g[static_cast<std::size_t>(i)] = c_min + (c_max - c_min) * i / (steps - 1);
    g.back() = c_max;
    return g;
}

// ---------------------------------------------------------------------------
// Sensitivity tables
// ---------------------------------------------------------------------------

/// A named design-prior scenario. For two-arm binary designs `arms` replaces both
/// arm priors when set; otherwise `prior` replaces the treatment arm's prior.
struct Scenario {
    std::string name;
    std::optional<PriorSpec> prior;
    std::optional<ArmPriors> arms;
};

struct SensitivityRow {
    std::string scenario;
    CalibrationResult result;
};

inline DesignSpec apply_scenario(DesignSpec s, const Scenario& sc) {
    if (s.two_arm_binary()) {
        if (sc.arms) {
            s.design_arms = *sc.arms;
        } else if (sc.prior) {
            s.design_arms.treatment = *sc.prior;
        }
    } else if (sc.prior) {
        s.design_prior = *sc.prior;
    }
    return s;
}

/// One row per (scenario, target). A scenario whose model cannot be built
/// reports the failure in each of its rows.
inline std::vector<SensitivityRow> sensitivity_table(const DesignSpec& spec, const std::vector<Scenario>& scenarios,
                                                     const std::vector<CalibrationTarget>& targets) {
    std::vector<Scenario> list = scenarios;
    if (list.empty()) list.push_back({"design", std::nullopt, std::nullopt});
    std::vector<std::vector<SensitivityRow>> per(list.size());
    parallel_for(list.size(), [&](std::size_t i) {
        const Scenario& sc = list[i];
        std::optional<OcModel> model;
        std::string build_error;
        try {
            model.emplace(apply_scenario(spec, sc));
        } catch (const std::exception& e) {
            build_error = e.what();
        }
        for (const auto& t : targets) {
            SensitivityRow row{sc.name, {}};
            row.result.target = t;
            if (!model) {
                row.result.feasible = false;
                row.result.message = build_error;
            } else {
                try {
                    row.result = calibrate_threshold(*model, t);
                } catch (const DomainError& e) {
                    row.result.feasible = false;
                    row.result.message = e.what();
                }
            }
            per[i].push_back(std::move(row));
        }
    });
    std::vector<SensitivityRow> rows;
    for (auto& v : per) {
        for (auto& r : v) rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Decisions on observed data
// ---------------------------------------------------------------------------

/// Endpoint-appropriate summary of observed data: a sample mean (continuous),
/// a log hazard ratio estimate (tte), or event counts (binary).
struct ObservedData {
    std::optional<double> estimate;
    std::optional<int> x_T;
    std::optional<int> x_C;
};

struct DecisionRecord {
    double posterior_prob = 0.0;
    bool success = false;
    std::vector<std::string> warnings;
};

inline DecisionRecord decide(const DesignSpec& s, const ObservedData& data) {
    require_valid(s);
    DecisionRecord d;
    switch (s.endpoint) {
        case Endpoint::continuous_single:
        case Endpoint::continuous_two_arm: {
            detail::require(data.estimate.has_value() && std::isfinite(*data.estimate),
                            "decide: continuous designs need an observed mean difference");
            d.posterior_prob = continuous_model(s).posterior_prob(*data.estimate);
            break;
        }
        case Endpoint::tte: {
            detail::require(data.estimate.has_value() && std::isfinite(*data.estimate),
                            "decide: time-to-event designs need an observed log hazard ratio");
            d.posterior_prob = tte_model(s).posterior_prob(-*data.estimate);
            break;
        }
        case Endpoint::binary_single: {
            detail::require(data.x_T.has_value(), "decide: binary designs need an event count x_T");
            detail::require(*data.x_T >= 0 && *data.x_T <= *s.n_T, "decide: x_T must lie in [0, n_T]");
            d.posterior_prob = posterior_prob_single(*data.x_T, *s.n_T, s.analysis_prior, s.rule.delta);
            break;
        }
        case Endpoint::binary_two_arm: {
            detail::require(data.x_T.has_value() && data.x_C.has_value(), "decide: two-arm designs need x_T and x_C");
            detail::require(*data.x_T >= 0 && *data.x_T <= *s.n_T, "decide: x_T must lie in [0, n_T]");
            detail::require(*data.x_C >= 0 && *data.x_C <= *s.n_C, "decide: x_C must lie in [0, n_C]");
            const QuadratureValue q = posterior_prob_two_arm(*data.x_T, *s.n_T, *data.x_C, *s.n_C, s.analysis_arms,
                                                             s.rule.delta, s.benefit_or_default());
            d.posterior_prob = q.value;
            if (!q.precise) d.warnings.emplace_back("quadrature refinement check failed");
            break;
        }
    }
    d.success = d.posterior_prob > s.rule.c;
    return d;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json to_json(const CalibrationResult& r) {
    json j;
    j["target_metric"] = to_string(r.target.metric);
    j["target_level"] = r.target.level;
    j["feasible"] = r.feasible;
    j["c_star"] = detail::number_or_null(r.c_star);
    j["granularity"] = r.granularity;
    j["iterations"] = r.iterations;
    j["at_boundary"] = r.at_boundary;
    j["infimum"] = detail::number_or_null(r.infimum);
    j["achieved"] = to_json(r.achieved);
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

inline json to_json(const SensitivityRow& row) {
    json j = to_json(row.result);
    j["scenario"] = row.scenario;
    return j;
}

/// Scenarios: an object {name: prior-or-arm-pair} or an array of {"name", "prior"}.
inline std::vector<Scenario> scenarios_from_json(const json& j) {
    std::vector<Violation> errs;
    std::vector<Scenario> out;
    detail::JsonReader rd;
    auto one = [&](const std::string& name, const json& v, const std::string& path) {
        Scenario sc{name, std::nullopt, std::nullopt};
        if (v.is_object() && v.contains("treatment")) {
            if (auto a = rd.arms(json{{"p", v}}, "p", path)) sc.arms = *a;
        } else if (auto p = rd.prior_value(v, path)) {
            sc.prior = *p;
        }
        out.push_back(std::move(sc));
    };
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) one(it.key(), it.value(), "scenarios." + it.key());
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string path = "scenarios[" + std::to_string(i) + "]";
            const json& e = j[i];
            if (!e.is_object() || !e.contains("name") || !e["name"].is_string() || !e.contains("prior")) {
                rd.violations.push_back({path, "expected {\"name\": string, \"prior\": prior}"});
                continue;
            }
            one(e["name"].get<std::string>(), e["prior"], path + ".prior");
        }
    } else {
        rd.violations.push_back({"scenarios", "expected an object or array of scenarios"});
    }
    if (!rd.violations.empty()) throw ValidationError(rd.violations);
    return out;
}

}  // namespace bayescal
