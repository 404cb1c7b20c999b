#pragma once

// Domain vocabulary shared by the engines: priors, decision rules, trial
// designs, the operating-characteristic record, and their JSON form.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bayescal/special_fn.hpp"

namespace bayescal {

using json = nlohmann::json;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Standard deviation at or above which a normal prior counts as non-informative.
inline constexpr double kNonInformativeSd = 1e3;

enum class Endpoint { continuous_single, continuous_two_arm, binary_single, binary_two_arm, tte };
enum class Direction { greater, less };
enum class Benefit { higher, lower };

/// A prior on the effect (or on a rate). `flat` is the improper uniform prior,
/// `point` a degenerate design prior.
struct PriorSpec {
    enum class Kind { normal, beta, flat, point };

    Kind kind = Kind::normal;
    double mean = 0.0;
    double sd = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double value = 0.0;

    static PriorSpec normal(double mean, double sd) {
        PriorSpec p;
        p.kind = Kind::normal;
        p.mean = mean;
        p.sd = sd;
        return p;
    }
    static PriorSpec beta_dist(double alpha, double beta) {
        PriorSpec p;
        p.kind = Kind::beta;
        p.alpha = alpha;
        p.beta = beta;
        return p;
    }
    static PriorSpec flat() {
        PriorSpec p;
        p.kind = Kind::flat;
        return p;
    }
    static PriorSpec point(double value) {
        PriorSpec p;
        p.kind = Kind::point;
        p.value = value;
        return p;
    }

    [[nodiscard]] bool non_informative() const noexcept {
        return kind == Kind::flat || (kind == Kind::normal && sd >= kNonInformativeSd);
    }

    bool operator==(const PriorSpec&) const = default;
};

/// Treatment/control pair of rate priors (binary two-arm designs).
struct ArmPriors {
    PriorSpec treatment = PriorSpec::beta_dist(1.0, 1.0);
    PriorSpec control = PriorSpec::beta_dist(1.0, 1.0);

    bool operator==(const ArmPriors&) const = default;
};

/// Success iff Pr(effect beyond delta | data) > c.
struct DecisionRule {
    double delta = 0.0;
    double c = 0.975;
    Direction direction = Direction::greater;

    bool operator==(const DecisionRule&) const = default;
};

struct DesignSpec {
    Endpoint endpoint = Endpoint::continuous_single;
    std::optional<int> n_T;
    std::optional<int> n_C;
    std::optional<double> sigma_T;
    std::optional<double> sigma_C;
    std::optional<int> events;
    std::optional<double> allocation;
    std::optional<double> null_rate;
    std::optional<Benefit> benefit;
    // Single-effect priors; unused for binary two-arm.
    PriorSpec analysis_prior = PriorSpec::flat();
    PriorSpec design_prior = PriorSpec::normal(0.0, 1.0);
    // Per-arm priors; used only for binary two-arm.
    ArmPriors analysis_arms;
    ArmPriors design_arms;
    DecisionRule rule;

    [[nodiscard]] bool two_arm_binary() const noexcept { return endpoint == Endpoint::binary_two_arm; }
    [[nodiscard]] Benefit benefit_or_default() const noexcept { return benefit.value_or(Benefit::higher); }

    bool operator==(const DesignSpec&) const = default;
};

/// The six operating characteristics plus prevalences. Undefined conditional
/// metrics (zero denominators) are NaN.
struct OCResult {
    double bp = kNaN;
    double bcp = kNaN;
    double bt1e = kNaN;
    double ft1e = kNaN;
    double pid = kNaN;
    double for_ = kNaN;
    double gamma1 = kNaN;
    double gamma0 = kNaN;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    std::string path;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Carries every violation found, never only the first.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<Violation> v)
        : std::invalid_argument(summarize(v)), violations_(std::move(v)) {}

    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& v) {
        std::ostringstream os;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << "; ";
            os << v[i].path << ": " << v[i].message;
        }
        return os.str();
    }

    std::vector<Violation> violations_;
};

inline const char* to_string(Endpoint e) {
    switch (e) {
        case Endpoint::continuous_single: return "continuous_single";
        case Endpoint::continuous_two_arm: return "continuous_two_arm";
        case Endpoint::binary_single: return "binary_single";
        case Endpoint::binary_two_arm: return "binary_two_arm";
        case Endpoint::tte: return "tte";
    }
    return "?";
}

inline const char* to_string(Direction d) { return d == Direction::greater ? "greater" : "less"; }
inline const char* to_string(Benefit b) { return b == Benefit::higher ? "higher" : "lower"; }

inline const char* to_string(PriorSpec::Kind k) {
    switch (k) {
        case PriorSpec::Kind::normal: return "normal";
        case PriorSpec::Kind::beta: return "beta";
        case PriorSpec::Kind::flat: return "flat";
        case PriorSpec::Kind::point: return "point";
    }
    return "?";
}

inline bool is_continuous_family(Endpoint e) {
    return e == Endpoint::continuous_single || e == Endpoint::continuous_two_arm || e == Endpoint::tte;
}

namespace detail {

inline void check_prior(const PriorSpec& p, const std::string& path, bool rate_scale, bool design_role,
                        std::vector<Violation>& out) {
    using K = PriorSpec::Kind;
    if (rate_scale && p.kind != K::beta) {
        out.push_back({path + ".kind", "prior kind mismatch: rate priors must be beta"});
        return;
    }
    if (!rate_scale && p.kind == K::beta) {
        out.push_back({path + ".kind", "prior kind mismatch: effect-scale priors must be normal"});
        return;
    }
    if (p.kind == K::flat && design_role) {
        out.push_back({path + ".kind", "prior kind mismatch: a flat prior cannot generate data"});
    }
    if (p.kind == K::point && !design_role) {
        out.push_back({path + ".kind", "prior kind mismatch: point priors are design-only"});
    }
    if (p.kind == K::normal) {
        if (!std::isfinite(p.mean)) out.push_back({path + ".mean", "mean must be finite"});
        if (!(p.sd > 0.0) || !std::isfinite(p.sd)) out.push_back({path + ".sd", "sd must be positive"});
    }
    if (p.kind == K::beta) {
        if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) out.push_back({path + ".alpha", "alpha must be positive"});
        if (!(p.beta > 0.0) || !std::isfinite(p.beta)) out.push_back({path + ".beta", "beta must be positive"});
    }
    if (p.kind == K::point && !std::isfinite(p.value)) out.push_back({path + ".value", "value must be finite"});
}

template <class T>
void check_presence(const std::optional<T>& field, bool required, const char* name, Endpoint e,
                    std::vector<Violation>& out) {
    if (required && !field) out.push_back({name, std::string("required for endpoint ") + to_string(e)});
    if (!required && field) out.push_back({name, std::string("not used by endpoint ") + to_string(e)});
}

}  // namespace detail

/// All invariant violations of a spec, with field paths. Empty means valid.
inline std::vector<Violation> validate(const DesignSpec& s) {
    std::vector<Violation> out;
    const Endpoint e = s.endpoint;
    const bool cont = e == Endpoint::continuous_single || e == Endpoint::continuous_two_arm;
    const bool two_arm = e == Endpoint::continuous_two_arm || e == Endpoint::binary_two_arm;

    detail::check_presence(s.n_T, e != Endpoint::tte, "n_T", e, out);
    detail::check_presence(s.n_C, two_arm, "n_C", e, out);
    detail::check_presence(s.sigma_T, cont, "sigma_T", e, out);
    detail::check_presence(s.sigma_C, e == Endpoint::continuous_two_arm, "sigma_C", e, out);
    detail::check_presence(s.events, e == Endpoint::tte, "events", e, out);
    detail::check_presence(s.allocation, e == Endpoint::tte, "allocation", e, out);
    detail::check_presence(s.null_rate, e == Endpoint::binary_two_arm, "null_rate", e, out);
    if (s.benefit && e != Endpoint::binary_two_arm) {
        out.push_back({"benefit", std::string("not used by endpoint ") + to_string(e)});
    }

    const int min_n = cont ? 1 : 0;
    if (s.n_T && *s.n_T < std::max(min_n, 1)) out.push_back({"n_T", "sample size must be positive"});
    if (s.n_C && *s.n_C < 1) out.push_back({"n_C", "sample size must be positive"});
    if (s.sigma_T && !(*s.sigma_T > 0.0 && std::isfinite(*s.sigma_T))) {
        out.push_back({"sigma_T", "outcome sd must be positive"});
    }
    if (s.sigma_C && !(*s.sigma_C > 0.0 && std::isfinite(*s.sigma_C))) {
        out.push_back({"sigma_C", "outcome sd must be positive"});
    }
    if (s.events && *s.events < 1) out.push_back({"events", "event count must be at least 1"});
    if (s.allocation && !(*s.allocation > 0.0 && *s.allocation < 1.0)) {
        out.push_back({"allocation", "allocation must lie in (0,1)"});
    }
    if (s.null_rate && !(*s.null_rate > 0.0 && *s.null_rate < 1.0)) {
        out.push_back({"null_rate", "null rate must lie in (0,1)"});
    }

    if (!(s.rule.c > 0.0 && s.rule.c < 1.0)) out.push_back({"rule.c", "threshold must lie in (0,1)"});
    if (!std::isfinite(s.rule.delta)) out.push_back({"rule.delta", "margin must be finite"});
    if (e == Endpoint::tte && s.rule.direction != Direction::less) {
        out.push_back({"rule.direction", "time-to-event designs use direction=less"});
    }
    if (e != Endpoint::tte && s.rule.direction != Direction::greater) {
        out.push_back({"rule.direction", "direction=less is reserved for time-to-event designs"});
    }
    if (e == Endpoint::binary_single && !(s.rule.delta > 0.0 && s.rule.delta < 1.0)) {
        out.push_back({"rule.delta", "rate margin must lie in (0,1)"});
    }
    if (e == Endpoint::binary_two_arm && !(s.rule.delta > -1.0 && s.rule.delta < 1.0)) {
        out.push_back({"rule.delta", "risk-difference margin must lie in (-1,1)"});
    }

    if (e == Endpoint::binary_two_arm) {
        detail::check_prior(s.analysis_arms.treatment, "analysis_prior.treatment", true, false, out);
        detail::check_prior(s.analysis_arms.control, "analysis_prior.control", true, false, out);
        detail::check_prior(s.design_arms.treatment, "design_prior.treatment", true, true, out);
        detail::check_prior(s.design_arms.control, "design_prior.control", true, true, out);
    } else {
        const bool rate = e == Endpoint::binary_single;
        detail::check_prior(s.analysis_prior, "analysis_prior", rate, false, out);
        detail::check_prior(s.design_prior, "design_prior", rate, true, out);
    }
    return out;
}

/// Throws ValidationError listing every violation.
inline void require_valid(const DesignSpec& s) {
    auto v = validate(s);
    if (!v.empty()) throw ValidationError(std::move(v));
}

// ---------------------------------------------------------------------------
// Prevalence
// ---------------------------------------------------------------------------

/// Design-prior probability of the effective region.
inline double gamma1_of(const PriorSpec& prior, double margin, Direction direction) {
    using K = PriorSpec::Kind;
    switch (prior.kind) {
        case K::normal: {
            detail::require(prior.sd > 0.0, "gamma1_of: sd must be positive");
            const double z = (margin - prior.mean) / prior.sd;
            return direction == Direction::greater ? detail::phi(-z) : detail::phi(z);
        }
        case K::beta:
            detail::require(margin >= 0.0 && margin <= 1.0, "gamma1_of: beta prior needs a margin in [0,1]");
            return direction == Direction::greater ? reg_inc_beta_upper(margin, prior.alpha, prior.beta)
                                                   : reg_inc_beta(margin, prior.alpha, prior.beta);
        case K::point:
            return direction == Direction::greater ? (prior.value > margin ? 1.0 : 0.0)
                                                   : (prior.value < margin ? 1.0 : 0.0);
        case K::flat: break;
    }
    throw DomainError("gamma1_of: a flat prior has no prevalence");
}

/// Design-prior probability of the ineffective region, evaluated as its own tail.
inline double gamma0_of(const PriorSpec& prior, double margin, Direction direction) {
    using K = PriorSpec::Kind;
    switch (prior.kind) {
        case K::normal: {
            detail::require(prior.sd > 0.0, "gamma0_of: sd must be positive");
            const double z = (margin - prior.mean) / prior.sd;
            return direction == Direction::greater ? detail::phi(z) : detail::phi(-z);
        }
        case K::beta:
            detail::require(margin >= 0.0 && margin <= 1.0, "gamma0_of: beta prior needs a margin in [0,1]");
            return direction == Direction::greater ? reg_inc_beta(margin, prior.alpha, prior.beta)
                                                   : reg_inc_beta_upper(margin, prior.alpha, prior.beta);
        case K::point:
            return 1.0 - gamma1_of(prior, margin, direction);
        case K::flat: break;
    }
    throw DomainError("gamma0_of: a flat prior has no prevalence");
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(json& j, const PriorSpec& p) {
    using K = PriorSpec::Kind;
    j = json::object();
    j["kind"] = to_string(p.kind);
    if (p.kind == K::normal) {
        j["mean"] = p.mean;
        j["sd"] = p.sd;
    } else if (p.kind == K::beta) {
        j["alpha"] = p.alpha;
        j["beta"] = p.beta;
    } else if (p.kind == K::point) {
        j["value"] = p.value;
    }
}

inline void to_json(json& j, const ArmPriors& a) { j = json{{"treatment", a.treatment}, {"control", a.control}}; }

inline void to_json(json& j, const DecisionRule& r) {
    j = json{{"delta", r.delta}, {"c", r.c}, {"direction", to_string(r.direction)}};
}

inline void to_json(json& j, const DesignSpec& s) {
    j = json::object();
    j["endpoint"] = to_string(s.endpoint);
    if (s.n_T) j["n_T"] = *s.n_T;
    if (s.n_C) j["n_C"] = *s.n_C;
    if (s.sigma_T) j["sigma_T"] = *s.sigma_T;
    if (s.sigma_C) j["sigma_C"] = *s.sigma_C;
    if (s.events) j["events"] = *s.events;
    if (s.allocation) j["allocation"] = *s.allocation;
    if (s.null_rate) j["null_rate"] = *s.null_rate;
    if (s.benefit) j["benefit"] = to_string(*s.benefit);
    if (s.two_arm_binary()) {
        j["analysis_prior"] = s.analysis_arms;
        j["design_prior"] = s.design_arms;
    } else {
        j["analysis_prior"] = s.analysis_prior;
        j["design_prior"] = s.design_prior;
    }
    j["rule"] = s.rule;
}

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Field readers that record violations instead of throwing.
class JsonReader {
public:
    std::vector<Violation> violations;

    const json* field(const json& obj, const std::string& key, const std::string& path, bool required) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            if (required) violations.push_back({path, "missing required field"});
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& path, bool required) {
        const json* v = field(obj, key, path, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            violations.push_back({path, "expected a number"});
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<int> count(const json& obj, const std::string& key, const std::string& path, bool required) {
        const json* v = field(obj, key, path, required);
        if (!v) return std::nullopt;
        if (v->is_number_integer() || v->is_number_unsigned()) {
            const auto n = v->get<long long>();
            if (n < 0 || n > 100000000) {
                violations.push_back({path, "count out of range"});
                return std::nullopt;
            }
            return static_cast<int>(n);
        }
        if (v->is_number_float()) {
            const double d = v->get<double>();
            if (d == std::floor(d) && d >= 0.0 && d <= 1e8) return static_cast<int>(d);
        }
        violations.push_back({path, "expected a non-negative integer"});
        return std::nullopt;
    }

    std::optional<std::string> text(const json& obj, const std::string& key, const std::string& path, bool required) {
        const json* v = field(obj, key, path, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            violations.push_back({path, "expected a string"});
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<PriorSpec> prior(const json& obj, const std::string& key, const std::string& path) {
        const json* v = field(obj, key, path, true);
        if (!v) return std::nullopt;
        return prior_value(*v, path);
    }

    std::optional<PriorSpec> prior_value(const json& v, const std::string& path) {
        if (!v.is_object()) {
            violations.push_back({path, "expected a prior object"});
            return std::nullopt;
        }
        const auto kind = text(v, "kind", path + ".kind", true);
        if (!kind) return std::nullopt;
        const std::size_t before = violations.size();
        PriorSpec p;
        if (*kind == "normal") {
            const auto m = number(v, "mean", path + ".mean", true);
            const auto s = number(v, "sd", path + ".sd", true);
            if (m && s) p = PriorSpec::normal(*m, *s);
        } else if (*kind == "beta") {
            const auto a = number(v, "alpha", path + ".alpha", true);
            const auto b = number(v, "beta", path + ".beta", true);
            if (a && b) p = PriorSpec::beta_dist(*a, *b);
        } else if (*kind == "flat") {
            p = PriorSpec::flat();
        } else if (*kind == "point") {
            const auto x = number(v, "value", path + ".value", true);
            if (x) p = PriorSpec::point(*x);
        } else {
            violations.push_back({path + ".kind", "unknown prior kind '" + *kind + "'"});
        }
        if (violations.size() != before) return std::nullopt;
        return p;
    }

    std::optional<ArmPriors> arms(const json& obj, const std::string& key, const std::string& path) {
        const json* v = field(obj, key, path, true);
        if (!v) return std::nullopt;
        if (!v->is_object() || !v->contains("treatment") || !v->contains("control")) {
            violations.push_back({path, "expected {\"treatment\": prior, \"control\": prior}"});
            return std::nullopt;
        }
        const auto t = prior(*v, "treatment", path + ".treatment");
        const auto c = prior(*v, "control", path + ".control");
        if (!t || !c) return std::nullopt;
        return ArmPriors{*t, *c};
    }
};

inline std::optional<Endpoint> parse_endpoint(const std::string& s) {
    if (s == "continuous_single") return Endpoint::continuous_single;
    if (s == "continuous_two_arm") return Endpoint::continuous_two_arm;
    if (s == "binary_single") return Endpoint::binary_single;
    if (s == "binary_two_arm") return Endpoint::binary_two_arm;
    if (s == "tte") return Endpoint::tte;
    return std::nullopt;
}

}  // namespace detail

/// Parse a design document. Structural and semantic violations are collected
/// together; on any violation a ValidationError lists all of them.
/// With `require_c` false a missing rule.c is tolerated (calibration inputs).
inline DesignSpec design_from_json(const json& j, bool require_c = true) {
    detail::JsonReader rd;
    DesignSpec s;
    if (!j.is_object()) throw ValidationError(std::vector<Violation>{{"", "design must be a JSON object"}});

    const auto ep = rd.text(j, "endpoint", "endpoint", true);
    if (ep) {
        if (auto e = detail::parse_endpoint(*ep)) {
            s.endpoint = *e;
        } else {
            rd.violations.push_back({"endpoint", "unknown endpoint '" + *ep + "'"});
            throw ValidationError(rd.violations);
        }
    } else {
        throw ValidationError(rd.violations);
    }

    s.n_T = rd.count(j, "n_T", "n_T", false);
    s.n_C = rd.count(j, "n_C", "n_C", false);
    s.sigma_T = rd.number(j, "sigma_T", "sigma_T", false);
    s.sigma_C = rd.number(j, "sigma_C", "sigma_C", false);
    s.events = rd.count(j, "events", "events", false);
    s.allocation = rd.number(j, "allocation", "allocation", false);
    s.null_rate = rd.number(j, "null_rate", "null_rate", false);
    if (auto b = rd.text(j, "benefit", "benefit", false)) {
        if (*b == "higher") {
            s.benefit = Benefit::higher;
        } else if (*b == "lower") {
            s.benefit = Benefit::lower;
        } else {
            rd.violations.push_back({"benefit", "benefit must be 'higher' or 'lower'"});
        }
    }

    bool priors_ok = true;
    if (s.endpoint == Endpoint::binary_two_arm) {
        auto a = rd.arms(j, "analysis_prior", "analysis_prior");
        auto d = rd.arms(j, "design_prior", "design_prior");
        if (a) s.analysis_arms = *a;
        if (d) s.design_arms = *d;
        priors_ok = a && d;
    } else {
        auto a = rd.prior(j, "analysis_prior", "analysis_prior");
        auto d = rd.prior(j, "design_prior", "design_prior");
        if (a) s.analysis_prior = *a;
        if (d) s.design_prior = *d;
        priors_ok = a && d;
    }

    const json* rule = rd.field(j, "rule", "rule", true);
    bool rule_ok = rule != nullptr;
    if (rule) {
        if (!rule->is_object()) {
            rd.violations.push_back({"rule", "expected a rule object"});
            rule_ok = false;
        } else {
            const auto delta = rd.number(*rule, "delta", "rule.delta", true);
            const auto c = rd.number(*rule, "c", "rule.c", require_c);
            if (delta) s.rule.delta = *delta;
            if (c) {
                s.rule.c = *c;
            } else if (!require_c) {
                s.rule.c = 0.5;  // placeholder; calibration overrides it
            }
            const auto dir = rd.text(*rule, "direction", "rule.direction", false);
            if (dir) {
                if (*dir == "greater") {
                    s.rule.direction = Direction::greater;
                } else if (*dir == "less") {
                    s.rule.direction = Direction::less;
                } else {
                    rd.violations.push_back({"rule.direction", "direction must be 'greater' or 'less'"});
                }
            } else {
                s.rule.direction = s.endpoint == Endpoint::tte ? Direction::less : Direction::greater;
            }
        }
    }

    static const std::vector<std::string> known = {"endpoint", "n_T",   "n_C",  "sigma_T",        "sigma_C",
                                                   "events",   "allocation", "null_rate", "benefit",
                                                   "analysis_prior", "design_prior", "rule"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            rd.violations.push_back({it.key(), "unknown field"});
        }
    }

    // Semantic checks only on the parts that parsed, to avoid duplicate reports.
    auto semantic = validate(s);
    for (auto& v : semantic) {
        const bool prior_path = v.path.rfind("analysis_prior", 0) == 0 || v.path.rfind("design_prior", 0) == 0;
        const bool rule_path = v.path.rfind("rule", 0) == 0;
        if (prior_path && !priors_ok) continue;
        if (rule_path && !rule_ok) continue;
        if (std::find(rd.violations.begin(), rd.violations.end(), v) == rd.violations.end()) {
            const bool dup = std::any_of(rd.violations.begin(), rd.violations.end(),
                                         [&](const Violation& x) { return x.path == v.path; });
            if (!dup) rd.violations.push_back(v);
        }
    }
    if (!rd.violations.empty()) throw ValidationError(rd.violations);
    return s;
}

inline json to_json(const OCResult& r) {
    json j = json::object();
    j["bp"] = detail::number_or_null(r.bp);
    j["bcp"] = detail::number_or_null(r.bcp);
    j["bt1e"] = detail::number_or_null(r.bt1e);
    j["ft1e"] = detail::number_or_null(r.ft1e);
    j["pid"] = detail::number_or_null(r.pid);
    j["for"] = detail::number_or_null(r.for_);
    j["gamma1"] = detail::number_or_null(r.gamma1);
    j["gamma0"] = detail::number_or_null(r.gamma0);
    j["warnings"] = r.warnings;
    return j;
}

inline json violations_to_json(const std::vector<Violation>& v) {
    json arr = json::array();
    for (const auto& x : v) arr.push_back({{"path", x.path}, {"message", x.message}});
    return arr;
}

// ---------------------------------------------------------------------------
// Assembling an OCResult from decision-table masses
// ---------------------------------------------------------------------------

/// Masses of the four decision-table cells (true positives etc.) under the
/// design prior, plus the point-null success probability.
struct DecisionMasses {
    double tp = 0.0;  // effective, success
    double fp = 0.0;  // ineffective, success
    double fn = 0.0;  // effective, failure
    double tn = 0.0;  // ineffective, failure
    double bp = 0.0;  // success
    double ft1e = 0.0;
    double gamma1 = 0.0;
    double gamma0 = 0.0;
};

// Subnormal denominators carry no relative precision, so they count as zero.
inline double safe_ratio(double num, double den) {
    return den >= std::numeric_limits<double>::min() ? num / den : kNaN;
}

inline OCResult oc_from_masses(const DecisionMasses& m) {
    OCResult r;
    r.gamma1 = m.gamma1;
    r.gamma0 = m.gamma0;
    r.bp = std::clamp(m.bp, 0.0, 1.0);
    r.ft1e = std::clamp(m.ft1e, 0.0, 1.0);
    r.bcp = safe_ratio(m.tp, m.gamma1);
    r.bt1e = safe_ratio(m.fp, m.gamma0);
    r.pid = safe_ratio(m.fp, m.tp + m.fp);
    r.for_ = safe_ratio(m.fn, m.fn + m.tn);
    for (double* p : {&r.bcp, &r.bt1e, &r.pid, &r.for_}) {
        if (std::isfinite(*p)) *p = std::clamp(*p, 0.0, 1.0);
    }
    return r;
}

}  // namespace bayescal
