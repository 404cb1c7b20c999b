#pragma once

// Stateless JSON-over-HTTP facade. Request handling is a pure function of
// (method, path, body) so it can be exercised without a socket; `serve` binds
// it to cpp-httplib.

#include <functional>
#include <string>
#include <vector>

#include <httplib.h>

#include "bayescal/calibrate.hpp"
#include "bayescal/presets.hpp"

namespace bayescal::service {

inline constexpr int kMaxArmSize = 1000;

struct Response {
    int status = 200;
    json body;
};

enum class ErrorCode { validation, infeasible, numeric, not_found };

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::validation: return "validation";
        case ErrorCode::infeasible: return "infeasible";
        case ErrorCode::numeric: return "numeric";
        case ErrorCode::not_found: return "not_found";
    }
    return "?";
}

inline Response error(int status, ErrorCode code, const std::string& message, json details = json::array()) {
    return {status, {{"error", {{"code", to_string(code)}, {"message", message}, {"details", std::move(details)}}}}};
}

/// Details carry the offending field paths; the message spells out each violation.
inline Response validation_error(const ValidationError& e) {
    json paths = json::array();
    std::string msg = "invalid request";
    for (const auto& v : e.violations()) {
        paths.push_back(v.path);
        msg += (paths.size() == 1 ? ": " : "; ") + v.path + ": " + v.message;
    }
    return error(400, ErrorCode::validation, msg, paths);
}

inline Response numeric_error(const std::vector<std::string>& warnings) {
    std::string msg = "numeric precision check failed";
    for (const auto& w : warnings) msg += ": " + w;
    return error(422, ErrorCode::numeric, msg);
}

namespace detail {

inline ValidationError invalid(const std::string& path, const std::string& message) {
    return ValidationError(std::vector<Violation>{{path, message}});
}

inline void check_limits(const DesignSpec& s) {
    if (s.endpoint != Endpoint::binary_two_arm) return;
    std::vector<Violation> v;
    if (*s.n_T > kMaxArmSize) v.push_back({"n_T", "two-arm binary designs are limited to 1000 per arm"});
    if (*s.n_C > kMaxArmSize) v.push_back({"n_C", "two-arm binary designs are limited to 1000 per arm"});
    if (!v.empty()) throw ValidationError(v);
}

inline const json& member(const json& body, const char* key, const char* path) {
    if (!body.is_object() || !body.contains(key)) throw invalid(path, "missing required field");
    return body.at(key);
}

inline std::vector<double> parse_grid(const json& body) {
    if (body.contains("c_grid")) {
        const json& g = body["c_grid"];
        if (!g.is_array() || g.empty()) throw invalid("c_grid", "expected a non-empty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number()) throw invalid("c_grid[" + std::to_string(i) + "]", "expected a number");
            out.push_back(g[i].get<double>());
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!(out[i] > 0.0 && out[i] < 1.0)) {
                throw invalid("c_grid[" + std::to_string(i) + "]", "grid values must lie in (0,1)");
            }
            if (i > 0 && !(out[i] > out[i - 1])) {
                throw invalid("c_grid[" + std::to_string(i) + "]", "grid must be strictly increasing");
            }
        }
        return out;
    }
    std::vector<Violation> v;
    auto num = [&](const char* key) -> double {
        if (!body.contains(key) || !body[key].is_number()) {
            v.push_back({key, "missing required field"});
            return kNaN;
        }
        return body[key].get<double>();
    };
    const double lo = num("c_min");
    const double hi = num("c_max");
    const double steps = num("steps");
    if (!v.empty()) throw ValidationError(v);
    if (!(lo > 0.0 && lo < hi && hi < 1.0)) throw invalid("c_min", "need 0 < c_min < c_max < 1");
    if (!(steps >= 2.0) || steps != std::floor(steps)) throw invalid("steps", "need an integer >= 2");
    return linear_grid(lo, hi, static_cast<int>(steps));
}

inline std::vector<CalibrationTarget> parse_targets(const json& body) {
    const json& t = member(body, "targets", "targets");
    if (!t.is_array() || t.empty()) throw invalid("targets", "at least one target is required");
    std::vector<CalibrationTarget> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string path = "targets[" + std::to_string(i) + "]";
        try {
            if (t[i].is_string()) {
                out.push_back(parse_target(t[i].get<std::string>()));
            } else if (t[i].is_object() && t[i].contains("metric") && t[i].contains("level") &&
                       t[i]["metric"].is_string() && t[i]["level"].is_number()) {
                out.push_back(parse_target(t[i]["metric"].get<std::string>() + "=" +
                                           nlohmann::json(t[i]["level"].get<double>()).dump()));
            } else {
                throw invalid(path, "expected \"metric=level\" or {\"metric\", \"level\"}");
            }
        } catch (const DomainError& e) {
            throw invalid(path, e.what());
        }
    }
    return out;
}

}  // namespace detail

inline json curve_json(const std::vector<std::pair<double, OCResult>>& curve) {
    json arr = json::array();
    for (const auto& [c, r] : curve) {
        json row = to_json(r);
        row["c"] = c;
        arr.push_back(row);
    }
    return arr;
}

inline Response handle_oc(const json& body) {
    const DesignSpec s = design_from_json(body);
    detail::check_limits(s);
    const OCResult r = evaluate(s);
    if (!r.warnings.empty()) return numeric_error(r.warnings);
    return {200, to_json(r)};
}

inline Response handle_curve(const json& body) {
    const DesignSpec s = design_from_json(detail::member(body, "spec", "spec"), false);
    detail::check_limits(s);
    const auto grid = detail::parse_grid(body);
    const auto curve = oc_curve(s, grid);
    for (const auto& [c, r] : curve) {
        if (!r.warnings.empty()) return numeric_error(r.warnings);
    }
    return {200, curve_json(curve)};
}

inline Response handle_calibrate(const json& body) {
    const DesignSpec s = design_from_json(detail::member(body, "spec", "spec"), false);
    detail::check_limits(s);
    const auto targets = detail::parse_targets(body);
    std::vector<Scenario> scenarios;
    if (body.contains("scenarios") && !body["scenarios"].is_null()) scenarios = scenarios_from_json(body["scenarios"]);
    for (const auto& sc : scenarios) {
        const DesignSpec applied = apply_scenario(s, sc);
        auto v = validate(applied);
        if (!v.empty()) {
            for (auto& x : v) x.path = "scenarios." + sc.name + "." + x.path;
            throw ValidationError(v);
        }
    }
    const auto rows = sensitivity_table(s, scenarios, targets);
    json out = json::array();
    for (const auto& r : rows) out.push_back(to_json(r));
    return {200, {{"rows", out}}};
}

inline Response handle_decide(const json& body) {
    DesignSpec s = design_from_json(detail::member(body, "spec", "spec"));
    detail::check_limits(s);
    const json& d = detail::member(body, "data", "data");
    ObservedData obs;
    if (d.contains("estimate") && d["estimate"].is_number()) obs.estimate = d["estimate"].get<double>();
    if (d.contains("x_T") && d["x_T"].is_number_integer()) obs.x_T = d["x_T"].get<int>();
    if (d.contains("x_C") && d["x_C"].is_number_integer()) obs.x_C = d["x_C"].get<int>();
    DecisionRecord r;
    try {
        r = decide(s, obs);
    } catch (const DomainError& e) {
        return error(400, ErrorCode::validation, e.what(), json::array({"data"}));
    }
    return {200, {{"posterior_prob", r.posterior_prob}, {"success", r.success}, {"c", s.rule.c}, {"warnings", r.warnings}}};
}

inline Response handle_presets() {
    return {200, {{"presets", preset_names()}}};
}

inline Response handle_preset(const std::string& name) {
    auto j = preset_json(name);
    if (!j) return error(404, ErrorCode::not_found, "unknown preset '" + name + "'");
    return {200, *j};
}

/// Routes one request. Never throws.
inline Response handle(const std::string& method, const std::string& path, const std::string& body_text) {
    static const std::string preset_prefix = "/api/v1/presets/";
    try {
        if (method == "GET" && path == "/api/v1/presets") return handle_presets();
        if (method == "GET" && path.rfind(preset_prefix, 0) == 0 && path.size() > preset_prefix.size()) {
            return handle_preset(path.substr(preset_prefix.size()));
        }
        using Handler = Response (*)(const json&);
        Handler h = nullptr;
        if (path == "/api/v1/oc") h = handle_oc;
        if (path == "/api/v1/curve") h = handle_curve;
        if (path == "/api/v1/calibrate") h = handle_calibrate;
        if (path == "/api/v1/decide") h = handle_decide;
        if (!h) return error(404, ErrorCode::not_found, "no route for " + method + " " + path);
        if (method != "POST") return error(404, ErrorCode::not_found, "no route for " + method + " " + path);
        json body;
        try {
            body = json::parse(body_text);
        } catch (const json::parse_error& e) {
            return error(400, ErrorCode::validation, std::string("malformed JSON: ") + e.what());
        }
        return h(body);
    } catch (const ValidationError& e) {
        return validation_error(e);
    } catch (const DomainError& e) {
        return error(422, ErrorCode::numeric, e.what());
    } catch (const std::exception& e) {
        return error(422, ErrorCode::numeric, e.what());
    }
}

/// Binds the router to host:port and blocks. `on_ready` runs once the socket is listening.
inline bool serve(const std::string& host, int port, const std::function<void(int)>& on_ready = {},
                  httplib::Server* external = nullptr) {
    httplib::Server local;
    httplib::Server& srv = external ? *external : local;
    srv.new_task_queue = [] { return new httplib::ThreadPool(std::max(2u, std::min(8u, thread_budget()))); };
    auto route = [](const httplib::Request& req, httplib::Response& res) {
        const Response r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    srv.Get(R"(/api/v1/.*)", route);
    srv.Post(R"(/api/v1/.*)", route);
    const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
    if (bound < 0) return false;
    if (on_ready) on_ready(bound);
    return srv.listen_after_bind();
}

}  // namespace bayescal::service
