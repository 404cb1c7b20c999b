#pragma once

// Command-line front end. `run_cli` takes explicit streams so every command can
// be driven in-process by tests.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bayescal/calibrate.hpp"
#include "bayescal/case_study.hpp"
#include "bayescal/mc_oracle.hpp"
#include "bayescal/presets.hpp"
#include "bayescal/service.hpp"

namespace bayescal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

enum class Format { pretty, json, csv };

/// Bad invocation or unreadable input; maps to exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Rendering helpers
// ---------------------------------------------------------------------------

inline std::string fixed4(double x) {
    if (std::isnan(x)) return "NaN";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

/// Shortest text that parses back to the same double; empty for NaN.
inline std::string full(double x) {
    if (std::isnan(x)) return "";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline void csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << csv_field(cells[i]);
    }
    out << "\r\n";
}

/// Left-aligned text table with two-space gutters.
inline void pretty_table(std::ostream& out, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> w(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
        std::string s;
        for (std::size_t i = 0; i < r.size(); ++i) {
            s += r[i];
            if (i + 1 < r.size()) s += std::string(w[i] - r[i].size() + 2, ' ');
        }
        out << s << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

inline Format parse_format(const std::string& s) {
    if (s == "pretty") return Format::pretty;
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw UsageError("unknown format '" + s + "'");
}

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw UsageError("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Config document from a file path or `preset:NAME`.
inline json read_config(const std::string& path) {
    static const std::string prefix = "preset:";
    if (path.rfind(prefix, 0) == 0) {
        auto j = preset_json(path.substr(prefix.size()));
        if (!j) throw UsageError("unknown preset '" + path.substr(prefix.size()) + "'");
        return *j;
    }
    return read_json_file(path);
}

/// Loads a design; an explicit --c overrides (and stands in for) the file's rule.c.
inline DesignSpec load_design(const std::string& path, std::optional<double> c = std::nullopt, bool need_c = true) {
    DesignSpec s = design_from_json(read_config(path), need_c && !c);
    if (c) {
        s.rule.c = *c;
        require_valid(s);
    }
    return s;
}

inline json oc_record(const OCResult& r, std::optional<double> c = std::nullopt) {
    json j = to_json(r);
    if (c) j["c"] = *c;
    return j;
}

inline std::vector<std::string> oc_cells(const OCResult& r) {
    return {full(r.bp), full(r.bcp), full(r.bt1e), full(r.ft1e), full(r.pid), full(r.for_), full(r.gamma1),
            full(r.gamma0)};
}

inline std::vector<std::string> oc_cells4(const OCResult& r) {
    return {fixed4(r.bp),  fixed4(r.bcp),    fixed4(r.bt1e),  fixed4(r.ft1e),
            fixed4(r.pid), fixed4(r.for_), fixed4(r.gamma1), fixed4(r.gamma0)};
}

inline const std::vector<std::string>& oc_header() {
    static const std::vector<std::string> h = {"bp", "bcp", "bt1e", "ft1e", "pid", "for", "gamma1", "gamma0"};
    return h;
}

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code; warnings escalate to 3 under --strict.
// ---------------------------------------------------------------------------

struct Context {
    std::ostream& out;
    std::ostream& err;
    bool strict = false;

    int finish(const std::vector<std::string>& warnings) const {
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        return strict && !warnings.empty() ? kExitNumeric : kExitOk;
    }
};

inline int cmd_validate(const Context& ctx, const std::string& path) {
    const DesignSpec s = load_design(path);
    ctx.out << "valid " << to_string(s.endpoint) << " design\n";
    return kExitOk;
}

inline int cmd_oc(const Context& ctx, const std::string& path, std::optional<double> c, Format f) {
    const DesignSpec s = load_design(path, c);
    const OCResult r = evaluate(s);
    switch (f) {
        case Format::json: ctx.out << oc_record(r).dump() << '\n'; break;
        case Format::csv: {
            std::vector<std::string> h = {"c"};
            h.insert(h.end(), oc_header().begin(), oc_header().end());
            csv_row(ctx.out, h);
            std::vector<std::string> row = {full(s.rule.c)};
            auto cells = oc_cells(r);
            row.insert(row.end(), cells.begin(), cells.end());
            csv_row(ctx.out, row);
            break;
        }
        case Format::pretty: {
            std::vector<std::vector<std::string>> rows = {{"endpoint", to_string(s.endpoint)}, {"c", fixed4(s.rule.c)}};
            const auto cells = oc_cells4(r);
            for (std::size_t i = 0; i < cells.size(); ++i) rows.push_back({oc_header()[i], cells[i]});
            pretty_table(ctx.out, {"metric", "value"}, rows);
            break;
        }
    }
    return ctx.finish(r.warnings);
}

inline int cmd_curve(const Context& ctx, const std::string& path, double c_min, double c_max, int steps, Format f) {
    if (!(c_min > 0.0 && c_min < c_max && c_max < 1.0)) throw UsageError("need 0 < c-min < c-max < 1");
    if (steps < 2) throw UsageError("need --steps >= 2");
    const DesignSpec s = load_design(path, std::nullopt, false);
    const auto curve = oc_curve(s, linear_grid(c_min, c_max, steps));
    std::vector<std::string> warnings;
    for (const auto& [c, r] : curve) {
        for (const auto& w : r.warnings) {
            if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
        }
    }
    std::vector<std::string> h = {"c"};
    h.insert(h.end(), oc_header().begin(), oc_header().end());
    switch (f) {
        case Format::json: ctx.out << service::curve_json(curve).dump() << '\n'; break;
        case Format::csv:
            csv_row(ctx.out, h);
            for (const auto& [c, r] : curve) {
                std::vector<std::string> row = {full(c)};
                auto cells = oc_cells(r);
                row.insert(row.end(), cells.begin(), cells.end());
                csv_row(ctx.out, row);
            }
            break;
        case Format::pretty: {
            std::vector<std::vector<std::string>> rows;
            for (const auto& [c, r] : curve) {
                std::vector<std::string> row = {fixed4(c)};
                auto cells = oc_cells4(r);
                row.insert(row.end(), cells.begin(), cells.end());
                rows.push_back(row);
            }
            pretty_table(ctx.out, h, rows);
            break;
        }
    }
    return ctx.finish(warnings);
}

inline std::vector<std::string> sensitivity_cells(const SensitivityRow& row, bool pretty) {
    const CalibrationResult& r = row.result;
    auto num = [&](double x) { return pretty ? fixed4(x) : full(x); };
    std::vector<std::string> cells = {row.scenario, to_string(r.target.metric), full(r.target.level)};
    if (!r.feasible) {
        cells.insert(cells.end(), {"INFEASIBLE", "", "", "", "", ""});
        return cells;
    }
    const OCResult& a = r.achieved;
    cells.insert(cells.end(), {num(r.c_star), num(a.ft1e), num(a.bt1e), num(a.for_), num(a.bcp), num(a.bp)});
    return cells;
}

inline int cmd_calibrate(const Context& ctx, const std::string& path, const std::vector<std::string>& target_text,
                         const std::string& scenarios_path, Format f) {
    if (target_text.empty()) throw UsageError("at least one --target is required");
    std::vector<CalibrationTarget> targets;
    for (const auto& t : target_text) {
        try {
            targets.push_back(parse_target(t));
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }
    const DesignSpec s = load_design(path, std::nullopt, false);
    std::vector<Scenario> scenarios;
    if (!scenarios_path.empty()) scenarios = scenarios_from_json(read_json_file(scenarios_path));
    for (const auto& sc : scenarios) require_valid(apply_scenario(s, sc));
    const auto rows = sensitivity_table(s, scenarios, targets);

    std::vector<std::string> warnings;
    for (const auto& r : rows) {
        if (!r.result.feasible) ctx.err << "note: " << r.scenario << " " << to_string(r.result.target.metric) << ": "
                                        << r.result.message << '\n';
        for (const auto& w : r.result.achieved.warnings) warnings.push_back(w);
    }
    static const std::vector<std::string> header = {"scenario", "target_metric", "target_level", "c_star", "ft1e",
                                                    "bt1e",     "for",           "bcp",          "bp"};
    switch (f) {
        case Format::json: {
            json arr = json::array();
            for (const auto& r : rows) arr.push_back(to_json(r));
            ctx.out << json{{"rows", arr}}.dump() << '\n';
            break;
        }
        case Format::csv:
            csv_row(ctx.out, header);
            for (const auto& r : rows) csv_row(ctx.out, sensitivity_cells(r, false));
            break;
        case Format::pretty: {
            std::vector<std::vector<std::string>> table;
            for (const auto& r : rows) table.push_back(sensitivity_cells(r, true));
            pretty_table(ctx.out, header, table);
            break;
        }
    }
    return ctx.finish(warnings);
}

inline int cmd_case_study(const Context& ctx, Format f) {
    const CaseStudyReport rep = run_case_study();
    auto opt = [](std::optional<double> v, bool pretty) {
        return v ? (pretty ? fixed4(*v) : full(*v)) : std::string(pretty ? "-" : "");
    };
    static const std::vector<std::string> header = {
        "target", "analysis_prior", "design_prior", "c_star", "ref_c",   "ft1e",    "ref_ft1e", "bt1e",
        "ref_bt1e", "for",          "ref_for",      "bcp",    "ref_bcp", "bp",      "ref_bp",   "posterior",
        "decision", "ref_decision", "status"};
    auto cells = [&](const CaseStudyRow& row, bool pretty) {
        auto num = [&](double x) { return pretty ? fixed4(x) : full(x); };
        const OCResult& a = row.result.achieved;
        const Reference& ref = row.reference;
        return std::vector<std::string>{row.target_label,
                                        row.analysis_label,
                                        row.design_label,
                                        num(row.result.c_star),
                                        opt(ref.c, pretty),
                                        num(a.ft1e),
                                        opt(ref.ft1e, pretty),
                                        num(a.bt1e),
                                        opt(ref.bt1e, pretty),
                                        num(a.for_),
                                        opt(ref.for_, pretty),
                                        num(a.bcp),
                                        opt(ref.bcp, pretty),
                                        num(a.bp),
                                        opt(ref.bp, pretty),
                                        num(row.decision.posterior_prob),
                                        row.decision.success ? "SUCCESS" : "FAIL",
                                        row.reference_success ? "SUCCESS" : "FAIL",
                                        row.pass() ? "PASS" : "FAIL"};
    };
    switch (f) {
        case Format::json: ctx.out << to_json(rep).dump() << '\n'; break;
        case Format::csv:
            csv_row(ctx.out, header);
            for (const auto& row : rep.rows) csv_row(ctx.out, cells(row, false));
            break;
        case Format::pretty: {
            ctx.out << "posterior Pr(benefit | data), flat priors:        " << fixed4(rep.posterior_flat)
                    << "  (reference 0.965)  " << (rep.posterior_flat_pass() ? "PASS" : "FAIL") << '\n';
            ctx.out << "posterior Pr(benefit | data), historical priors:  " << fixed4(rep.posterior_matched)
                    << "  (reference 0.966)  " << (rep.posterior_matched_pass() ? "PASS" : "FAIL") << "\n\n";
            std::vector<std::vector<std::string>> table;
            for (const auto& row : rep.rows) table.push_back(cells(row, true));
            pretty_table(ctx.out, header, table);
            bool any = false;
            for (const auto& row : rep.rows) {
                for (const auto& msg : row.failures) {
                    if (!any) ctx.out << '\n';
                    any = true;
                    ctx.out << row.target_label << " / " << row.design_label << ": " << msg << '\n';
                }
            }
            break;
        }
    }
    return kExitOk;
}

inline int cmd_simulate(const Context& ctx, const std::string& path, std::int64_t sims, std::uint64_t seed,
                        Format f) {
    if (sims < 1) throw UsageError("--sims must be at least 1");
    const DesignSpec s = load_design(path);
    const SimReport rep = simulate_oc(s, static_cast<std::uint64_t>(sims), seed);
    std::optional<OCResult> exact;
    try {
        exact = evaluate(s);
    } catch (const DomainError&) {
        // no closed form for this configuration
    }
    struct Line {
        const char* name;
        double est, se, cf;
    };
    auto pick = [](const OCResult& r, int i) {
        const double v[] = {r.bp, r.bcp, r.bt1e, r.ft1e, r.pid, r.for_, r.gamma1, r.gamma0};
        return v[i];
    };
    std::vector<Line> lines;
    for (int i = 0; i < 8; ++i) {
        lines.push_back({oc_header()[static_cast<std::size_t>(i)].c_str(), pick(rep.estimates, i),
                         pick(rep.standard_errors, i), exact ? pick(*exact, i) : kNaN});
    }
    auto z = [](const Line& l) { return l.se > 0.0 ? (l.est - l.cf) / l.se : kNaN; };
    switch (f) {
        case Format::json: {
            json j = to_json(rep);
            if (exact) {
                json cf = oc_record(*exact);
                cf.erase("warnings");
                j["closed_form"] = cf;
                json d;
                for (const auto& l : lines) d[l.name] = detail::number_or_null(l.est - l.cf);
                j["delta"] = d;
            }
            ctx.out << j.dump() << '\n';
            break;
        }
        case Format::csv:
            csv_row(ctx.out, {"metric", "estimate", "se", "closed_form", "delta", "z"});
            for (const auto& l : lines) {
                csv_row(ctx.out, {l.name, full(l.est), full(l.se), full(l.cf), full(l.est - l.cf), full(z(l))});
            }
            break;
        case Format::pretty: {
            ctx.out << "sims " << rep.n_sims << "  seed " << rep.seed << "  rng " << rep.rng_version << '\n';
            std::vector<std::vector<std::string>> table;
            for (const auto& l : lines) {
                table.push_back({l.name, fixed4(l.est), fixed4(l.se), fixed4(l.cf), fixed4(l.est - l.cf),
                                 std::isnan(z(l)) ? "NaN" : [&] {
                                     char b[32];
                                     std::snprintf(b, sizeof b, "%.2f", z(l));
                                     return std::string(b);
                                 }()});
            }
            pretty_table(ctx.out, {"metric", "estimate", "se", "closed_form", "delta", "z"}, table);
            break;
        }
    }
    return ctx.finish(exact ? exact->warnings : std::vector<std::string>{});
}

inline int cmd_decide(const Context& ctx, const std::string& path, std::optional<double> c, const ObservedData& data,
                      Format f) {
    const DesignSpec s = load_design(path, c);
    DecisionRecord d;
    try {
        d = decide(s, data);
    } catch (const DomainError& e) {
        throw UsageError(e.what());  // missing or out-of-range observations
    }
    switch (f) {
        case Format::json:
            ctx.out << json{{"posterior_prob", d.posterior_prob}, {"success", d.success}, {"c", s.rule.c},
                            {"warnings", d.warnings}}
                           .dump()
                    << '\n';
            break;
        case Format::csv:
            csv_row(ctx.out, {"posterior_prob", "c", "success"});
            csv_row(ctx.out, {full(d.posterior_prob), full(s.rule.c), d.success ? "true" : "false"});
            break;
        case Format::pretty:
            ctx.out << "posterior " << fixed4(d.posterior_prob) << "  c " << fixed4(s.rule.c) << "  "
                    << (d.success ? "SUCCESS" : "FAIL") << '\n';
            break;
    }
    return ctx.finish(d.warnings);
}

inline int cmd_presets(const Context& ctx, const std::string& name) {
    if (name.empty()) {
        for (const auto& n : preset_names()) ctx.out << n << '\n';
        return kExitOk;
    }
    auto j = preset_json(name);
    if (!j) throw UsageError("unknown preset '" + name + "'");
    ctx.out << j->dump(2) << '\n';
    return kExitOk;
}

inline int cmd_serve(const Context& ctx, const std::string& host, int port) {
    const bool ok = service::serve(host, port, [&](int bound) {
        ctx.out << "listening on http://" << host << ':' << bound << std::endl;
    });
    if (!ok) {
        ctx.err << "error: cannot listen on " << host << ':' << port << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian success-criterion calibration: operating characteristics, thresholds, simulation"};
    app.name("bayescal");
    app.require_subcommand(1);
    bool strict = false;
    app.add_flag("--strict", strict, "Exit 3 when any numeric precision warning is raised");

    std::string format_text = "pretty";
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format_text, "Output format")
            ->check(CLI::IsMember({"pretty", "json", "csv"}))
            ->capture_default_str();
    };
    std::string config;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("config", config, "Design JSON file, or preset:NAME")->required();
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check a design file");
    add_config(validate_cmd);

    std::optional<double> c;
    auto* oc_cmd = app.add_subcommand("oc", "Operating characteristics at one threshold");
    add_config(oc_cmd);
    oc_cmd->add_option("--c", c, "Posterior threshold (overrides rule.c)");
    add_format(oc_cmd);

    double c_min = 0.5;
    double c_max = 0.99;
    int steps = 50;
    auto* curve_cmd = app.add_subcommand("curve", "Operating characteristics across a threshold grid");
    add_config(curve_cmd);
    curve_cmd->add_option("--c-min", c_min)->capture_default_str();
    curve_cmd->add_option("--c-max", c_max)->capture_default_str();
    curve_cmd->add_option("--steps", steps)->capture_default_str();
    add_format(curve_cmd);

    std::vector<std::string> targets;
    std::string scenarios_path;
    auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate the threshold against error-rate targets");
    add_config(cal_cmd);
    cal_cmd->add_option("--target", targets, "metric=level with metric in ft1e|pid|bt1e (repeatable)")->required();
    cal_cmd->add_option("--scenarios", scenarios_path, "JSON file of named design priors");
    add_format(cal_cmd);

    auto* case_cmd = app.add_subcommand("case-study", "Reproduce the two-arm mortality case study");
    add_format(case_cmd);

    std::int64_t sims = 100000;
    std::uint64_t seed = 42;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimates with closed-form deltas");
    add_config(sim_cmd);
    sim_cmd->add_option("--sims", sims)->capture_default_str();
    sim_cmd->add_option("--seed", seed)->capture_default_str();
    add_format(sim_cmd);

    std::optional<double> estimate;
    std::optional<int> x_T;
    std::optional<int> x_C;
    auto* decide_cmd = app.add_subcommand("decide", "Posterior probability and decision for observed data");
    add_config(decide_cmd);
    decide_cmd->add_option("--c", c, "Posterior threshold (overrides rule.c)");
    decide_cmd->add_option("--estimate", estimate, "Observed effect estimate (continuous, log-HR for tte)");
    decide_cmd->add_option("--x-T", x_T, "Treatment-arm responders");
    decide_cmd->add_option("--x-C", x_C, "Control-arm responders");
    add_format(decide_cmd);

    std::string preset_name;
    auto* presets_cmd = app.add_subcommand("presets", "List built-in presets or print one");
    presets_cmd->add_option("name", preset_name);

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const Context ctx{out, err, strict};
    try {
        const Format f = parse_format(format_text);
        if (*validate_cmd) return cmd_validate(ctx, config);
        if (*oc_cmd) return cmd_oc(ctx, config, c, f);
        if (*curve_cmd) return cmd_curve(ctx, config, c_min, c_max, steps, f);
        if (*cal_cmd) return cmd_calibrate(ctx, config, targets, scenarios_path, f);
        if (*case_cmd) return cmd_case_study(ctx, f);
        if (*sim_cmd) return cmd_simulate(ctx, config, sims, seed, f);
        if (*decide_cmd) return cmd_decide(ctx, config, c, ObservedData{estimate, x_T, x_C}, f);
        if (*presets_cmd) return cmd_presets(ctx, preset_name);
        if (*serve_cmd) return cmd_serve(ctx, host, port);
    } catch (const ValidationError& e) {
        err << "invalid design:\n";
        for (const auto& v : e.violations()) err << "  " << v.path << ": " << v.message << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}

}  // namespace bayescal::cli
