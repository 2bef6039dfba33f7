#include "sdmp/harness.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "sdmp/adjoint.hpp"
#include "sdmp/errors.hpp"
#include "sdmp/expression.hpp"
#include "sdmp/forward.hpp"
#include "sdmp/maximum_principle.hpp"
#include "sdmp/problems.hpp"
#include "sdmp/stats.hpp"

namespace sdmp {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::Converge, "converge-lemma31"},
    {ExperimentKind::Crossterm, "crossterm-lemma41"},
    {ExperimentKind::MPScan, "mp-scan"},
    {ExperimentKind::LQSolve, "lq-solve"},
    {ExperimentKind::LQVerify, "lq-verify"},
    {ExperimentKind::AdjointOracle, "adjoint-oracle"},
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Strict JSON reading

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& raw(const char* key) {
        used_.insert(key);
        return j_.at(key);
    }

    Reader child(const char* key) {
        used_.insert(key);
        return Reader(j_.at(key), field(key));
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        out = convert<T>(j_.at(key), field(key));
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!used_.count(item.key()))
                throw ConfigError("config field '" + field(item.key()) + "': unknown key");
    }

    template <class T>
    static T convert(const json& v, const std::string& name) {
        auto bad = [&](const char* what) {
            return ConfigError("config field '" + name + "': expected " + what + ", got " + v.dump());
        };
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw bad("a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw bad("a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw bad("a number");
            return v.get<double>();
        } else if constexpr (std::is_same_v<T, int>) {
            if (!v.is_number_integer()) throw bad("an integer");
            const auto x = v.get<std::int64_t>();
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                throw bad("an integer in range");
            return static_cast<int>(x);
        } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
            if (!v.is_number_unsigned()) throw bad("a non-negative integer");
            return static_cast<T>(v.get<std::uint64_t>());
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) throw bad("an array of numbers");
            std::vector<double> out;
            for (std::size_t i = 0; i < v.size(); ++i)
                out.push_back(convert<double>(v[i], name + "[" + std::to_string(i) + "]"));
            return out;
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

private:
    std::string where(const std::string& key) const {
        const std::string f = key.empty() ? path_ : field(key);
        return f.empty() ? "config: " : "config field '" + f + "': ";
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

double bound_from_json(const json& v, const std::string& name) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    return Reader::convert<double>(v, name);
}

json bound_to_json(double b) {
    if (std::isinf(b)) return b > 0 ? "inf" : "-inf";
    return b;
}

ControlDomain domain_from_json(const json& v, const std::string& name) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "real-line") return ControlDomain::real_line();
        if (s == "punctured-unit") return ControlDomain::punctured_unit();
        throw ConfigError("config field '" + name +
                          "': expected \"real-line\", \"punctured-unit\", {\"intervals\": ...} or "
                          "{\"points\": ...}, got " + v.dump());
    }
    Reader r(v, name);
    try {
        if (r.has("intervals")) {
            const json& parts = r.raw("intervals");
            if (!parts.is_array()) throw ConfigError("config field '" + name + ".intervals': expected an array");
            std::vector<Interval> out;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                const std::string f = name + ".intervals[" + std::to_string(i) + "]";
                if (!parts[i].is_array() || parts[i].size() != 2)
                    throw ConfigError("config field '" + f + "': expected [lo, hi]");
                out.push_back({bound_from_json(parts[i][0], f), bound_from_json(parts[i][1], f)});
            }
            r.finish();
            return ControlDomain::intervals(std::move(out));
        }
        std::vector<double> pts;
        r.get("points", pts);
        r.finish();
        return ControlDomain::points(std::move(pts));
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("config field", 0) == 0) throw;
        throw ConfigError("config field '" + name + "': " + msg);
    }
}

json domain_to_json(const ControlDomain& d) {
    if (d.kind() == ControlDomain::Kind::RealLine) return "real-line";
    if (d.is_punctured_unit()) return "punctured-unit";
    if (d.kind() == ControlDomain::Kind::Points) {
        json pts = json::array();
        for (const auto& p : d.parts()) pts.push_back(p.lo);
        return {{"points", pts}};
    }
    json parts = json::array();
    for (const auto& p : d.parts()) parts.push_back(json::array({bound_to_json(p.lo), bound_to_json(p.hi)}));
    return {{"intervals", parts}};
}

LQProblem lq_from_json(Reader r) {
    LQProblem p;
    r.get("A1", p.A1);
    r.get("A2", p.A2);
    r.get("B", p.B);
    r.get("C1", p.C1);
    r.get("C2", p.C2);
    r.get("D", p.D);
    r.get("R1", p.R1);
    r.get("R2", p.R2);
    r.get("L", p.L);
    r.get("H", p.H);
    r.get("a", p.a);
    r.get("delta", p.delta);
    r.get("T", p.T);
    if (r.has("domain")) p.domain = domain_from_json(r.raw("domain"), r.field("domain"));
    r.finish();
    return p;
}

json lq_to_json(const LQProblem& p) {
    return {{"A1", p.A1}, {"A2", p.A2}, {"B", p.B},   {"C1", p.C1}, {"C2", p.C2},
            {"D", p.D},   {"R1", p.R1}, {"R2", p.R2}, {"L", p.L},   {"H", p.H},
            {"a", p.a},   {"delta", p.delta}, {"T", p.T}, {"domain", domain_to_json(p.domain)}};
}

ExpressionProblemConfig expression_from_json(Reader r) {
    ExpressionProblemConfig e;
    r.get("drift", e.drift);
    r.get("diffusion", e.diffusion);
    r.get("running_cost", e.running_cost);
    r.get("terminal_cost", e.terminal_cost);
    r.get("T", e.T);
    r.get("delta", e.delta);
    r.get("initial_state", e.initial_state);
    r.get("initial_control", e.initial_control);
    if (r.has("domain")) e.domain = domain_from_json(r.raw("domain"), r.field("domain"));
    r.finish();
    return e;
}

json expression_to_json(const ExpressionProblemConfig& e) {
    return {{"drift", e.drift},
            {"diffusion", e.diffusion},
            {"running_cost", e.running_cost},
            {"terminal_cost", e.terminal_cost},
            {"T", e.T},
            {"delta", e.delta},
            {"initial_state", e.initial_state},
            {"initial_control", e.initial_control},
            {"domain", domain_to_json(e.domain)}};
}

std::string r2_name(R2Placement r) { return r == R2Placement::Truncated ? "truncated" : "as-written"; }

json config_to_json(const ExperimentConfig& c) {
    json problem = {{"name", c.problem.name}};
    if (c.problem.name == "lq") problem["lq"] = lq_to_json(c.problem.lq);
    if (c.problem.name == "expression") problem["expression"] = expression_to_json(c.problem.expression);
    const Tolerances& t = c.tolerances;
    return {
        {"kind", to_string(c.kind)},
        {"problem", problem},
        {"grid", {{"m", c.steps_per_delay}}},
        {"seed", c.seed},
        {"paths", c.paths},
        {"dump_paths", c.dump_paths},
        {"control", {{"kind", c.control.kind}, {"value", c.control.value}}},
        {"spike", {{"tau", c.spike.tau}, {"value", c.spike.value}, {"epsilon", c.spike.epsilon}}},
        {"epsilons", c.epsilons},
        {"second_order", c.second_order},
        {"phi", {{"kind", c.phi.kind}, {"value", c.phi.value}}},
        {"scan",
         {{"cells", c.scan.cells},
          {"values", c.scan.values},
          {"seed", c.scan.seed},
          {"expect_violation", c.scan.expect_violation}}},
        {"picard",
         {{"max_iters", c.picard.max_iters},
          {"damping", c.picard.damping},
          {"adaptive", c.picard.adaptive},
          {"min_damping", c.picard.min_damping},
          {"tolerance", c.picard.tolerance},
          {"r2", r2_name(c.picard.r2)}}},
        {"challengers", c.challengers},
        {"regression", {{"degree", c.regression.degree}, {"ridge", c.regression.ridge}}},
        {"tolerances",
         {{"z", t.z},
          {"C", t.C},
          {"guard", t.guard},
          {"x1_slope", {t.x1_slope_lo, t.x1_slope_hi}},
          {"x2_slope", {t.x2_slope_lo, t.x2_slope_hi}},
          {"lhs_slope", {t.lhs_slope_lo, t.lhs_slope_hi}},
          {"residual_slope_min", t.residual_slope_min},
          {"oracle_rel_error", t.oracle_rel_error},
          {"riccati_rel_error", t.riccati_rel_error},
          {"contraction", t.contraction}}},
        {"out_dir", c.out_dir},
    };
}

void read_range(Reader& r, const char* key, double& lo, double& hi) {
    if (!r.has(key)) return;
    std::vector<double> v;
    r.get(key, v);
    if (v.size() != 2 || !(v[0] <= v[1]))
        throw ConfigError("config field '" + r.field(key) + "': expected [lo, hi] with lo <= hi");
    lo = v[0];
    hi = v[1];
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    Reader r(j, "");
    if (!r.has("kind")) throw ConfigError("config field 'kind': missing");
    std::string kind;
    r.get("kind", kind);
    try {
        c.kind = parse_kind(kind);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config field 'kind': ") + e.what());
    }
    if (r.has("problem")) {
        Reader p = r.child("problem");
        p.get("name", c.problem.name);
        if (p.has("lq")) {
            if (c.problem.name != "lq")
                throw ConfigError("config field 'problem.lq': only allowed with problem.name \"lq\"");
            c.problem.lq = lq_from_json(p.child("lq"));
        }
        if (p.has("expression")) {
            if (c.problem.name != "expression")
                throw ConfigError(
                    "config field 'problem.expression': only allowed with problem.name \"expression\"");
            c.problem.expression = expression_from_json(p.child("expression"));
        }
        p.finish();
    }
    if (r.has("grid")) {
        Reader g = r.child("grid");
        g.get("m", c.steps_per_delay);
        g.finish();
    }
    r.get("seed", c.seed);
    r.get("paths", c.paths);
    r.get("dump_paths", c.dump_paths);
    if (r.has("control")) {
        Reader u = r.child("control");
        u.get("kind", c.control.kind);
        u.get("value", c.control.value);
        u.finish();
    }
    if (r.has("spike")) {
        Reader s = r.child("spike");
        s.get("tau", c.spike.tau);
        s.get("value", c.spike.value);
        s.get("epsilon", c.spike.epsilon);
        s.finish();
    }
    r.get("epsilons", c.epsilons);
    r.get("second_order", c.second_order);
    if (r.has("phi")) {
        Reader f = r.child("phi");
        f.get("kind", c.phi.kind);
        f.get("value", c.phi.value);
        f.finish();
    }
    if (r.has("scan")) {
        Reader s = r.child("scan");
        s.get("cells", c.scan.cells);
        s.get("values", c.scan.values);
        s.get("seed", c.scan.seed);
        s.get("expect_violation", c.scan.expect_violation);
        s.finish();
    }
    if (r.has("picard")) {
        Reader p = r.child("picard");
        p.get("max_iters", c.picard.max_iters);
        p.get("damping", c.picard.damping);
        p.get("adaptive", c.picard.adaptive);
        p.get("min_damping", c.picard.min_damping);
        p.get("tolerance", c.picard.tolerance);
        if (p.has("r2")) {
            std::string r2;
            p.get("r2", r2);
            if (r2 == "truncated")
                c.picard.r2 = R2Placement::Truncated;
            else if (r2 == "as-written")
                c.picard.r2 = R2Placement::AsWritten;
            else
                throw ConfigError("config field 'picard.r2': expected \"truncated\" or \"as-written\"");
        }
        p.finish();
    }
    r.get("challengers", c.challengers);
    if (r.has("regression")) {
        Reader g = r.child("regression");
        g.get("degree", c.regression.degree);
        g.get("ridge", c.regression.ridge);
        g.finish();
    }
    if (r.has("tolerances")) {
        Reader t = r.child("tolerances");
        Tolerances& o = c.tolerances;
        t.get("z", o.z);
        t.get("C", o.C);
        t.get("guard", o.guard);
        read_range(t, "x1_slope", o.x1_slope_lo, o.x1_slope_hi);
        read_range(t, "x2_slope", o.x2_slope_lo, o.x2_slope_hi);
        read_range(t, "lhs_slope", o.lhs_slope_lo, o.lhs_slope_hi);
        t.get("residual_slope_min", o.residual_slope_min);
        t.get("oracle_rel_error", o.oracle_rel_error);
        t.get("riccati_rel_error", o.riccati_rel_error);
        t.get("contraction", o.contraction);
        t.finish();
    }
    r.get("out_dir", c.out_dir);
    r.finish();
    return c;
}

json parse_json_text(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Byte offsets are 1-based and point just past the offending character.
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Problem construction

bool is_lq(const ProblemConfig& p) {
    return p.name == "lq" || p.name == "lq-benchmark" || p.name == "lq-no-delay";
}

LQProblem lq_of(const ProblemConfig& p, ExperimentKind kind) {
    if (p.name == "lq") return p.lq;
    if (p.name == "lq-benchmark") return LQProblem::benchmark();
    if (p.name == "lq-no-delay") return LQProblem::no_delay_reduction();
    throw ConfigError("config field 'problem.name': experiment '" + to_string(kind) +
                      "' needs an LQ problem (lq, lq-benchmark, lq-no-delay), got '" + p.name + "'");
}

ProblemSpec build_problem(const ExperimentConfig& c) {
    const ProblemConfig& p = c.problem;
    if (c.steps_per_delay < 1)
        throw ConfigError("config field 'grid.m': must be at least 1, got " + std::to_string(c.steps_per_delay));
    std::string field = "problem.name";
    try {
        if (p.name == "lq") {
            field = "problem.lq";
            p.lq.validate();
            return lq_problem_spec(p.lq, c.steps_per_delay);
        }
        if (p.name == "expression") {
            field = "problem.expression";
            const ExpressionProblemConfig& e = p.expression;
            ProblemSpec spec;
            spec.coefficients = std::make_shared<ExpressionCoefficients>(
                "expression", e.drift, e.diffusion, e.running_cost, e.terminal_cost);
            spec.domain = e.domain;
            const double x0 = e.initial_state;
            const double u0 = e.initial_control;
            if (!e.domain.contains(u0))
                throw DomainError("initial_control " + std::to_string(u0) + " is outside " + e.domain.describe());
            spec.initial_state = [x0](double) { return x0; };
            spec.initial_control = [u0](double) { return u0; };
            spec.grid = TimeGrid::make(e.T, e.delta, c.steps_per_delay);
            spec.validate();
            return spec;
        }
        return make_named_problem(p.name, c.steps_per_delay);
    } catch (const ConfigError& e) {
        throw ConfigError("config field '" + field + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Output

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

class Csv {
public:
    explicit Csv(std::initializer_list<const char*> header) {
        bool first = true;
        for (const char* h : header) {
            if (!first) text_ += ',';
            text_ += h;
            first = false;
        }
        text_ += '\n';
    }

    Csv& operator<<(double v) { return cell(num(v)); }
    Csv& operator<<(int v) { return cell(std::to_string(v)); }
    Csv& operator<<(std::size_t v) { return cell(std::to_string(v)); }
    Csv& operator<<(const std::string& v) { return cell(v); }
    void end_row() {
        text_ += '\n';
        fresh_ = true;
    }
    const std::string& text() const { return text_; }

private:
    Csv& cell(const std::string& s) {
        if (!fresh_) text_ += ',';
        text_ += s;
        fresh_ = false;
        return *this;
    }

    std::string text_;
    bool fresh_ = true;
};

class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw IOError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    void write(const std::string& name, const std::string& contents) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << contents;
        out.close();
        if (!out) throw IOError("cannot write '" + path.string() + "'");
        files_.push_back(name);
    }

    std::vector<std::string> files() const {
        auto f = files_;
        std::sort(f.begin(), f.end());
        return f;
    }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

json estimate_json(const Estimate& e) {
    return {{"mean", e.mean}, {"stderr", e.std_error}, {"n", e.n}};
}

// ---------------------------------------------------------------------------
// Experiments

struct Context {
    const ExperimentConfig& config;
    ProblemSpec spec;
    NoiseEnsemble noise;
    GapThreshold threshold;
    Output& out;
    std::vector<Check> checks;
    json results = json::object();

    void check(std::string name, bool passed, std::string detail) {
        checks.push_back({std::move(name), passed, std::move(detail)});
    }
};

PicardOptions picard_options(const ExperimentConfig& c) {
    PicardOptions o;
    o.max_iters = c.picard.max_iters;
    o.damping = c.picard.damping;
    o.adaptive = c.picard.adaptive;
    o.min_damping = c.picard.min_damping;
    o.tolerance = c.picard.tolerance;
    o.r2 = c.picard.r2;
    o.adjoint.regression = c.regression;
    o.adjoint.guard = c.tolerances.guard;
    return o;
}

AdjointOptions adjoint_options(const Context& ctx, const PathMatrix& states) {
    if (is_lq(ctx.config.problem))
        return lq_adjoint_options(lq_of(ctx.config.problem, ctx.config.kind), ctx.spec, states,
                                  picard_options(ctx.config));
    AdjointOptions o;
    o.regression = ctx.config.regression;
    o.guard = ctx.config.tolerances.guard;
    return o;
}

std::vector<double> ladder(const Context& ctx) {
    if (!ctx.config.epsilons.empty()) return ctx.config.epsilons;
    return dyadic_ladder(ctx.spec.grid.delay(), 2, 5);
}

SpikeSpec spike_of(const ExperimentConfig& c, double epsilon) { return {c.spike.tau, epsilon, c.spike.value}; }

// Solves the LQ problem and records the Picard outputs.
LQSolution lq_solve_into(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    const LQProblem prob = lq_of(c.problem, c.kind);
    LQSolution sol = solve_lq(prob, ctx.spec, ctx.noise, picard_options(c));
    const TimeGrid& g = ctx.spec.grid;

    Csv trace({"iteration", "w_change", "v_change"});
    for (std::size_t i = 0; i < sol.w_changes.size(); ++i) {
        trace << (i + 1) << sol.w_changes[i] << sol.v_changes[i];
        trace.end_row();
    }
    ctx.out.write("picard.csv", trace.text());

    const std::size_t dump = std::min(c.dump_paths, ctx.noise.n_paths());
    if (dump > 0) {
        Csv traj({"path", "t", "x", "u"});
        Csv adj({"path", "t", "p", "q", "P", "Q"});
        for (std::size_t i = 0; i < dump; ++i) {
            for (int k = 0; k <= g.steps(); ++k) {
                traj << i << g.time(k) << sol.states(i, k) << sol.control.at(i, k);
                traj.end_row();
                adj << i << g.time(k) << sol.first.p(i, k) << sol.first.q(i, k) << sol.second.P(i, k)
                    << sol.second.Q(i, k);
                adj.end_row();
            }
        }
        ctx.out.write("trajectories.csv", traj.text());
        ctx.out.write("adjoints.csv", adj.text());
    }

    // Contraction of the policy changes: geometric mean and worst ratio.
    double log_sum = 0.0, worst = 0.0;
    int ratios = 0;
    for (std::size_t i = 1; i < sol.w_changes.size(); ++i) {
        if (!(sol.w_changes[i - 1] > 0.0) || !(sol.w_changes[i] > 0.0)) continue;
        const double r = sol.w_changes[i] / sol.w_changes[i - 1];
        log_sum += std::log(r);
        worst = std::max(worst, r);
        ++ratios;
    }
    const double geo = ratios > 0 ? std::exp(log_sum / ratios) : std::numeric_limits<double>::quiet_NaN();

    // Smallest node mean of the second adjoint on [0, T].
    Estimate min_P{kInf, 0.0, 0};
    int min_P_node = 0;
    for (int k = 0; k <= g.steps(); ++k) {
        Moments mo;
        for (std::size_t i = 0; i < ctx.noise.n_paths(); ++i) mo.add(sol.second.P(i, k));
        const Estimate e = mo.estimate();
        if (e.mean < min_P.mean) {
            min_P = e;
            min_P_node = k;
        }
    }

    ctx.results["cost"] = estimate_json(sol.cost);
    ctx.results["picard"] = {{"converged", sol.converged},
                             {"iterations", sol.iterations},
                             {"w_changes", sol.w_changes},
                             {"v_changes", sol.v_changes},
                             {"contraction_geometric_mean", geo},
                             {"contraction_max_ratio", worst}};
    ctx.results["outside_control_law"] = sol.outside_law;
    ctx.results["min_mean_P"] = {{"t", g.time(min_P_node)}, {"estimate", estimate_json(min_P)}};

    ctx.check("picard_converged", sol.converged,
              "iterations " + std::to_string(sol.iterations) + ", last change " +
                  short_num(sol.w_changes.empty() ? 0.0 : sol.w_changes.back()) + ", tolerance " +
                  short_num(c.picard.tolerance));
    ctx.check("second_adjoint_nonnegative", !ctx.threshold.violated(min_P),
              "min mean P " + short_num(min_P.mean) + " at t=" + short_num(g.time(min_P_node)) +
                  ", allowance " + short_num(ctx.threshold.allowance(min_P)));
    if (c.problem.name == "lq-benchmark")
        ctx.check("picard_contraction", geo <= c.tolerances.contraction,
                  "geometric-mean change ratio " + short_num(geo) + ", worst " + short_num(worst) +
                      ", limit " + short_num(c.tolerances.contraction));
    if (prob.A2 == 0.0 && prob.R2 == 0.0 && prob.domain.kind() == ControlDomain::Kind::RealLine) {
        const RiccatiSolution ric =
            riccati_reference(prob.A1, prob.B, prob.C1, prob.D, prob.R1, prob.L, prob.H, prob.T);
        const double ref = ric.value(prob.a);
        const double rel = std::abs(sol.cost.mean - ref) / std::abs(ref);
        ctx.results["riccati"] = {{"cost", ref}, {"relative_error", rel}};
        ctx.check("riccati_cross_check", rel < c.tolerances.riccati_rel_error,
                  "cost " + short_num(sol.cost.mean) + " vs Riccati " + short_num(ref) + ", relative error " +
                      short_num(rel));
    }
    return sol;
}

ControlPath base_control(Context& ctx, std::optional<LQSolution>& sol) {
    const ExperimentConfig& c = ctx.config;
    if (c.control.kind == "lq-optimal") {
        sol = lq_solve_into(ctx);
        return sol->control;
    }
    ControlPath u = ControlPath::constant(ctx.spec, c.control.value);
    try {
        u.check_domain(ctx.spec.domain);
    } catch (const DomainError& e) {
        throw DomainError(std::string("config field 'control.value': ") + e.what());
    }
    return u;
}

void write_gaps(Context& ctx, const MPGapReport& report) {
    Csv gaps({"tau", "v", "gap", "stderr"});
    for (const auto& r : report.records) {
        gaps << r.tau << r.v << r.gap.mean << r.gap.std_error;
        gaps.end_row();
    }
    ctx.out.write("gaps.csv", gaps.text());
    const GapRecord& m = report.min();
    ctx.results["scan"] = {{"cells", report.records.size()},
                           {"min_gap", estimate_json(m.gap)},
                           {"min_tau", m.tau},
                           {"min_v", m.v},
                           {"violations", report.violations()},
                           {"threshold", {{"z", report.threshold.z}, {"C", report.threshold.C}, {"dt", report.threshold.dt}}}};
}

void scan_check(Context& ctx, const MPGapReport& report) {
    const GapRecord& m = report.min();
    const std::string detail = "min gap " + short_num(m.gap.mean) + " (stderr " + short_num(m.gap.std_error) +
                               ") at tau=" + short_num(m.tau) + ", v=" + short_num(m.v) + "; allowance " +
                               short_num(report.threshold.allowance(m.gap)) + "; violations " +
                               std::to_string(report.violations());
    if (ctx.config.scan.expect_violation)
        ctx.check("detects_violation", report.violations() > 0, detail);
    else
        ctx.check("no_violation", report.passed(), detail);
}

void run_simulate(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::optional<LQSolution> sol;
    const ControlPath u = base_control(ctx, sol);
    const PathMatrix x = sol ? sol->states : simulate_state(ctx.spec, u, ctx.noise);
    const TimeGrid& g = ctx.spec.grid;
    const std::size_t n = ctx.noise.n_paths();
    PathMatrix x1(n, g.first_node(), g.steps()), x2(n, g.first_node(), g.steps());
    if (c.spike.epsilon > 0.0) {
        const SpikeSpec spike = spike_of(c, c.spike.epsilon);
        x1 = simulate_first_variation(ctx.spec, u, spike, ctx.noise, x);
        if (c.second_order) x2 = simulate_second_variation(ctx.spec, u, spike, ctx.noise, x, x1);
        ctx.results["vi_lhs"] = estimate_json(variational_inequality_lhs(ctx.spec, u, spike, ctx.noise, x, x1, x2));
    }
    ctx.results["cost"] = estimate_json(evaluate_cost(ctx.spec, u, ctx.noise));
    Moments terminal;
    for (std::size_t i = 0; i < n; ++i) terminal.add(x(i, g.steps()));
    ctx.results["terminal_state"] = estimate_json(terminal.estimate());

    const std::size_t dump = std::min(c.dump_paths, n);
    if (dump > 0) {
        Csv paths({"path", "t", "x", "x1", "x2", "u"});
        for (std::size_t i = 0; i < dump; ++i) {
            for (int k = 0; k <= g.steps(); ++k) {
                paths << i << g.time(k) << x(i, k) << x1(i, k) << x2(i, k) << u.at(i, k);
                paths.end_row();
            }
        }
        ctx.out.write("paths.csv", paths.text());
    }
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return v.size() >= 2;
}

void run_converge(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::optional<LQSolution> sol;
    const ControlPath u = base_control(ctx, sol);
    LadderOptions opt;
    opt.tau = c.spike.tau;
    opt.value = c.spike.value;
    opt.epsilons = ladder(ctx);
    opt.second_order = c.second_order;
    opt.cross_term = false;
    opt.guard = c.tolerances.guard;
    const std::vector<LadderRung> rungs = spike_ladder_study(ctx.spec, u, ctx.noise, opt);

    struct Metric {
        std::string name;
        std::vector<double> value, std_error;
        double slope = 0.0;
    };
    std::vector<Metric> metrics;
    auto add = [&](std::string name, auto get) {
        Metric m{std::move(name), {}, {}, 0.0};
        for (const auto& r : rungs) {
            const auto [v, se] = get(r);
            m.value.push_back(v);
            m.std_error.push_back(se);
        }
        std::vector<double> mag(m.value.size());
        std::transform(m.value.begin(), m.value.end(), mag.begin(), [](double v) { return std::abs(v); });
        m.slope = loglog_slope(opt.epsilons, mag);
        metrics.push_back(std::move(m));
    };
    add("x1_sq", [](const LadderRung& r) { return std::pair{r.x1_sq.value, r.x1_sq.std_error}; });
    if (c.second_order) {
        add("x2_sq", [](const LadderRung& r) { return std::pair{r.x2_sq.value, r.x2_sq.std_error}; });
        add("residual_sq", [](const LadderRung& r) { return std::pair{r.residual_sq.value, r.residual_sq.std_error}; });
        add("residual_sq_over_eps2", [](const LadderRung& r) {
            const double e2 = r.epsilon * r.epsilon;
            return std::pair{r.residual_sq.value / e2, r.residual_sq.std_error / e2};
        });
        add("vi_lhs", [](const LadderRung& r) { return std::pair{r.vi_lhs.mean, r.vi_lhs.std_error}; });
    }

    Csv table({"epsilon", "metric", "value", "stderr", "slope"});
    json jm = json::object();
    for (const auto& m : metrics) {
        for (std::size_t j = 0; j < rungs.size(); ++j) {
            table << rungs[j].epsilon << m.name << m.value[j] << m.std_error[j] << m.slope;
            table.end_row();
        }
        jm[m.name] = {{"values", m.value}, {"stderr", m.std_error}, {"slope", m.slope}};
    }
    ctx.out.write("slopes.csv", table.text());
    ctx.results["epsilons"] = opt.epsilons;
    ctx.results["metrics"] = jm;

    const Tolerances& t = c.tolerances;
    auto in = [](double s, double lo, double hi) { return s >= lo && s <= hi; };
    ctx.check("x1_slope", in(metrics[0].slope, t.x1_slope_lo, t.x1_slope_hi),
              "slope " + short_num(metrics[0].slope) + ", range [" + short_num(t.x1_slope_lo) + ", " +
                  short_num(t.x1_slope_hi) + "]");
    if (c.second_order) {
        ctx.check("x2_slope", in(metrics[1].slope, t.x2_slope_lo, t.x2_slope_hi),
                  "slope " + short_num(metrics[1].slope) + ", range [" + short_num(t.x2_slope_lo) + ", " +
                      short_num(t.x2_slope_hi) + "]");
        std::string seq;
        for (double v : metrics[3].value) seq += (seq.empty() ? "" : " ") + short_num(v);
        ctx.check("residual_over_eps2_decreasing", strictly_decreasing(metrics[3].value), "values " + seq);
    }
}

void run_crossterm(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::optional<LQSolution> sol;
    const ControlPath u = base_control(ctx, sol);
    const std::vector<double> eps = ladder(ctx);
    const TimeGrid& g = ctx.spec.grid;
    PathMatrix phi;
    if (c.phi.kind == "constant") {
        phi = phi_constant(g, ctx.noise.n_paths(), c.phi.value);
    } else {
        const PathMatrix x = sol ? sol->states : simulate_state(ctx.spec, u, ctx.noise);
        const AdjointOptions adj = adjoint_options(ctx, x);
        const FirstAdjoint first = sol ? sol->first : solve_first_adjoint(ctx.spec, u, x, ctx.noise, adj);
        phi = phi_hessian_ratio(ctx.spec, u, x, first, c.tolerances.guard);
    }
    const std::vector<CrossTermRow> rows =
        cross_term_check(ctx.spec, u, c.spike.tau, c.spike.value, eps, ctx.noise, phi, c.tolerances.guard);

    Csv table({"epsilon", "lhs", "rhs", "residual", "stderr"});
    std::vector<double> lhs, res;
    for (const auto& r : rows) {
        table << r.epsilon << r.lhs.mean << r.rhs.mean << r.residual.mean << r.residual.std_error;
        table.end_row();
        lhs.push_back(std::abs(r.lhs.mean));
        res.push_back(std::abs(r.residual.mean));
    }
    ctx.out.write("crossterm.csv", table.text());
    const double lhs_slope = loglog_slope(eps, lhs);
    const double res_slope = loglog_slope(eps, res);
    ctx.results["epsilons"] = eps;
    ctx.results["lhs_slope"] = lhs_slope;
    ctx.results["residual_slope"] = res_slope;
    json rj = json::array();
    for (const auto& r : rows)
        rj.push_back({{"epsilon", r.epsilon},
                      {"lhs", estimate_json(r.lhs)},
                      {"rhs", estimate_json(r.rhs)},
                      {"residual", estimate_json(r.residual)}});
    ctx.results["rows"] = rj;

    const Tolerances& t = c.tolerances;
    ctx.check("residual_slope", res_slope > t.residual_slope_min,
              "slope " + short_num(res_slope) + ", must exceed " + short_num(t.residual_slope_min));
    ctx.check("lhs_slope", lhs_slope >= t.lhs_slope_lo && lhs_slope <= t.lhs_slope_hi,
              "slope " + short_num(lhs_slope) + ", range [" + short_num(t.lhs_slope_lo) + ", " +
                  short_num(t.lhs_slope_hi) + "]");
}

void run_mp_scan(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::optional<LQSolution> sol;
    const ControlPath u = base_control(ctx, sol);
    const auto cells = random_cells(ctx.spec.grid, c.scan.cells, c.scan.values, c.scan.seed);
    for (const auto& [tau, v] : cells)
        if (!ctx.spec.domain.contains(v))
            throw DomainError("config field 'scan.values': " + short_num(v) + " is outside " +
                              ctx.spec.domain.describe());
    MPGapReport report;
    if (sol) {
        report = mp_scan_cells(ctx.spec, u, sol->states, sol->first, &sol->second, cells, ctx.threshold);
    } else {
        const PathMatrix x = simulate_state(ctx.spec, u, ctx.noise);
        const AdjointOptions adj = adjoint_options(ctx, x);
        const FirstAdjoint first = solve_first_adjoint(ctx.spec, u, x, ctx.noise, adj);
        const SecondAdjoint second = solve_second_adjoint(ctx.spec, u, x, first, ctx.noise, adj);
        report = mp_scan_cells(ctx.spec, u, x, first, &second, cells, ctx.threshold);
    }
    write_gaps(ctx, report);
    scan_check(ctx, report);
}

void run_lq_verify(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    const LQSolution sol = lq_solve_into(ctx);
    const LQProblem prob = lq_of(c.problem, c.kind);
    const OptimalityReport rep =
        verify_optimality(prob, ctx.spec, sol, ctx.noise, c.challengers, c.scan.seed + 1, ctx.threshold);
    Csv table({"index", "name", "difference", "stderr", "passed"});
    json cj = json::array();
    const ChallengerResult* worst = nullptr;
    for (std::size_t i = 0; i < rep.challengers.size(); ++i) {
        const auto& ch = rep.challengers[i];
        table << i << ch.name << ch.difference.mean << ch.difference.std_error << (ch.passed ? 1 : 0);
        table.end_row();
        cj.push_back({{"name", ch.name}, {"difference", estimate_json(ch.difference)}, {"passed", ch.passed}});
        if (!worst || ch.difference.mean < worst->difference.mean) worst = &ch;
    }
    ctx.out.write("challengers.csv", table.text());
    ctx.results["challengers"] = cj;
    std::size_t failed = 0;
    for (const auto& ch : rep.challengers) failed += ch.passed ? 0 : 1;
    ctx.check("challengers", rep.passed(),
              std::to_string(rep.challengers.size() - failed) + "/" + std::to_string(rep.challengers.size()) +
                  " pass; smallest J(v)-J(v*) " + short_num(worst->difference.mean) + " (" + worst->name +
                  ", stderr " + short_num(worst->difference.std_error) + ")");

    const auto cells = random_cells(ctx.spec.grid, c.scan.cells, c.scan.values, c.scan.seed);
    const MPGapReport report =
        mp_scan_cells(ctx.spec, sol.control, sol.states, sol.first, &sol.second, cells, ctx.threshold);
    write_gaps(ctx, report);
    scan_check(ctx, report);
}

void run_adjoint_oracle(Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    const bool first_kind = c.problem.name == "first-adjoint-oracle";
    if (!first_kind && c.problem.name != "second-adjoint-oracle")
        throw ConfigError("config field 'problem.name': adjoint-oracle needs first-adjoint-oracle or "
                          "second-adjoint-oracle, got '" + c.problem.name + "'");
    const TimeGrid& g = ctx.spec.grid;
    const std::size_t n = ctx.noise.n_paths();
    const ControlPath u = ControlPath::constant(ctx.spec, 0.0);
    const PathMatrix x = simulate_state(ctx.spec, u, ctx.noise);
    const AdjointOptions adj = adjoint_options(ctx, x);
    const FirstAdjoint first = solve_first_adjoint(ctx.spec, u, x, ctx.noise, adj);
    SecondAdjoint second;
    if (!first_kind) second = solve_second_adjoint(ctx.spec, u, x, first, ctx.noise, adj);
    const FirstAdjointOracle fo;
    const SecondAdjointOracle so;

    Csv table({"t", "estimate", "stderr", "exact"});
    double err = 0.0, norm = 0.0;
    for (int k = 0; k <= g.steps(); ++k) {
        const double exact = first_kind ? fo.exact_p(g.time(k)) : so.exact_P(g.time(k));
        Moments mo;
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = first_kind ? first.p(i, k) : second.P(i, k);
            mo.add(v);
            sq += (v - exact) * (v - exact);
        }
        const Estimate e = mo.estimate();
        table << g.time(k) << e.mean << e.std_error << exact;
        table.end_row();
        err += sq / static_cast<double>(n);
        norm += exact * exact;
    }
    ctx.out.write("oracle.csv", table.text());
    const std::size_t dump = std::min(c.dump_paths, n);
    if (dump > 0) {
        Csv ad({"path", "t", "p", "q", "P", "Q"});
        for (std::size_t i = 0; i < dump; ++i) {
            for (int k = 0; k <= g.steps(); ++k) {
                ad << i << g.time(k) << first.p(i, k) << first.q(i, k) << (first_kind ? 0.0 : second.P(i, k))
                   << (first_kind ? 0.0 : second.Q(i, k));
                ad.end_row();
            }
        }
        ctx.out.write("adjoints.csv", ad.text());
    }
    const double rel = std::sqrt(err / norm);
    ctx.results["adjoint"] = first_kind ? "p" : "P";
    ctx.results["relative_l2_error"] = rel;
    ctx.check("oracle_l2_error", rel < c.tolerances.oracle_rel_error,
              std::string(first_kind ? "p" : "P") + " relative L2 error " + short_num(rel) + ", limit " +
                  short_num(c.tolerances.oracle_rel_error));
}

std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::string to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kKinds)
        if (k == kind) return name;
    return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
    for (const auto& [k, n] : kKinds)
        if (name == n) return k;
    std::string known;
    for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown experiment '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<std::string> experiment_names() {
    std::vector<std::string> out;
    for (const auto& [k, n] : kKinds) out.emplace_back(n);
    return out;
}

void ExperimentConfig::validate() const {
    const ProblemSpec spec = build_problem(*this);
    auto require = [](bool ok, const char* field, const std::string& what) {
        if (!ok) throw ConfigError(std::string("config field '") + field + "': " + what);
    };
    require(paths >= 2, "paths", "must be at least 2");
    require(dump_paths <= paths, "dump_paths", "must not exceed paths");
    require(control.kind == "constant" || control.kind == "lq-optimal", "control.kind",
            "expected \"constant\" or \"lq-optimal\"");
    if (control.kind == "lq-optimal") lq_of(problem, kind);
    require(phi.kind == "constant" || phi.kind == "hessian-ratio", "phi.kind",
            "expected \"constant\" or \"hessian-ratio\"");
    require(scan.cells >= 1, "scan.cells", "must be at least 1");
    require(!scan.values.empty(), "scan.values", "must not be empty");
    require(challengers >= 1, "challengers", "must be at least 1");
    require(picard.max_iters >= 1, "picard.max_iters", "must be at least 1");
    require(picard.damping > 0.0 && picard.damping <= 1.0, "picard.damping", "must lie in (0, 1]");
    require(picard.min_damping > 0.0 && picard.min_damping <= picard.damping, "picard.min_damping",
            "must lie in (0, damping]");
    require(picard.tolerance > 0.0, "picard.tolerance", "must be positive");
    require(regression.degree >= 0 && regression.degree <= 9, "regression.degree", "must lie in [0, 9]");
    require(regression.ridge >= 0.0, "regression.ridge", "must be non-negative");
    require(tolerances.z >= 0.0, "tolerances.z", "must be non-negative");
    require(tolerances.C >= 0.0, "tolerances.C", "must be non-negative");
    require(tolerances.guard > 0.0, "tolerances.guard", "must be positive");
    const bool laddered = kind == ExperimentKind::Converge || kind == ExperimentKind::Crossterm;
    const std::vector<double> eps = !laddered ? epsilons : epsilons.empty() ? dyadic_ladder(spec.grid.delay(), 2, 5) : epsilons;
    for (std::size_t i = 0; i < eps.size(); ++i)
        require(eps[i] > 0.0 && spec.grid.is_node(eps[i]), "epsilons",
                (epsilons.empty() ? "default ladder delta/4 .. delta/32 entry " : "entry ") + std::to_string(i) +
                    " (" + short_num(eps[i]) + ") must be a positive multiple of dt=" + short_num(spec.grid.dt()));
    const bool spiked = kind == ExperimentKind::Converge || kind == ExperimentKind::Crossterm ||
                        (kind == ExperimentKind::Simulate && spike.epsilon > 0.0);
    if (spiked) {
        require(spec.grid.is_node(spike.tau) && spike.tau >= 0.0 && spike.tau < spec.grid.horizon(), "spike.tau",
                "must be a grid node in [0, T), got " + short_num(spike.tau));
        require(spec.domain.contains(spike.value), "spike.value",
                short_num(spike.value) + " is outside " + spec.domain.describe());
    }
    if (kind == ExperimentKind::Simulate && spike.epsilon > 0.0)
        require(spec.grid.is_node(spike.epsilon), "spike.epsilon", "must be a multiple of dt");
    if (kind == ExperimentKind::LQSolve || kind == ExperimentKind::LQVerify) lq_of(problem, kind);
    if (kind == ExperimentKind::AdjointOracle)
        require(problem.name == "first-adjoint-oracle" || problem.name == "second-adjoint-oracle", "problem.name",
                "adjoint-oracle needs first-adjoint-oracle or second-adjoint-oracle");
}

ExperimentConfig parse_config(std::string_view json_text) {
    return config_from_json(parse_json_text(json_text));
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) { return config_to_json(config).dump(2) + "\n"; }

std::string apply_override(std::string_view json_text, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError("override '" + std::string(assignment) + "' is not KEY=VALUE");
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json doc = parse_json_text(json_text);
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
        if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
    return doc.dump(2);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.out_dir.clear();
    return fnv1a64(serialize_config(c));
}

bool RunResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

fs::path resolve_out_dir(const std::string& cli_out, const ExperimentConfig& config) {
    if (!cli_out.empty()) return cli_out;
    if (!config.out_dir.empty()) return config.out_dir;
    if (const char* env = std::getenv("SDMP_OUT_DIR"); env && *env) return env;
    return "sdmp-out";
}

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
    config.validate();
    Output out(out_dir);
    ProblemSpec spec = build_problem(config);
    NoiseEnsemble noise(spec.grid, config.seed, config.paths);
    const GapThreshold threshold{config.tolerances.z, config.tolerances.C, spec.grid.dt()};
    Context ctx{config, std::move(spec), std::move(noise), threshold, out, {}, json::object()};

    switch (config.kind) {
        case ExperimentKind::Simulate: run_simulate(ctx); break;
        case ExperimentKind::Converge: run_converge(ctx); break;
        case ExperimentKind::Crossterm: run_crossterm(ctx); break;
        case ExperimentKind::MPScan: run_mp_scan(ctx); break;
        case ExperimentKind::LQSolve: lq_solve_into(ctx); break;
        case ExperimentKind::LQVerify: run_lq_verify(ctx); break;
        case ExperimentKind::AdjointOracle: run_adjoint_oracle(ctx); break;
    }

    RunResult result;
    result.checks = ctx.checks;
    json checks = json::array();
    for (const auto& c : ctx.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    const json summary = {{"kind", to_string(config.kind)},
                          {"problem", config.problem.name},
                          {"grid", {{"T", ctx.spec.grid.horizon()}, {"delta", ctx.spec.grid.delay()},
                                    {"m", ctx.spec.grid.steps_per_delay()}, {"dt", ctx.spec.grid.dt()}}},
                          {"paths", config.paths},
                          {"seed", config.seed},
                          {"passed", result.passed()},
                          {"checks", checks},
                          {"results", ctx.results}};
    result.summary = summary.dump(2) + "\n";
    out.write("summary.json", result.summary);

    ExperimentConfig recorded = config;
    recorded.out_dir.clear();
    const json manifest = {{"version", kVersion},
                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"kind", to_string(config.kind)},
                           {"seed", config.seed},
                           {"config_hash", hex64(config_hash(config))},
                           {"config", config_to_json(recorded)},
                           {"files", out.files()}};
    out.write("manifest.json", manifest.dump(2) + "\n");
    result.files = out.files();
    return result;
}

}  // namespace sdmp
