#include "gg/cli.hpp"

#include "gg/critical.hpp"
#include "gg/evolution.hpp"
#include "gg/hum.hpp"
#include "gg/model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace gg::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

const std::vector<std::string> kScenarios = {"simulate",      "adjoint",        "hum",      "nonlinear-control",
                                             "critical-list", "critical-check", "obs-scan", "gramian-scan"};

[[noreturn]] void config_error(const std::string& msg) { throw Error("ConfigError", msg); }

std::string section_key(const std::string& scenario)
{
    std::string s = scenario;
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

// Reads one JSON object, filling defaults into an echo object and rejecting
// unknown keys.
class Section {
public:
    Section(const json* src, json* echo, std::string path) : src_(src), echo_(echo), path_(std::move(path))
    {
        if (src_ && !src_->is_object()) config_error(path_ + " must be an object");
        if (!echo_->is_object()) *echo_ = json::object();
    }

    double num(const std::string& key, double def)
    {
        const json* v = get(key);
        double x = def;
        if (v) {
            if (!v->is_number()) config_error(where(key) + " must be a number");
            x = v->get<double>();
        }
        if (!std::isfinite(x)) config_error(where(key) + " must be finite");
        (*echo_)[key] = x;
        return x;
    }

    std::optional<double> opt_num(const std::string& key)
    {
        const json* v = get(key);
        if (!v || v->is_null()) {
            (*echo_)[key] = nullptr;
            return std::nullopt;
        }
        if (!v->is_number()) config_error(where(key) + " must be a number or null");
        (*echo_)[key] = v->get<double>();
        return v->get<double>();
    }

    long long integer(const std::string& key, long long def, long long min)
    {
        const json* v = get(key);
        long long x = def;
        if (v) {
            if (!v->is_number_integer()) config_error(where(key) + " must be an integer");
            x = v->get<long long>();
        }
        if (x < min) config_error(where(key) + " must be >= " + std::to_string(min));
        (*echo_)[key] = x;
        return x;
    }

    bool flag(const std::string& key, bool def)
    {
        const json* v = get(key);
        bool x = def;
        if (v) {
            if (!v->is_boolean()) config_error(where(key) + " must be a boolean");
            x = v->get<bool>();
        }
        (*echo_)[key] = x;
        return x;
    }

    std::string str(const std::string& key, const std::string& def, const std::vector<std::string>& allowed)
    {
        const json* v = get(key);
        std::string x = def;
        if (v) {
            if (!v->is_string()) config_error(where(key) + " must be a string");
            x = v->get<std::string>();
        }
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            config_error(where(key) + " must be one of " + list + ", got '" + x + "'");
        }
        (*echo_)[key] = x;
        return x;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def)
    {
        const json* v = get(key);
        std::vector<double> x = def;
        if (v) {
            if (!v->is_array()) config_error(where(key) + " must be an array of numbers");
            x.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) config_error(where(key) + " must be an array of numbers");
                x.push_back(e.get<double>());
            }
        }
        (*echo_)[key] = x;
        return x;
    }

    const json* raw(const std::string& key)
    {
        used_.insert(key);
        return src_ && src_->contains(key) ? &(*src_)[key] : nullptr;
    }

    Section sub(const std::string& key)
    {
        const json* v = get(key);
        return Section(v, &(*echo_)[key], where(key));
    }

    void finish() const
    {
        if (!src_) return;
        for (const auto& [k, v] : src_->items())
            if (!used_.count(k)) config_error("unknown key " + where(k));
    }

    const std::string& path() const { return path_; }

private:
    const json* get(const std::string& key)
    {
        used_.insert(key);
        return src_ && src_->contains(key) ? &(*src_)[key] : nullptr;
    }
    std::string where(const std::string& key) const { return path_ + "." + key; }

    const json* src_;
    json* echo_;
    std::string path_;
    std::set<std::string> used_;
};

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : os_(path)
    {
        if (!os_) throw Error("IoError", "cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }
    void row(const std::vector<double>& v)
    {
        for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? "," : "") << fmt(v[i]);
        os_ << '\n';
    }
    void row(const std::vector<std::string>& v)
    {
        for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? "," : "") << v[i];
        os_ << '\n';
    }

private:
    std::ofstream os_;
};

struct Context {
    SystemParams sp;
    Grid grid;
    ControlConfig cfg;
    LawOptions law;
    std::uint64_t seed = 0;
    bool plots = true;
    bool force = false;
    fs::path out;
    json echo;
    json results = json::object();
    std::vector<PlotSpec> plot_specs;
    std::vector<std::string> warnings;
};

StatePair state_from(Section s, const ValidatedParams& p, const Grid& g, std::uint64_t seed)
{
    const std::string kind = s.str("kind", "zero", {"zero", "profile", "random", "values"});
    StatePair st = StatePair::zeros(g);
    if (kind == "profile") {
        const double eps = s.num("amplitude", 1e-2);
        for (int j = 0; j < g.nodes(); ++j) {
            const double x = g.x(j);
            st.u[j] = eps * std::sin(M_PI * x / g.L);
            st.v[j] = eps * x * (g.L - x) / (g.L * g.L);
        }
    } else if (kind == "random") {
        const auto sd = static_cast<std::uint64_t>(s.integer("seed", static_cast<long long>(seed), 0));
        const double norm = s.num("norm", 1.0);
        const int modes = static_cast<int>(s.integer("modes", 8, 1));
        st = random_smooth_state(p, g, sd, modes);
        st *= norm;
    } else if (kind == "values") {
        const auto u = s.numbers("u", {});
        const auto v = s.numbers("v", {});
        if (u.size() != static_cast<std::size_t>(g.nodes()) || v.size() != static_cast<std::size_t>(g.nodes()))
            config_error(s.path() + " needs u and v with nx+1 = " + std::to_string(g.nodes()) + " values");
        st.u = u;
        st.v = v;
    }
    s.finish();
    return st;
}

BoundaryData boundary_from(Section s, const Grid& g, std::uint64_t seed)
{
    const std::string kind = s.str("kind", "zero", {"zero", "random", "values"});
    BoundaryData bd = BoundaryData::zeros(g);
    if (kind == "random") {
        const auto sd = static_cast<std::uint64_t>(s.integer("seed", static_cast<long long>(seed), 0));
        const double amp = s.num("amplitude", 1e-2);
        const int modes = static_cast<int>(s.integer("modes", 6, 1));
        bd = random_smooth_boundary(g, sd, amp, modes);
    } else if (kind == "values") {
        for (int k = 0; k < kChannels; ++k) {
            const auto vals = s.numbers(channel_name(k), std::vector<double>(g.nt + 1, 0.0));
            if (vals.size() != static_cast<std::size_t>(g.nt + 1))
                config_error(s.path() + "." + channel_name(k) + " needs nt+1 = " + std::to_string(g.nt + 1) +
                             " values");
            bd[k] = vals;
        }
    }
    s.finish();
    return bd;
}

std::vector<int> snapshot_levels(int nt, int count)
{
    std::vector<int> lv;
    if (count < 2) count = 2;
    for (int i = 0; i < count; ++i) {
        const int n = static_cast<int>(std::llround(static_cast<double>(i) * nt / (count - 1)));
        if (lv.empty() || lv.back() != n) lv.push_back(n);
    }
    return lv;
}

void write_trajectory(const fs::path& path, const Trajectory& tr, const Grid& g, const std::vector<int>& levels,
                      const char* a, const char* b)
{
    CsvWriter w(path, {"t", "x", a, b});
    for (int n : levels)
        for (int j = 0; j < g.nodes(); ++j)
            w.row(std::vector<double>{tr.times[n], g.x(j), tr.states[n].u[j], tr.states[n].v[j]});
}

void write_controls(const fs::path& path, const BoundaryData& bd, const Grid& g)
{
    std::vector<std::string> header{"t"};
    for (int k = 0; k < kChannels; ++k) header.push_back(channel_name(k));
    CsvWriter w(path, header);
    for (int n = 0; n <= g.nt; ++n) {
        std::vector<double> row{g.t(n)};
        for (int k = 0; k < kChannels; ++k) row.push_back(bd[k][n]);
        w.row(row);
    }
}

void write_final(const fs::path& path, const StatePair& y, const StatePair& target, const Grid& g)
{
    CsvWriter w(path, {"x", "u_T", "v_T", "u_target", "v_target"});
    for (int j = 0; j < g.nodes(); ++j) w.row(std::vector<double>{g.x(j), y.u[j], y.v[j], target.u[j], target.v[j]});
}

void add_plot(Context& ctx, const std::string& csv, const std::string& x, std::vector<std::string> ys,
              const std::string& title)
{
    if (!ctx.plots) return;
    const std::string stem = fs::path(csv).stem().string();
    ctx.plot_specs.push_back({(ctx.out / csv).string(), x, std::move(ys), (ctx.out / (stem + ".svg")).string(), title});
}

json history(const std::vector<double>& v) { return json(v); }

// ---- scenarios -------------------------------------------------------------

int run_simulate(Context& ctx, Section sec)
{
    const auto p = validate_params(ctx.sp);
    const Grid& g = ctx.grid;
    const StatePair init = state_from(sec.sub("init"), p, g, ctx.seed);
    const BoundaryData bd = boundary_from(sec.sub("boundary"), g, ctx.seed + 1);
    const bool nonlinear = sec.flag("nonlinear", false);
    NonlinearOptions nl;
    nl.self_terms = sec.flag("self_terms", true);
    const int snaps = static_cast<int>(sec.integer("snapshots", 11, 2));
    sec.finish();

    const Trajectory tr = nonlinear ? solve_nonlinear_forward(p, g, init, bd, nl) : solve_linear_forward(p, g, init, bd);
    write_trajectory(ctx.out / "trajectory.csv", tr, g, snapshot_levels(g.nt, snaps), "u", "v");
    write_final(ctx.out / "final.csv", tr.final_state(), init, g);
    CsvWriter ew(ctx.out / "energy.csv", {"t", "x_norm"});
    double max_increase = 0.0, prev = 0.0;
    for (int n = 0; n <= g.nt; ++n) {
        const double e = x_norm(tr.states[n], p, g);
        if (n > 0) max_increase = std::max(max_increase, e - prev);
        prev = e;
        ew.row(std::vector<double>{tr.times[n], e});
    }
    ctx.results["initial_x_norm"] = x_norm(init, p, g);
    ctx.results["final_x_norm"] = x_norm(tr.final_state(), p, g);
    ctx.results["max_step_increase"] = max_increase;
    add_plot(ctx, "final.csv", "x", {"u_T", "v_T"}, "state at t = T");
    add_plot(ctx, "energy.csv", "t", {"x_norm"}, "X-norm");
    return kOk;
}

int run_adjoint(Context& ctx, Section sec)
{
    const auto p = validate_params(ctx.sp);
    const Grid& g = ctx.grid;
    const StatePair fin = state_from(sec.sub("final"), p, g, ctx.seed);
    const int snaps = static_cast<int>(sec.integer("snapshots", 11, 2));
    sec.finish();

    const AdjointSolution sol = solve_adjoint_backward(p, g, fin);
    write_trajectory(ctx.out / "adjoint.csv", sol.trajectory, g, snapshot_levels(g.nt, snaps), "phi", "psi");
    CsvWriter w(ctx.out / "traces.csv", {"t", "phi0", "psi0", "phiL", "psiL", "dphiL", "dpsiL"});
    const auto& t = sol.traces;
    for (int n = 0; n <= g.nt; ++n)
        w.row(std::vector<double>{g.t(n), t.phi0[n], t.psi0[n], t.phiL[n], t.psiL[n], t.dphiL[n], t.dpsiL[n]});
    const auto terms = adjoint_energy_terms(p, g, sol);
    ctx.results["energy_lhs"] = terms.lhs;
    ctx.results["energy_rhs"] = terms.rhs;
    ctx.results["initial_x_norm"] = x_norm(sol.trajectory.states.front(), p, g);
    ctx.results["final_x_norm"] = x_norm(fin, p, g);
    add_plot(ctx, "traces.csv", "t", {"phi0", "psi0", "phiL", "psiL"}, "adjoint boundary traces");
    return kOk;
}

// Critical-length and certificate gates shared by hum and nonlinear-control.
int gate(Context& ctx, Section& sec, const ValidatedParams& p, std::ostream& err)
{
    const double crit_tol = sec.num("critical_tol", 1e-3);
    Section cs = sec.sub("certificate");
    const auto C_T = cs.opt_num("C_T");
    const auto beta = cs.opt_num("beta");
    const int samples = static_cast<int>(cs.integer("samples", 20, 1));
    cs.finish();
    const ConfigId id = ctx.cfg.id;
    if (id == ConfigId::C1 || id == ConfigId::C2) {
        if (!(crit_tol >= 0.0 && crit_tol < 1.0)) config_error(sec.path() + ".critical_tol must lie in [0,1)");
        if (auto gen = is_critical(p, ctx.grid.L, crit_tol)) {
            const std::string msg = "L = " + fmt(ctx.grid.L) + " is within relative " + fmt(crit_tol) +
                                    " of the critical length generated by " + to_string(*gen);
            ctx.results["critical_generator"] = to_string(*gen);
            if (!ctx.force) {
                err << "error: " << msg << " (use --force to proceed)\n";
                return kPreconditionFailure;
            }
            ctx.warnings.push_back(msg);
        }
    }
    if (id == ConfigId::C5 || id == ConfigId::C6) {
        const OneControlCert cert = one_control_certificate(p, ctx.grid, C_T, samples, beta, ctx.seed);
        json jc;
        jc["C_T"] = cert.C_T;
        jc["beta"] = cert.beta;
        jc["condition_value"] = cert.condition_value;
        jc["K"] = cert.K ? json(*cert.K) : json(nullptr);
        jc["passes"] = cert.passes();
        ctx.results["certificate"] = jc;
        if (!cert.passes()) {
            const std::string msg = "one-control certificate fails: condition value " + fmt(cert.condition_value) + " >= 1";
            if (!ctx.force) {
                err << "error: " << msg << " (use --force to proceed)\n";
                return kPreconditionFailure;
            }
            ctx.warnings.push_back(msg);
        }
    }
    return kOk;
}

void report_solution(Context& ctx, const HumSolution& sol, const StatePair& target)
{
    const Grid& g = ctx.grid;
    write_controls(ctx.out / "controls.csv", sol.controls, g);
    write_final(ctx.out / "final.csv", sol.trajectory.final_state(), target, g);
    CsvWriter cw(ctx.out / "cg.csv", {"iteration", "relative_residual"});
    for (std::size_t i = 0; i < sol.residual_history.size(); ++i)
        cw.row(std::vector<double>{static_cast<double>(i + 1), sol.residual_history[i]});
    ctx.results["cg_iterations"] = sol.cg_iterations;
    ctx.results["cg_converged"] = sol.converged;
    ctx.results["final_error"] = sol.final_error;
    ctx.results["gramian_min_eig_estimate"] = sol.gramian_min_eig_estimate;
    ctx.results["cg_history"] = history(sol.residual_history);
    for (const auto& w : sol.warnings) ctx.warnings.push_back(w);
    std::vector<std::string> ys;
    for (int k = 0; k < kChannels; ++k)
        if (ctx.cfg.active[k]) ys.push_back(channel_name(k));
    add_plot(ctx, "controls.csv", "t", ys, "controls (" + ctx.cfg.name() + ")");
    add_plot(ctx, "final.csv", "x", {"u_T", "v_T", "u_target", "v_target"}, "final state and target");
}

int run_hum(Context& ctx, Section sec, std::ostream& err)
{
    const auto p = validate_params(ctx.sp);
    const Grid& g = ctx.grid;
    const StatePair init = state_from(sec.sub("init"), p, g, ctx.seed);
    const StatePair target = state_from(sec.sub("target"), p, g, ctx.seed + 1);
    const double tol = sec.num("tol", 1e-8);
    const int maxit = static_cast<int>(sec.integer("maxit", 200, 1));
    HumOptions opt;
    opt.degree = static_cast<int>(sec.integer("degree", 16, 1));
    opt.law = ctx.law;
    const int rc = gate(ctx, sec, p, err);
    sec.finish();
    if (rc != kOk) return rc;

    const HumSolution sol = hum_solve(ControlProblem{p, g, ctx.cfg, init, target}, tol, maxit, opt);
    write_trajectory(ctx.out / "trajectory.csv", sol.trajectory, g, snapshot_levels(g.nt, 11), "u", "v");
    report_solution(ctx, sol, target);
    return kOk;
}

int run_nonlinear_control(Context& ctx, Section sec, std::ostream& err)
{
    const auto p = validate_params(ctx.sp);
    const Grid& g = ctx.grid;
    const StatePair init = state_from(sec.sub("init"), p, g, ctx.seed);
    const StatePair target = state_from(sec.sub("target"), p, g, ctx.seed + 1);
    const auto delta_opt = sec.opt_num("delta");
    const double tol = sec.num("tol", 5e-2);
    const int maxit = static_cast<int>(sec.integer("maxit_outer", 20, 1));
    NonlinearOptions nl;
    nl.self_terms = sec.flag("self_terms", true);
    HumOptions opt;
    opt.degree = static_cast<int>(sec.integer("degree", 16, 1));
    opt.law = ctx.law;
    const int rc = gate(ctx, sec, p, err);
    sec.finish();
    if (rc != kOk) return rc;

    const double delta = delta_opt ? *delta_opt : x_norm(init, p, g) + x_norm(target, p, g);
    ctx.results["delta"] = delta;
    const HumSolution sol = nonlinear_control(ControlProblem{p, g, ctx.cfg, init, target}, delta, tol, maxit, opt, nl);
    write_trajectory(ctx.out / "trajectory.csv", sol.trajectory, g, snapshot_levels(g.nt, 11), "u", "v");
    report_solution(ctx, sol, target);
    CsvWriter ow(ctx.out / "outer.csv", {"iteration", "drift", "relative_error"});
    for (std::size_t i = 0; i < sol.error_history.size(); ++i)
        ow.row(std::vector<double>{static_cast<double>(i + 1), sol.drift_history[i], sol.error_history[i]});
    ctx.results["outer_iterations"] = sol.outer_iterations;
    ctx.results["outer_converged"] = sol.converged;
    ctx.results["drift_history"] = history(sol.drift_history);
    ctx.results["error_history"] = history(sol.error_history);
    return kOk;
}

std::string join_indices(const GeneratorTuple& gen)
{
    std::string s;
    for (std::size_t i = 0; i < gen.indices.size(); ++i) s += (i ? " " : "") + std::to_string(gen.indices[i]);
    return s;
}

AlphaForm alpha_form(Section& sec)
{
    return sec.str("alpha_form", "printed", {"printed", "derived"}) == "printed" ? AlphaForm::Printed
                                                                                 : AlphaForm::Derived;
}

int run_critical_list(Context& ctx, Section sec)
{
    const auto p = validate_params(ctx.sp);
    const double Lmax = sec.num("Lmax", 20.0);
    const AlphaForm form = alpha_form(sec);
    sec.finish();
    if (!(Lmax > 0.0)) config_error("critical_list.Lmax must be positive");
    const CriticalSet set = enumerate_critical_lengths(p, Lmax, form);
    CsvWriter w(ctx.out / "critical.csv", {"value", "family", "indices"});
    json list = json::array();
    for (const auto& cl : set.lengths) {
        const auto& gen = cl.gens.front();
        w.row(std::vector<std::string>{fmt(cl.value), gen.family == Family::F1 ? "F1" : "F2", join_indices(gen)});
        json e;
        e["value"] = cl.value;
        json gens = json::array();
        for (const auto& gg : cl.gens) gens.push_back(to_string(gg));
        e["generators"] = gens;
        list.push_back(e);
    }
    ctx.results["count"] = set.lengths.size();
    ctx.results["lengths"] = list;
    return kOk;
}

json residual_json(const Residuals& r)
{
    json a = json::array();
    for (const auto& z : r) a.push_back(json::array({z.real(), z.imag()}));
    return a;
}

int run_critical_check(Context& ctx, Section sec)
{
    const auto p = validate_params(ctx.sp);
    const double L = sec.num("L", ctx.grid.L);
    const double rel_tol = sec.num("rel_tol", 1e-3);
    const double oracle_tol = sec.num("oracle_tol", 1e-6);
    const AlphaForm form = alpha_form(sec);
    std::vector<GeneratorTuple> tuples;
    if (const json* t = sec.raw("tuples")) {
        if (!t->is_array()) config_error("critical_check.tuples must be an array of 5-integer arrays");
        for (const auto& e : *t) {
            if (!e.is_array() || e.size() != 5) config_error("critical_check.tuples entries need 5 integers");
            GeneratorTuple gen{Family::F2, {}};
            for (const auto& v : e) {
                if (!v.is_number_integer() || v.get<int>() < 1)
                    config_error("critical_check.tuples entries must be positive integers");
                gen.indices.push_back(v.get<int>());
            }
            tuples.push_back(gen);
        }
    }
    json tj = json::array();
    for (const auto& t : tuples) tj.push_back(t.indices);
    ctx.echo["critical_check"]["tuples"] = tj;
    Section sc = sec.sub("scan");
    const double pmin = sc.num("p_min", -1.0);
    const double pmax = sc.num("p_max", 1.0);
    const int count = static_cast<int>(sc.integer("count", 41, 0));
    const std::string variant = sc.str("variant", "e18", {"e18", "e14"});
    const int nx = static_cast<int>(sc.integer("nx", 128, 64));
    sc.finish();
    sec.finish();
    if (!(L > 0.0)) config_error("critical_check.L must be positive");
    if (!(rel_tol >= 0.0 && rel_tol < 1.0)) config_error("critical_check.rel_tol must lie in [0,1)");

    const auto gen = is_critical(p, L, rel_tol, form);
    ctx.results["L"] = L;
    ctx.results["critical"] = gen.has_value();
    ctx.results["generator"] = gen ? json(to_string(*gen)) : json(nullptr);
    ctx.results["root_sharing_p0"] = root_sharing_oracle(p, 0.0, L, oracle_tol);
    json tr = json::array();
    for (const auto& t : tuples) {
        const CriticalLength cl = verify_tuple(p, t, form);
        json e;
        e["tuple"] = to_string(t);
        e["alpha"] = alpha_quadratic(t.indices[0], t.indices[1], t.indices[2], t.indices[3], t.indices[4], form);
        e["L"] = cl.value;
        e["xi0"] = cl.xi0;
        e["p"] = json::array({cl.p.real(), cl.p.imag()});
        e["residuals"] = residual_json(cl.residuals);
        e["residuals_alt"] = residual_json(cl.residuals_alt);
        e["root_sharing"] = root_sharing_oracle(p, cl.p, cl.value, oracle_tol);
        tr.push_back(e);
    }
    ctx.results["tuples"] = tr;
    if (count > 0) {
        std::vector<std::complex<double>> lams;
        for (int i = 0; i < count; ++i) {
            const double pv = count == 1 ? pmin : pmin + (pmax - pmin) * i / (count - 1);
            lams.push_back({0.0, pv});
        }
        const auto scan = ode_kernel_scan(p, L, lams, variant == "e18" ? KernelVariant::E18 : KernelVariant::E14, nx);
        CsvWriter w(ctx.out / "scan.csv", {"p", "sigma_min"});
        double smin = std::numeric_limits<double>::infinity(), at = 0.0;
        for (const auto& s : scan) {
            w.row(std::vector<double>{s.lambda.imag(), s.sigma_min});
            if (s.sigma_min < smin) {
                smin = s.sigma_min;
                at = s.lambda.imag();
            }
        }
        ctx.results["scan_min"] = smin;
        ctx.results["scan_argmin_p"] = at;
        add_plot(ctx, "scan.csv", "p", {"sigma_min"}, "smallest singular value, lambda = i p");
    }
    return kOk;
}

int run_obs_scan(Context& ctx, Section sec)
{
    const auto p = validate_params(ctx.sp);
    const auto Ls = sec.numbers("L_values", {ctx.grid.L});
    const int degree = static_cast<int>(sec.integer("degree", 16, 1));
    const int samples = static_cast<int>(sec.integer("samples", 0, 0));
    sec.finish();
    std::vector<std::string> header{"L", "lanczos_min"};
    if (samples > 0) header.push_back("sampled_ratio");
    CsvWriter w(ctx.out / "obs_scan.csv", header);
    json rows = json::array();
    for (double L : Ls) {
        const Grid g = make_grid(L, ctx.grid.T, ctx.grid.nx, ctx.grid.nt);
        const double lmin = observability_lanczos(ctx.cfg, p, g, degree, ctx.law);
        json e;
        e["L"] = L;
        e["lanczos_min"] = lmin;
        if (samples > 0) {
            const double ratio = observability_ratio(ctx.cfg, p, g, samples, ctx.seed, degree, ctx.law);
            w.row(std::vector<double>{L, lmin, ratio});
            e["sampled_ratio"] = ratio;
        } else {
            w.row(std::vector<double>{L, lmin});
        }
        rows.push_back(e);
    }
    ctx.results["scan"] = rows;
    add_plot(ctx, "obs_scan.csv", "L", {"lanczos_min"}, "observability minimum vs L");
    return kOk;
}

int run_gramian_scan(Context& ctx, Section sec)
{
    const auto p = validate_params(ctx.sp);
    const auto Ls = sec.numbers("L_values", {ctx.grid.L});
    const int degree = static_cast<int>(sec.integer("degree", 16, 1));
    const int vectors = static_cast<int>(sec.integer("vectors", 4, 0));
    sec.finish();
    CsvWriter w(ctx.out / "gramian_scan.csv", {"L", "min_eig", "max_eig", "max_asymmetry"});
    json rows = json::array();
    for (double L : Ls) {
        const Grid g = make_grid(L, ctx.grid.T, ctx.grid.nx, ctx.grid.nt);
        const Gramian gram(p, g, ctx.cfg, ctx.law);
        const FinalDataBasis basis = FinalDataBasis::legendre(g, degree);
        const LanczosResult lr = gramian_lanczos(gram, basis, basis.size(), ctx.seed);
        double asym = 0.0;
        for (int i = 0; i < vectors; ++i) {
            const StatePair x = random_smooth_state(p, g, ctx.seed + 2 * i);
            const StatePair y = random_smooth_state(p, g, ctx.seed + 2 * i + 1);
            const double xy = l2_inner(gram.apply(x), y, g), yx = l2_inner(x, gram.apply(y), g);
            asym = std::max(asym, std::abs(xy - yx) / std::max(std::abs(xy), 1e-300));
        }
        w.row(std::vector<double>{L, lr.ritz.front(), lr.ritz.back(), asym});
        json e;
        e["L"] = L;
        e["min_eig"] = lr.ritz.front();
        e["max_eig"] = lr.ritz.back();
        e["max_asymmetry"] = asym;
        rows.push_back(e);
    }
    ctx.results["scan"] = rows;
    add_plot(ctx, "gramian_scan.csv", "L", {"min_eig"}, "Gramian minimum eigenvalue vs L");
    return kOk;
}

// ---- SVG -------------------------------------------------------------------

std::string xml_escape(const std::string& s)
{
    std::string o;
    for (char c : s) {
        switch (c) {
        case '&': o += "&amp;"; break;
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
        }
    }
    return o;
}

bool render_svg(const PlotSpec& spec, std::ostream& warn)
{
    CsvTable t;
    try {
        t = read_csv(spec.csv);
    } catch (const std::exception& e) {
        warn << "warning: plot " << spec.svg << " skipped: " << e.what() << '\n';
        return false;
    }
    const int xc = t.column(spec.x);
    std::vector<int> ycs;
    for (const auto& y : spec.ys) {
        const int c = t.column(y);
        if (c >= 0) ycs.push_back(c);
    }
    if (t.rows.empty() || xc < 0 || ycs.empty()) {
        warn << "warning: plot " << spec.svg << " skipped: no data\n";
        return false;
    }
    auto val = [](const std::string& s) {
        try {
            return std::stod(s);
        } catch (...) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& r : t.rows) {
        const double x = val(r[xc]);
        if (std::isfinite(x)) x0 = std::min(x0, x), x1 = std::max(x1, x);
        for (int c : ycs) {
            const double y = val(r[c]);
            if (std::isfinite(y)) y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    }
    if (!std::isfinite(x0) || !std::isfinite(y0)) {
        warn << "warning: plot " << spec.svg << " skipped: no finite values\n";
        return false;
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    const double W = 640, H = 400, ml = 70, mr = 20, mt = 30, mb = 40;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ofstream os(spec.svg);
    if (!os) {
        warn << "warning: cannot write " << spec.svg << '\n';
        return false;
    }
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto label = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<metadata>\n";
    for (int c : {xc}) {
        os << "<series name=\"" << xml_escape(t.header[c]) << "\">";
        for (std::size_t i = 0; i < t.rows.size(); ++i) os << (i ? " " : "") << xml_escape(t.rows[i][c]);
        os << "</series>\n";
    }
    for (int c : ycs) {
        os << "<series name=\"" << xml_escape(t.header[c]) << "\">";
        for (std::size_t i = 0; i < t.rows.size(); ++i) os << (i ? " " : "") << xml_escape(t.rows[i][c]);
        os << "</series>\n";
    }
    os << "</metadata>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(spec.title)
       << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"" << H - mb + 15 << "\" font-size=\"11\">" << label(x0) << "</text>\n";
    os << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 15 << "\" font-size=\"11\" text-anchor=\"end\">" << label(x1)
       << "</text>\n";
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 8 << "\" font-size=\"12\" text-anchor=\"middle\">"
       << xml_escape(spec.x) << "</text>\n";
    os << "<text x=\"" << ml - 5 << "\" y=\"" << H - mb << "\" font-size=\"11\" text-anchor=\"end\">" << label(y0)
       << "</text>\n";
    os << "<text x=\"" << ml - 5 << "\" y=\"" << mt + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << label(y1)
       << "</text>\n";
    for (std::size_t s = 0; s < ycs.size(); ++s) {
        const int c = ycs[s];
        const char* color = colors[s % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& r : t.rows) {
            const double x = val(r[xc]), y = val(r[c]);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            os << (first ? "" : " ") << num(px(x)) << ',' << num(py(y));
            first = false;
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - mr - 5 << "\" y=\"" << mt + 15 + 14 * s << "\" font-size=\"11\" text-anchor=\"end\" fill=\""
           << color << "\">" << xml_escape(t.header[c]) << "</text>\n";
    }
    os << "</svg>\n";
    return true;
}

json resolve_common(Context& ctx, const json& cfg, const std::string& scenario, std::optional<std::uint64_t> seed_override)
{
    if (!cfg.is_object()) config_error("configuration must be a JSON object");
    json echo = json::object();
    Section top(&cfg, &echo, "config");
    const long long version = top.integer("schema_version", -1, -1);
    if (version != kSchemaVersion)
        config_error("schema_version must be " + std::to_string(kSchemaVersion) + ", got " + std::to_string(version));
    const std::string sc = top.str("scenario", scenario, kScenarios);
    if (sc != scenario) config_error("config is for scenario '" + sc + "', invoked as '" + scenario + "'");

    Section ps = top.sub("params");
    ctx.sp.a = ps.num("a", 0.5);
    ctx.sp.a1 = ps.num("a1", 1.0);
    ctx.sp.a2 = ps.num("a2", 1.0);
    ctx.sp.b = ps.num("b", 1.0);
    ctx.sp.c = ps.num("c", 1.0);
    ctx.sp.r = ps.num("r", 1.0);
    ps.finish();
    Section gs = top.sub("grid");
    const double L = gs.num("L", M_PI);
    const double T = gs.num("T", 1.0);
    const auto nx = gs.integer("nx", 100, 1);
    const auto nt = gs.integer("nt", 1000, 1);
    gs.finish();
    ctx.grid = make_grid(L, T, static_cast<int>(nx), static_cast<int>(nt));
    ctx.cfg = ControlConfig::parse(top.str("config", "C3", {"C1", "C2", "C3", "C4", "C5", "C6"}));
    ctx.law.kind = parse_law(top.str("law", "bessel", {"bessel", "riesz"}));
    const long long seed = top.integer("seed", 0, 0);
    ctx.seed = seed_override ? *seed_override : static_cast<std::uint64_t>(seed);
    echo["seed"] = ctx.seed;
    Section os = top.sub("output");
    ctx.plots = os.flag("plots", true);
    os.finish();
    for (const auto& s : kScenarios) {
        const std::string key = section_key(s);
        if (s != scenario) {
            if (const json* v = top.raw(key); v && !v->is_object()) config_error("config." + key + " must be an object");
        }
    }
    top.raw(section_key(scenario));
    top.finish();
    return echo;
}

}  // namespace

int CsvTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw Error("IoError", "cannot read " + path);
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!s.empty() && s.back() == ',') cells.push_back("");
        return cells;
    };
    if (!std::getline(is, line)) return t;
    t.header = split(line);
    while (std::getline(is, line))
        if (!line.empty()) t.rows.push_back(split(line));
    return t;
}

std::vector<std::string> emit_plots(const std::vector<PlotSpec>& plots, std::ostream& warn)
{
    std::vector<std::string> written;
    if (plots.empty()) {
        warn << "warning: no curves to plot\n";
        return written;
    }
    for (const auto& p : plots)
        if (render_svg(p, warn)) written.push_back(p.svg);
    return written;
}

std::vector<std::string> read_plot_series(const std::string& svg_path, const std::string& column)
{
    std::ifstream is(svg_path);
    if (!is) throw Error("IoError", "cannot read " + svg_path);
    const std::string open = "<series name=\"" + xml_escape(column) + "\">";
    std::string line;
    while (std::getline(is, line)) {
        const auto pos = line.find(open);
        if (pos == std::string::npos) continue;
        const auto start = pos + open.size();
        const auto end = line.find("</series>", start);
        std::vector<std::string> cells;
        std::stringstream ss(line.substr(start, end - start));
        std::string c;
        while (ss >> c) cells.push_back(c);
        return cells;
    }
    return {};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Gear-Grimshaw boundary control scenarios"};
    std::string scenario, config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool force = false;
    app.add_option("scenario", scenario, "scenario to run")->required()->check(CLI::IsMember(kScenarios));
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "override the configuration seed");
    app.add_flag("--force", force, "run even when a precondition gate fails");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    Context ctx;
    ctx.force = force;
    ctx.out = out_dir;
    json cfg;
    try {
        std::ifstream is(config_path);
        if (!is) config_error("cannot open " + config_path);
        try {
            cfg = json::parse(is);
        } catch (const json::exception& e) {
            config_error(std::string("invalid JSON: ") + e.what());
        }
        ctx.echo = resolve_common(ctx, cfg, scenario, seed);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) {
        err << "error: cannot create " << ctx.out << ": " << ec.message() << '\n';
        return kConfigError;
    }

    const std::string key = section_key(scenario);
    const json* src = cfg.contains(key) ? &cfg[key] : nullptr;
    const auto t0 = std::chrono::steady_clock::now();
    int rc = kOk;
    try {
        Section sec(src, &ctx.echo[key], "config." + key);
        if (scenario == "simulate") rc = run_simulate(ctx, std::move(sec));
        else if (scenario == "adjoint") rc = run_adjoint(ctx, std::move(sec));
        else if (scenario == "hum") rc = run_hum(ctx, std::move(sec), err);
        else if (scenario == "nonlinear-control") rc = run_nonlinear_control(ctx, std::move(sec), err);
        else if (scenario == "critical-list") rc = run_critical_list(ctx, std::move(sec));
        else if (scenario == "critical-check") rc = run_critical_check(ctx, std::move(sec));
        else if (scenario == "obs-scan") rc = run_obs_scan(ctx, std::move(sec));
        else rc = run_gramian_scan(ctx, std::move(sec));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        const std::string& k = e.kind();
        if (k == "ConfigError" || k == "CoefficientViolation" || k == "GridViolation") return kConfigError;
        if (k == "PreconditionViolation") return kPreconditionFailure;
        return kSolverError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kSolverError;
    }
    if (rc != kOk) return rc;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (const auto& w : ctx.warnings) err << "warning: " << w << '\n';
    json summary;
    summary["scenario"] = scenario;
    summary["config"] = ctx.echo;
    summary["results"] = ctx.results;
    summary["warnings"] = ctx.warnings;
    std::ofstream(ctx.out / "summary.json") << summary.dump(2) << '\n';
    std::ofstream(ctx.out / "timings.txt") << "scenario " << scenario << "\nwall_seconds " << seconds << '\n';
    if (ctx.plots) emit_plots(ctx.plot_specs, err);
    out << scenario << ": done, outputs in " << ctx.out.string() << '\n';
    return kOk;
}

}  // namespace gg::cli
