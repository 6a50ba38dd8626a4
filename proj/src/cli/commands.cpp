#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "abp/cli.hpp"
#include "abp/errors.hpp"

namespace abp::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results keep index order.
template <class Fn>
auto parallel_map(std::size_t n, int jobs, Fn fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

bool on_boundary(const ModelParams& p) { return std::abs(p.x0) >= 1.0; }

bool wants(Method requested, Method m) { return requested == Method::all || requested == m; }

oracles::McConfig mc_for(const RunSpec& spec, std::size_t cells) {
    oracles::McConfig mc = spec.mc;
    mc.threads = cells == 1 ? spec.jobs : 1;
    return mc;
}

void warn_regime(const RunSpec& spec, const std::vector<ModelParams>& grid, std::ostream& warn) {
    if (!wants(spec.method, Method::series)) return;
    for (const auto& p : grid)
        if (p.pe > 1.0) {
            warn << "warning: pe > 1 lies outside the weak-swimming regime; series values are unreliable\n";
            return;
        }
}

struct Estimate {
    double mu = kNaN;
    double stderr_ = kNaN;
    bool under_resolved = false;
};

Estimate single(const RunSpec& spec, Method m, const ModelParams& p, std::size_t cells) {
    Estimate e;
    switch (m) {
        case Method::series:
            e.mu = series::mfpt_series(p, spec.series).three_term();
            break;
        case Method::pde: {
            if (on_boundary(p)) return {0.0, kNaN, false};
            const auto r = pde::mfpt_pde(p, spec.grid);
            e.mu = r.mfpt;
            e.under_resolved = r.survival.under_resolved;
            break;
        }
        case Method::bvp:
            e.mu = on_boundary(p) ? 0.0 : oracles::mfpt_bvp_extrapolated(p, spec.bvp_nx);
            break;
        case Method::mc: {
            const auto r = oracles::mfpt_mc(p, mc_for(spec, cells));
            e.mu = r.mean_fpt;
            e.stderr_ = r.std_err;
            break;
        }
        case Method::all:
            throw ValidationError("method", "a single method is required here");
    }
    return e;
}

void report_resolution(const std::vector<ModelParams>& grid, const std::vector<bool>& flags,
                       std::ostream& warn) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (flags[i])
            warn << "warning: PDE survival increased beyond tolerance at x0=" << grid[i].x0
                 << " pe=" << grid[i].pe << "; refine --dt or --nx\n";
}

}  // namespace

Table cmd_mfpt(const RunSpec& spec, std::ostream& warn) {
    validate(spec);
    const auto grid = expand_grid(spec);
    warn_regime(spec, grid, warn);
    struct Row {
        std::vector<double> values;
        bool under_resolved = false;
    };
    const auto rows = parallel_map(grid.size(), spec.jobs, [&](std::size_t i) {
        const auto& p = grid[i];
        const auto s = series::mfpt_series(p, spec.series);
        Row row;
        row.values = {p.x0, p.pe, p.beta, p.eta, s.mu0, s.mu1, s.mu2, s.two_term(), s.three_term(),
                      kNaN, kNaN, kNaN, kNaN};
        if (wants(spec.method, Method::pde)) {
            const auto e = single(spec, Method::pde, p, grid.size());
            row.values[9] = e.mu;
            row.under_resolved = e.under_resolved;
        }
        if (wants(spec.method, Method::bvp)) row.values[10] = single(spec, Method::bvp, p, grid.size()).mu;
        if (wants(spec.method, Method::mc)) {
            const auto e = single(spec, Method::mc, p, grid.size());
            row.values[11] = e.mu;
            row.values[12] = e.stderr_;
        }
        return row;
    });
    Table t;
    t.provenance = provenance(spec, "mfpt");
    t.columns = {"x0",     "pe",     "beta",   "eta",   "mu0",   "mu1",          "mu2",
                 "mu_two_term", "mu_three_term", "mu_pde", "mu_bvp", "mu_mc", "mu_mc_stderr"};
    std::vector<bool> flags;
    for (const auto& r : rows) {
        t.rows.push_back(r.values);
        flags.push_back(r.under_resolved);
    }
    report_resolution(grid, flags, warn);
    return t;
}

Table cmd_contour(const RunSpec& spec, std::ostream& warn) {
    if (spec.sweep.size() != 2) throw ValidationError("sweep", "contour needs exactly 2 sweep axes");
    if (spec.method == Method::all) throw ValidationError("method", "contour needs a single method");
    validate(spec);
    const auto grid = expand_grid(spec);
    warn_regime(spec, grid, warn);
    const auto est = parallel_map(grid.size(), spec.jobs,
                                  [&](std::size_t i) { return single(spec, spec.method, grid[i], grid.size()); });
    Table t;
    t.provenance = provenance(spec, "contour");
    t.columns = {"x0", "pe", "beta", "eta", "mu", "mu_stderr"};
    std::vector<bool> flags;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& p = grid[i];
        t.rows.push_back({p.x0, p.pe, p.beta, p.eta, est[i].mu, est[i].stderr_});
        flags.push_back(est[i].under_resolved);
    }
    report_resolution(grid, flags, warn);
    return t;
}

Table cmd_survival(const RunSpec& spec, std::ostream& warn) {
    if (!spec.sweep.empty()) throw ValidationError("sweep", "survival takes fixed parameters only");
    if (spec.method == Method::bvp || spec.method == Method::mc)
        throw ValidationError("method", "survival supports series, pde or all");
    validate(spec);
    const auto& p = spec.params;
    std::vector<double> times;
    if (spec.times.count == 1)
        times = {spec.times.min};
    else
        times = spec.times.values();

    std::vector<double> s_series(times.size(), kNaN), s_pde(times.size(), kNaN), f_pde(times.size(), kNaN);
    if (wants(spec.method, Method::series)) {
        if (p.pe > 1.0)
            warn << "warning: pe > 1 lies outside the weak-swimming regime; series values are unreliable\n";
        const double t_min = series::t_min_reliable(spec.series);
        if (times.front() < t_min)
            warn << "warning: series truncation is visible for t < " << t_min << "\n";
        const series::SurvivalSeries s(p, spec.series);
        s_series = parallel_map(times.size(), spec.jobs,
                                [&](std::size_t i) { return s.total(times[i], spec.order); });
    }
    if (wants(spec.method, Method::pde)) {
        const auto r = pde::mfpt_pde(p, spec.grid);
        if (r.survival.under_resolved)
            warn << "warning: PDE survival increased by " << r.survival.max_increase
                 << "; refine --dt or --nx\n";
        for (std::size_t i = 0; i < times.size(); ++i) {
            s_pde[i] = r.survival.at(times[i]);
            f_pde[i] = r.density_at(times[i]);
        }
    }
    Table t;
    t.provenance = provenance(spec, "survival");
    t.columns = {"t", "S_series", "S_pde", "F_pde"};
    for (std::size_t i = 0; i < times.size(); ++i) t.rows.push_back({times[i], s_series[i], s_pde[i], f_pde[i]});
    return t;
}

namespace {

struct Options {
    std::string method, x0 = "0", pe = "0", beta = "1", eta = "0.5", output, format = "csv", preset;
    std::string times = "0:2:201";
};

void add_common(CLI::App& cmd, Options& o, RunSpec& spec) {
    cmd.add_option("--method", o.method, "series | pde | bvp | mc | all");
    cmd.add_option("--x0", o.x0, "start position, value or min:max:count");
    cmd.add_option("--pe", o.pe, "Peclet number, value or min:max:count");
    cmd.add_option("--beta", o.beta, "tumbling parameter, value or min:max:count");
    cmd.add_option("--eta", o.eta, "right-oriented fraction, value or min:max:count");
    cmd.add_option("--n-terms", spec.series.n_terms, "series truncation")->capture_default_str();
    cmd.add_option("--nx", spec.grid.nx, "PDE interior nodes")->capture_default_str();
    cmd.add_option("--dt", spec.grid.dt, "PDE time step")->capture_default_str();
    cmd.add_option("--t-max", spec.grid.t_max, "PDE horizon")->capture_default_str();
    cmd.add_option("--theta", spec.grid.theta, "PDE theta (0.5 = Crank-Nicolson)")->capture_default_str();
    cmd.add_option("--s-tail", spec.grid.s_tail, "PDE tail-fit threshold")->capture_default_str();
    cmd.add_option("--bvp-nx", spec.bvp_nx, "BVP interior nodes")->capture_default_str();
    cmd.add_option("--particles", spec.mc.n_particles, "Monte Carlo particles")->capture_default_str();
    cmd.add_option("--dt-mc", spec.mc.dt_mc, "Monte Carlo time step")->capture_default_str();
    cmd.add_option("--seed", spec.mc.seed, "Monte Carlo seed")->capture_default_str();
    cmd.add_option("--jobs", spec.jobs, "worker threads; also the Monte Carlo stream count")
        ->capture_default_str();
    cmd.add_option("--output", o.output, "output path (default: standard output)");
    cmd.add_option("--format", o.format, "csv | json")->capture_default_str();
}

void finish_spec(RunSpec& spec, const Options& o, const std::string& default_method) {
    spec.method = parse_method(o.method.empty() ? default_method : o.method);
    if (o.format == "csv")
        spec.format = Format::csv;
    else if (o.format == "json")
        spec.format = Format::json;
    else
        throw ValidationError("format", "unknown format '" + o.format + "'");
    spec.sweep.clear();
    const std::pair<const char*, const std::string*> vars[] = {
        {"x0", &o.x0}, {"pe", &o.pe}, {"beta", &o.beta}, {"eta", &o.eta}};
    double* fixed[] = {&spec.params.x0, &spec.params.pe, &spec.params.beta, &spec.params.eta};
    for (std::size_t i = 0; i < 4; ++i)
        if (auto axis = parse_axis(vars[i].first, *vars[i].second, *fixed[i])) spec.sweep.push_back(*axis);
    spec.output = o.output.empty() ? "-" : o.output;
    spec.mc.streams = spec.jobs;
}

std::filesystem::path resolve_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative())
        if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) p = std::filesystem::path(dir) / p;
    return p;
}

void emit(const RunSpec& spec, const Table& table, std::ostream& out) {
    std::ostringstream buf;
    if (spec.format == Format::json)
        write_json(table, buf);
    else
        write_csv(table, buf);
    if (spec.output == "-") {
        out << buf.str();
        return;
    }
    const auto path = resolve_output(spec.output);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!(file << buf.str()))
        throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mean first passage times of run-and-tumble particles in [-1, 1]", kToolName};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunSpec mfpt_spec, contour_spec, survival_spec;
    Options mfpt_opt, contour_opt, survival_opt;
    contour_opt.x0 = contour_opt.pe = "";

    auto* mfpt = app.add_subcommand("mfpt", "MFPT per grid point: series terms and optional oracles");
    add_common(*mfpt, mfpt_opt, mfpt_spec);

    auto* contour = app.add_subcommand("contour", "long-format (x0, pe, mu) grid for contour plots");
    add_common(*contour, contour_opt, contour_spec);
    contour->add_option("--preset", contour_opt.preset, "fig4a | fig4b | fig4c | fig4d");

    auto* surv = app.add_subcommand("survival", "survival probability S(t) and first-passage density");
    add_common(*surv, survival_opt, survival_spec);
    surv->add_option("--times", survival_opt.times, "time grid min:max:count")->capture_default_str();
    surv->add_option("--order", survival_spec.order, "series order 0, 1 or 2")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        Table table;
        RunSpec* spec = nullptr;
        if (*mfpt) {
            spec = &mfpt_spec;
            finish_spec(*spec, mfpt_opt, "series");
            table = cmd_mfpt(*spec, err);
        } else if (*contour) {
            spec = &contour_spec;
            // Preset axes fill in only for variables the user left unset.
            Options o = contour_opt;
            if (o.x0.empty()) o.x0 = "0";
            if (o.pe.empty()) o.pe = "0";
            finish_spec(*spec, o, "pde");
            if (!contour_opt.preset.empty()) {
                std::vector<SweepAxis> user;
                for (const auto& a : spec->sweep)
                    if ((a.variable == "x0" && !contour_opt.x0.empty()) ||
                        (a.variable == "pe" && !contour_opt.pe.empty()) ||
                        (a.variable != "x0" && a.variable != "pe"))
                        user.push_back(a);
                spec->sweep = user;
                const double beta = spec->params.beta, eta = spec->params.eta;
                apply_preset(*spec, contour_opt.preset);
                if (contour->count("--beta")) spec->params.beta = beta;
                if (contour->count("--eta")) spec->params.eta = eta;
            }
            table = cmd_contour(*spec, err);
        } else {
            spec = &survival_spec;
            finish_spec(*spec, survival_opt, "all");
            double fixed = 0.0;
            if (auto axis = parse_axis("times", survival_opt.times, fixed))
                spec->times = *axis;
            else
                spec->times = {"t", fixed, fixed, 1};
            table = cmd_survival(*spec, err);
        }
        emit(*spec, table, out);
        return kOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace abp::cli
