// Command-line front end: simulate paths, estimate realized Laplace
// transforms with standard errors, estimate the activity index, fit the
// tempered stable scale family, and run Monte Carlo studies.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlt/activity.hpp"
#include "rlt/io.hpp"
#include "rlt/levy_sim.hpp"
#include "rlt/mc.hpp"
#include "rlt/md_fit.hpp"
#include "rlt/rlt_core.hpp"

namespace {

using nlohmann::json;

// "a,b,c" or "grid:lo,hi,n" -> vector of u points
Eigen::VectorXd parse_u_spec(const std::string& spec) {
    if (spec.rfind("grid:", 0) == 0) {
        double lo, hi;
        long n;
        char c1, c2;
        std::istringstream ss(spec.substr(5));
        if (!(ss >> lo >> c1 >> hi >> c2 >> n) || c1 != ',' || c2 != ',' || n < 2)
            throw CLI::ValidationError("--u", "expected grid:lo,hi,n");
        Eigen::VectorXd u(n);
        for (long i = 0; i < n; ++i)
            u[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return u;
    }
    std::vector<double> vals;
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty())
            continue;
        vals.push_back(std::stod(tok));
    }
    if (vals.empty())
        throw CLI::ValidationError("--u", "no u values given");
    Eigen::VectorXd u(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i)
        u[static_cast<Eigen::Index>(i)] = vals[i];
    return u;
}

struct IngestArgs {
    std::string input;
    std::string format = "auto";
    double delta_n = std::numeric_limits<double>::quiet_NaN();
    bool log_levels = false;
    bool lenient = false;
};

void add_ingest_flags(CLI::App* cmd, IngestArgs& args) {
    cmd->add_option("--input", args.input, "input CSV (path or returns series)")
        ->required();
    cmd->add_option("--format", args.format,
                    "input layout: auto, levels, time-level, returns")
        ->check(CLI::IsMember({"auto", "levels", "time-level", "returns"}));
    cmd->add_option("--delta-n", args.delta_n,
                    "grid spacing in days (falls back to the sidecar "
                    "<input>.meta.json, then to timestamp spacing)");
    cmd->add_flag("--log", args.log_levels, "work on log levels");
    cmd->add_flag("--lenient", args.lenient, "skip malformed rows instead of failing");
}

rlt::PathGrid load_path(const IngestArgs& args) {
    rlt::IngestSpec spec;
    if (args.format == "levels")
        spec.format = rlt::IngestSpec::Format::Levels;
    else if (args.format == "time-level")
        spec.format = rlt::IngestSpec::Format::TimeLevel;
    else if (args.format == "returns")
        spec.format = rlt::IngestSpec::Format::Returns;
    spec.delta_n = args.delta_n;
    if (std::isnan(spec.delta_n)) {
        // sidecar metadata written by `simulate`
        const std::string meta = args.input + ".meta.json";
        std::ifstream in(meta);
        if (in) {
            json j;
            in >> j;
            if (j.contains("delta_n"))
                spec.delta_n = j["delta_n"].get<double>();
        }
    }
    spec.log_levels = args.log_levels;
    spec.strict = !args.lenient;
    return rlt::ingest_file(args.input, spec);
}

// --beta accepts a number or "estimate"; returns (beta, estimate?)
struct BetaChoice {
    double value = 0.0;
    bool estimate = false;
};

BetaChoice parse_beta(const std::string& s) {
    BetaChoice out;
    if (s == "estimate") {
        out.estimate = true;
        return out;
    }
    try {
        out.value = std::stod(s);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--beta", "expected a number or 'estimate'");
    }
    return out;
}

rlt::HACKernel parse_kernel(const std::string& s) {
    return s == "parzen" ? rlt::HACKernel::Parzen : rlt::HACKernel::Bartlett;
}

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
    std::string driver = "stable";
    double beta = 1.7;
    double c_level = std::numeric_limits<double>::quiet_NaN();
    double lambda = 0.25;
    double cir_kappa = 0.02;
    double cir_theta = 1.0;
    double cir_sigma = 0.05;
    std::string cir_v0 = "stationary";
    double days = 300.0;
    int per_day = 78;
    int substeps = 1;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    rlt::CIRSpec cir;
    cir.kappa = a.cir_kappa;
    cir.theta = a.cir_theta;
    cir.sigma_vol = a.cir_sigma;
    if (a.cir_v0 == "stationary") {
        cir.stationary_init = true;
    } else {
        cir.stationary_init = false;
        cir.v0 = std::stod(a.cir_v0);
    }

    rlt::DriverSpec driver;
    json driver_meta;
    if (a.driver == "stable") {
        driver = rlt::StableSpec{a.beta};
        driver_meta = {{"kind", "stable"}, {"beta", a.beta}};
    } else {
        rlt::TemperedStableSpec ts;
        ts.beta = a.beta;
        ts.c = std::isnan(a.c_level) ? rlt::stable_level(a.beta) : a.c_level;
        ts.lambda = a.lambda;
        driver = ts;
        driver_meta = {{"kind", "tempered_stable"},
                       {"beta", ts.beta},
                       {"c", ts.c},
                       {"lambda", ts.lambda}};
    }

    const Eigen::Index n = static_cast<Eigen::Index>(std::llround(a.days * a.per_day));
    rlt::RngStream rng(a.seed, a.stream);
    const rlt::ModelPath mp =
        rlt::simulate_model(rng, driver, cir, 1.0 / a.per_day, n, a.substeps);

    rlt::write_path_csv_file(a.out, mp.x);
    json meta = {
        {"delta_n", mp.x.delta_n},
        {"t_span", mp.x.t_span()},
        {"n", mp.x.n_increments()},
        {"seed", a.seed},
        {"stream", a.stream},
        {"substeps", a.substeps},
        {"driver", driver_meta},
        {"cir",
         {{"kappa", cir.kappa},
          {"theta", cir.theta},
          {"sigma_vol", cir.sigma_vol},
          {"v0", cir.stationary_init ? json() : json(cir.v0)},
          {"stationary_init", cir.stationary_init}}},
    };
    rlt::write_text_file(a.out + ".meta.json", meta.dump(2) + "\n");
    std::cout << "wrote " << a.out << " (" << mp.x.n_increments()
              << " increments, delta_n = " << mp.x.delta_n << ")\n";
    return 0;
}

// ---- rlt ---------------------------------------------------------------

struct RltArgs {
    IngestArgs in;
    std::string beta = "estimate";
    std::string u_spec = "0.1,0.5,1.25,2.5,3.75";
    bool differenced = false;
    std::string variance = "auto"; // auto, hac, fixed-span, none
    std::string kernel = "bartlett";
    int lags = -1;
    int boot = 200;
    std::uint64_t seed = 1;
    std::string out;
    std::string out_json;
};

int run_rlt(const RltArgs& a) {
    const rlt::PathGrid path = load_path(a.in);
    const Eigen::VectorXd u = parse_u_spec(a.u_spec);
    const BetaChoice bc = parse_beta(a.beta);

    double beta = bc.value;
    double beta_se = 0.0;
    std::optional<rlt::ActivityEstimate> act;
    if (bc.estimate) {
        act = rlt::estimate_activity(path);
        rlt::RngStream rng(a.seed, 0);
        rlt::bootstrap_activity_se(path, *act, a.boot, rng);
        beta = std::min(2.0, act->beta_hat);
        beta_se = act->se;
        std::cerr << "activity index: " << act->beta_hat << " (se " << act->se
                  << "), p* = " << act->p_star << "\n";
    }

    rlt::RLTCurve curve = rlt::empirical_laplace(path, beta, u, a.differenced);

    std::string variance = a.variance;
    if (variance == "auto")
        variance = path.t_span() >= 2.0 ? "hac" : "fixed-span";

    json extra;
    if (variance == "hac") {
        const rlt::BlockStats blocks =
            rlt::block_stats(path, beta, u, a.differenced);
        const rlt::HACResult hac =
            rlt::hac_covariance(blocks, parse_kernel(a.kernel), a.lags);
        Eigen::VectorXd var =
            hac.sigma.diagonal() / static_cast<double>(hac.n_blocks);
        if (bc.estimate) {
            // plug-in correction for the estimated index; the fixed-span
            // asymptotics behind it need T * delta_n small
            if (path.t_span() * path.delta_n > 1.0)
                std::cerr << "warning: span * delta_n = "
                          << path.t_span() * path.delta_n
                          << " > 1; the plug-in correction for an estimated "
                             "index is unreliable at this resolution\n";
            Eigen::VectorXd g(u.size());
            for (Eigen::Index j = 0; j < u.size(); ++j)
                g[j] = rlt::g_hat(path, beta, u[j]);
            var += rlt::activity_correction_variance(u, g, beta, beta_se,
                                                     path.delta_n);
            extra["activity_correction"] = true;
            extra["g_hat"] = std::vector<double>(g.data(), g.data() + g.size());
        }
        curve.se = var.cwiseMax(0.0).cwiseSqrt();
        extra["hac"] = json::parse(rlt::hac_json(hac));
    } else if (variance == "fixed-span") {
        curve.se.resize(u.size());
        for (Eigen::Index j = 0; j < u.size(); ++j) {
            const rlt::FixedSpanVariance fs =
                rlt::fixed_span_variance(path, beta, u[j]);
            // variance of the normalized curve value
            curve.se[j] = std::sqrt(std::max(0.0, fs.total)) / path.t_span();
        }
        extra["variance"] = "fixed-span";
    }

    if (!a.out.empty())
        rlt::write_curve_csv_file(a.out, curve);
    else
        rlt::write_curve_csv(std::cout, curve);

    if (!a.out_json.empty()) {
        json j = json::parse(rlt::curve_json(curve));
        if (act) {
            j["activity"] = json::parse(rlt::activity_json(*act));
        }
        for (auto& [k, v] : extra.items())
            j[k] = v;
        rlt::write_text_file(a.out_json, j.dump(2) + "\n");
    }
    return 0;
}

// ---- activity ----------------------------------------------------------

struct ActivityArgs {
    IngestArgs in;
    double p0 = 0.5;
    double k_frac = 0.4;
    int boot = 500;
    std::uint64_t seed = 1;
    std::string out;
};

int run_activity(const ActivityArgs& a) {
    const rlt::PathGrid path = load_path(a.in);
    rlt::ActivityEstimate est = rlt::estimate_activity(path, a.p0, a.k_frac);
    if (a.boot > 0) {
        rlt::RngStream rng(a.seed, 0);
        rlt::bootstrap_activity_se(path, est, a.boot, rng);
    }
    const std::string payload = rlt::activity_json(est) + "\n";
    if (!a.out.empty())
        rlt::write_text_file(a.out, payload);
    else
        std::cout << payload;
    return 0;
}

// ---- fit ---------------------------------------------------------------

struct FitArgs {
    IngestArgs in;
    std::string beta = "estimate";
    int n_quad = 151;
    double u_max = std::numeric_limits<double>::quiet_NaN();
    double span_factor = 3.0;
    double init_alpha = 0.3, init_c = 1.0, init_lambda = 0.1;
    std::string kernel = "bartlett";
    int lags = -1;
    std::string out_prefix;
};

int run_fit(const FitArgs& a) {
    const rlt::PathGrid path = load_path(a.in);
    const BetaChoice bc = parse_beta(a.beta);
    double beta = bc.value;
    std::optional<rlt::ActivityEstimate> act;
    if (bc.estimate) {
        act = rlt::estimate_activity(path);
        beta = std::min(2.0, act->beta_hat);
        std::cerr << "activity index: " << act->beta_hat << ", p* = "
                  << act->p_star << "\n";
    }

    // pilot curve to locate u_max, then the fit curve on [0, span * u_max]
    double u_max = a.u_max;
    if (std::isnan(u_max)) {
        Eigen::VectorXd pilot_u(121);
        for (int i = 0; i < 121; ++i)
            pilot_u[i] = 8.0 * i / 120.0;
        const rlt::RLTCurve pilot = rlt::empirical_laplace(path, beta, pilot_u);
        u_max = rlt::solve_u_max(pilot);
        std::cerr << "u_max = " << u_max << "\n";
    }

    Eigen::VectorXd u(a.n_quad);
    for (int i = 0; i < a.n_quad; ++i)
        u[i] = a.span_factor * u_max * i / (a.n_quad - 1.0);
    const rlt::RLTCurve curve = rlt::empirical_laplace(path, beta, u);

    rlt::KernelSpec kernel{u_max};
    rlt::TemperedStableParams init;
    init.alpha = a.init_alpha;
    init.c = a.init_c;
    init.lambda = a.init_lambda;
    rlt::FitOptions opts;
    opts.quad_span_factor = a.span_factor;
    rlt::FitResult fit = rlt::fit_theta(curve, kernel, init, opts);

    const rlt::BlockStats blocks = rlt::block_stats(path, beta, u);
    const rlt::HACResult hac =
        rlt::hac_covariance(blocks, parse_kernel(a.kernel), a.lags);
    rlt::fit_standard_errors(fit, hac);

    json j = json::parse(rlt::fit_json(fit));
    if (act)
        j["activity"] = json::parse(rlt::activity_json(*act));
    j["beta_used"] = beta;

    if (a.out_prefix.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        rlt::write_text_file(a.out_prefix + ".json", j.dump(2) + "\n");
        std::ofstream os(a.out_prefix + "_curve.csv");
        if (!os)
            throw std::runtime_error("cannot open " + a.out_prefix + "_curve.csv");
        rlt::write_fit_curve_csv(os, curve, fit, &hac);
        std::cout << "wrote " << a.out_prefix << ".json and "
                  << a.out_prefix << "_curve.csv\n";
    }
    return 0;
}

// ---- mc ----------------------------------------------------------------

struct McArgs {
    std::string config;
    int reps = -1;
    int workers = -1;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool per_rep = false;
    std::string out_prefix;
};

int run_mc_cmd(const McArgs& a) {
    rlt::MCConfig cfg;
    if (!a.config.empty())
        cfg = rlt::parse_mc_config_file(a.config);
    if (a.reps > 0)
        cfg.reps = a.reps;
    if (a.workers >= 0)
        cfg.workers = a.workers;
    if (a.has_seed)
        cfg.seed = a.seed;

    const rlt::MCSummary summary = rlt::run_mc(cfg);

    if (a.out_prefix.empty()) {
        rlt::write_mc_csv(std::cout, summary);
    } else {
        std::ofstream os(a.out_prefix + ".csv");
        if (!os)
            throw std::runtime_error("cannot open " + a.out_prefix + ".csv");
        rlt::write_mc_csv(os, summary);
        rlt::write_text_file(a.out_prefix + ".json",
                             rlt::mc_json(summary, a.per_rep) + "\n");
        std::cout << "wrote " << a.out_prefix << ".csv and "
                  << a.out_prefix << ".json\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"realized Laplace transform toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "simulate a scale/price path");
    c_sim->add_option("--driver", sim.driver, "jump driver: stable or ts")
        ->check(CLI::IsMember({"stable", "ts"}));
    c_sim->add_option("--beta", sim.beta, "activity index in (1,2)");
    c_sim->add_option("--c-level", sim.c_level,
                      "tempered stable level (default: stable normalization)");
    c_sim->add_option("--lambda", sim.lambda, "tempered stable taper");
    c_sim->add_option("--cir-kappa", sim.cir_kappa, "scale mean reversion");
    c_sim->add_option("--cir-theta", sim.cir_theta, "scale long-run mean");
    c_sim->add_option("--cir-sigma", sim.cir_sigma, "scale vol-of-vol (0 = deterministic)");
    c_sim->add_option("--cir-v0", sim.cir_v0, "start value or 'stationary'");
    c_sim->add_option("--days", sim.days, "span in days");
    c_sim->add_option("--per-day", sim.per_day, "observations per day");
    c_sim->add_option("--substeps", sim.substeps, "internal substeps per observation");
    c_sim->add_option("--seed", sim.seed, "rng seed");
    c_sim->add_option("--stream", sim.stream, "rng stream id");
    c_sim->add_option("--out", sim.out, "output CSV path")->required();

    RltArgs rlt_args;
    CLI::App* c_rlt = app.add_subcommand("rlt", "realized Laplace transform of a path");
    add_ingest_flags(c_rlt, rlt_args.in);
    c_rlt->add_option("--beta", rlt_args.beta, "activity index or 'estimate'");
    c_rlt->add_option("--u", rlt_args.u_spec, "u points: list or grid:lo,hi,n");
    c_rlt->add_flag("--differenced", rlt_args.differenced,
                    "second-difference statistic (drift robust)");
    c_rlt->add_option("--variance", rlt_args.variance,
                      "se estimator: auto, hac, fixed-span, none")
        ->check(CLI::IsMember({"auto", "hac", "fixed-span", "none"}));
    c_rlt->add_option("--hac-kernel", rlt_args.kernel, "bartlett or parzen")
        ->check(CLI::IsMember({"bartlett", "parzen"}));
    c_rlt->add_option("--hac-lags", rlt_args.lags, "lag truncation (-1 = rule)");
    c_rlt->add_option("--boot", rlt_args.boot, "bootstrap draws for the activity se");
    c_rlt->add_option("--seed", rlt_args.seed, "bootstrap seed");
    c_rlt->add_option("--out", rlt_args.out, "curve CSV (default stdout)");
    c_rlt->add_option("--out-json", rlt_args.out_json, "full JSON output");

    ActivityArgs act_args;
    CLI::App* c_act = app.add_subcommand("activity", "two-stage activity index");
    add_ingest_flags(c_act, act_args.in);
    c_act->add_option("--p0", act_args.p0, "pilot power");
    c_act->add_option("--k-frac", act_args.k_frac, "final power as fraction of pilot");
    c_act->add_option("--boot", act_args.boot, "bootstrap draws (0 = none)");
    c_act->add_option("--seed", act_args.seed, "bootstrap seed");
    c_act->add_option("--out", act_args.out, "output JSON (default stdout)");

    FitArgs fit_args;
    CLI::App* c_fit = app.add_subcommand("fit", "fit the tempered stable scale family");
    add_ingest_flags(c_fit, fit_args.in);
    c_fit->add_option("--beta", fit_args.beta, "activity index or 'estimate'");
    c_fit->add_option("--u-max", fit_args.u_max, "kernel u_max (default: slope rule)");
    c_fit->add_option("--n-quad", fit_args.n_quad, "quadrature nodes");
    c_fit->add_option("--span-factor", fit_args.span_factor, "quadrature span / u_max");
    c_fit->add_option("--init-alpha", fit_args.init_alpha, "starting alpha");
    c_fit->add_option("--init-c", fit_args.init_c, "starting c");
    c_fit->add_option("--init-lambda", fit_args.init_lambda, "starting lambda");
    c_fit->add_option("--hac-kernel", fit_args.kernel, "bartlett or parzen")
        ->check(CLI::IsMember({"bartlett", "parzen"}));
    c_fit->add_option("--hac-lags", fit_args.lags, "lag truncation (-1 = rule)");
    c_fit->add_option("--out", fit_args.out_prefix, "output prefix (JSON + curve CSV)");

    McArgs mc_args;
    CLI::App* c_mc = app.add_subcommand("mc", "Monte Carlo study");
    c_mc->add_option("--config", mc_args.config, "flat key = value config file");
    c_mc->add_option("--reps", mc_args.reps, "override replication count");
    c_mc->add_option("--workers", mc_args.workers, "override worker count");
    c_mc->add_option("--seed", mc_args.seed, "override master seed")
        ->each([&](const std::string&) { mc_args.has_seed = true; });
    c_mc->add_flag("--per-rep", mc_args.per_rep, "include per-replication values in JSON");
    c_mc->add_option("--out", mc_args.out_prefix, "output prefix (CSV + JSON)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_sim->parsed())
            return run_simulate(sim);
        if (c_rlt->parsed())
            return run_rlt(rlt_args);
        if (c_act->parsed())
            return run_activity(act_args);
        if (c_fit->parsed())
            return run_fit(fit_args);
        if (c_mc->parsed())
            return run_mc_cmd(mc_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
