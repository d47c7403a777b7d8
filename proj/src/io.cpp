#include "rlt/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace rlt {
namespace {

constexpr double kZ975 = 1.959963984540054;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

nlohmann::json to_json_array(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

nlohmann::json to_json_matrix(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

// tokens separated by commas, semicolons or whitespace
std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',' || ch == ';' || ch == ' ' || ch == '\t' || ch == '\r') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

bool parse_double(const std::string& tok, double& out) {
    const char* s = tok.c_str();
    char* end = nullptr;
    out = std::strtod(s, &end);
    return end != s && *end == '\0';
}

} // namespace

// ---- ingest ------------------------------------------------------------

PathGrid ingest(std::istream& in, const IngestSpec& spec) {
    using Format = IngestSpec::Format;

    std::vector<double> col0, col1;
    std::string line;
    std::size_t lineno = 0;
    bool saw_data = false;
    std::size_t ncols = 0;

    while (std::getline(in, line)) {
        ++lineno;
        const std::vector<std::string> toks = split_row(line);
        if (toks.empty())
            continue;
        std::vector<double> vals(toks.size());
        bool ok = true;
        for (std::size_t i = 0; i < toks.size(); ++i)
            if (!parse_double(toks[i], vals[i])) {
                ok = false;
                break;
            }
        if (!ok) {
            if (!saw_data)
                continue; // header row
            if (spec.strict)
                throw std::runtime_error("ingest: malformed row at line " +
                                         std::to_string(lineno));
            continue;
        }
        if (!saw_data) {
            saw_data = true;
            ncols = vals.size();
        } else if (vals.size() != ncols) {
            if (spec.strict)
                throw std::runtime_error("ingest: inconsistent column count at line " +
                                         std::to_string(lineno));
            continue;
        }
        col0.push_back(vals[0]);
        if (ncols > 1)
            col1.push_back(vals[1]);
    }

    if (!saw_data)
        throw std::runtime_error("ingest: no numeric rows found");

    Format format = spec.format;
    if (format == Format::Auto)
        format = (ncols >= 2) ? Format::TimeLevel : Format::Levels;
    if (format == Format::TimeLevel && ncols < 2)
        throw std::runtime_error("ingest: two columns required for timestamp,level input");
    if (format == Format::Returns && spec.log_levels)
        throw std::invalid_argument("ingest: log transform is not defined for returns input");

    double delta_n = spec.delta_n;
    std::vector<double> levels;

    switch (format) {
    case Format::Levels:
        levels = col0;
        break;
    case Format::TimeLevel: {
        if (col0.size() < 2)
            throw std::runtime_error("ingest: too few rows");
        std::vector<double> diffs(col0.size() - 1);
        for (std::size_t i = 0; i + 1 < col0.size(); ++i)
            diffs[i] = col0[i + 1] - col0[i];
        std::vector<double> sorted = diffs;
        std::sort(sorted.begin(), sorted.end());
        const double med = sorted[sorted.size() / 2];
        if (!(med > 0.0))
            throw std::runtime_error("ingest: timestamps must be increasing");
        for (std::size_t i = 0; i < diffs.size(); ++i)
            if (std::fabs(diffs[i] - med) > 0.01 * med + 1e-12)
                throw std::runtime_error(
                    "ingest: timestamps not equidistant (row " +
                    std::to_string(i + 2) + ")");
        if (std::isnan(delta_n))
            delta_n = med;
        levels = col1;
        break;
    }
    case Format::Returns: {
        levels.resize(col0.size() + 1);
        levels[0] = 0.0;
        for (std::size_t i = 0; i < col0.size(); ++i)
            levels[i + 1] = levels[i] + col0[i];
        break;
    }
    case Format::Auto:
        break; // unreachable
    }

    if (std::isnan(delta_n) || !(delta_n > 0.0))
        throw std::invalid_argument("ingest: a positive delta_n is required for this input");
    if (levels.size() < 2)
        throw std::runtime_error("ingest: too few rows");

    PathGrid grid;
    grid.delta_n = delta_n;
    grid.values.resize(static_cast<Eigen::Index>(levels.size()));
    for (std::size_t i = 0; i < levels.size(); ++i) {
        double v = levels[i];
        if (spec.log_levels) {
            if (!(v > 0.0))
                throw std::runtime_error("ingest: log transform needs positive levels");
            v = std::log(v);
        }
        if (!std::isfinite(v))
            throw std::runtime_error("ingest: non-finite level in input");
        grid.values[static_cast<Eigen::Index>(i)] = v;
    }
    grid.validate();
    return grid;
}

PathGrid ingest_file(const std::string& path, const IngestSpec& spec) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("ingest: cannot open " + path);
    return ingest(in, spec);
}

// ---- writers -----------------------------------------------------------

void write_path_csv(std::ostream& os, const PathGrid& grid) {
    grid.validate();
    os << "i,x\n";
    for (Eigen::Index i = 0; i < grid.values.size(); ++i)
        os << i << ',' << fmt(grid.values[i]) << '\n';
}

void write_path_csv_file(const std::string& path, const PathGrid& grid) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path + " for writing");
    write_path_csv(os, grid);
}

void write_curve_csv(std::ostream& os, const RLTCurve& curve) {
    const bool with_se = curve.se.size() == curve.u.size() && curve.se.size() > 0;
    os << (with_se ? "u,value,se,lo95,hi95\n" : "u,value\n");
    for (Eigen::Index i = 0; i < curve.u.size(); ++i) {
        os << fmt(curve.u[i]) << ',' << fmt(curve.value[i]);
        if (with_se) {
            os << ',' << fmt(curve.se[i]) << ','
               << fmt(curve.value[i] - kZ975 * curve.se[i]) << ','
               << fmt(curve.value[i] + kZ975 * curve.se[i]);
        }
        os << '\n';
    }
}

void write_curve_csv_file(const std::string& path, const RLTCurve& curve) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path + " for writing");
    write_curve_csv(os, curve);
}

std::string curve_json(const RLTCurve& curve) {
    nlohmann::json j;
    j["u"] = to_json_array(curve.u);
    j["value"] = to_json_array(curve.value);
    if (curve.se.size() == curve.u.size() && curve.se.size() > 0)
        j["se"] = to_json_array(curve.se);
    j["beta"] = curve.beta;
    j["delta_n"] = curve.delta_n;
    j["t_span"] = curve.t_span;
    j["differenced"] = curve.differenced;
    return j.dump(2);
}

std::string hac_json(const HACResult& hac) {
    nlohmann::json j;
    j["kernel"] = hac.kernel == HACKernel::Bartlett ? "bartlett" : "parzen";
    j["lags"] = hac.lags;
    j["n_blocks"] = hac.n_blocks;
    j["u"] = to_json_array(hac.u);
    j["sigma"] = to_json_matrix(hac.sigma);
    return j.dump(2);
}

void write_hac_csv(std::ostream& os, const HACResult& hac) {
    os << "u";
    for (Eigen::Index j = 0; j < hac.u.size(); ++j)
        os << ',' << fmt(hac.u[j]);
    os << '\n';
    for (Eigen::Index i = 0; i < hac.sigma.rows(); ++i) {
        os << fmt(hac.u[i]);
        for (Eigen::Index j = 0; j < hac.sigma.cols(); ++j)
            os << ',' << fmt(hac.sigma(i, j));
        os << '\n';
    }
}

std::string activity_json(const ActivityEstimate& est) {
    nlohmann::json j;
    j["beta_hat"] = est.beta_hat;
    j["beta_stage1"] = est.beta_stage1;
    j["p0"] = est.p0;
    j["p_star"] = est.p_star;
    j["se"] = est.se; // NaN serializes as null
    j["n_boot"] = est.n_boot;
    j["delta_n"] = est.delta_n;
    j["t_span"] = est.t_span;
    return j.dump(2);
}

std::string fit_json(const FitResult& fit) {
    nlohmann::json j;
    j["alpha"] = fit.params.alpha;
    j["c"] = fit.params.c;
    j["lambda"] = fit.params.lambda;
    j["se"] = {{"alpha", fit.se[0]}, {"c", fit.se[1]}, {"lambda", fit.se[2]}};
    j["objective"] = fit.objective;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["u_max"] = fit.kernel.u_max;
    j["n_quad"] = fit.u_grid.size();
    j["t_span"] = fit.t_span;
    j["delta_n"] = fit.delta_n;
    return j.dump(2);
}

void write_fit_curve_csv(std::ostream& os, const RLTCurve& empirical,
                         const FitResult& fit, const HACResult* hac) {
    if (hac) {
        if (hac->u.size() != empirical.u.size())
            throw std::invalid_argument("fit curve: covariance grid does not match the curve");
        for (Eigen::Index i = 0; i < hac->u.size(); ++i)
            if (std::fabs(hac->u[i] - empirical.u[i]) > 1e-9)
                throw std::invalid_argument("fit curve: covariance grid does not match the curve");
    }
    os << (hac ? "u,empirical,fitted,lo95,hi95\n" : "u,empirical,fitted\n");
    for (Eigen::Index i = 0; i < empirical.u.size(); ++i) {
        const double fitted = ts_laplace(empirical.u[i], fit.params);
        os << fmt(empirical.u[i]) << ',' << fmt(empirical.value[i]) << ','
           << fmt(fitted);
        if (hac) {
            const double se =
                std::sqrt(std::max(0.0, hac->sigma(i, i) / hac->n_blocks));
            os << ',' << fmt(empirical.value[i] - kZ975 * se) << ','
               << fmt(empirical.value[i] + kZ975 * se);
        }
        os << '\n';
    }
}

void write_mc_csv(std::ostream& os, const MCSummary& summary) {
    os << "u,true";
    for (const MCColumn& col : summary.columns)
        os << ',' << col.label << "_mean," << col.label << "_sd";
    os << '\n';
    for (Eigen::Index j = 0; j < summary.u_list.size(); ++j) {
        os << fmt(summary.u_list[j]) << ',' << fmt(summary.true_values[j]);
        for (const MCColumn& col : summary.columns)
            os << ',' << fmt(col.mean[j]) << ',' << fmt(col.sd[j]);
        os << '\n';
    }
}

std::string mc_json(const MCSummary& summary, bool per_rep) {
    const MCConfig& c = summary.config;
    nlohmann::json j;
    j["config"] = {
        {"reps", c.reps},
        {"t_days", c.t_days},
        {"per_day", c.per_day},
        {"driver", c.driver == DriverKind::Stable ? "stable" : "tempered_stable"},
        {"beta", c.beta},
        {"ts_c", c.ts_c},
        {"ts_lambda", c.ts_lambda},
        {"cir", {{"kappa", c.cir.kappa},
                 {"theta", c.cir.theta},
                 {"sigma_vol", c.cir.sigma_vol},
                 {"v0", c.cir.v0},
                 {"stationary_init", c.cir.stationary_init}}},
        {"seed", c.seed},
        {"workers", c.workers},
        {"substeps", c.substeps},
        {"activity_p0", c.activity_p0},
        {"activity_k_frac", c.activity_k_frac},
    };
    j["u"] = to_json_array(summary.u_list);
    j["true"] = to_json_array(summary.true_values);
    nlohmann::json cols = nlohmann::json::array();
    for (const MCColumn& col : summary.columns) {
        nlohmann::json cj;
        cj["label"] = col.label;
        cj["mean"] = to_json_array(col.mean);
        cj["sd"] = to_json_array(col.sd);
        cj["n_failed"] = col.n_failed;
        if (col.beta_hats.size() > 0)
            cj["beta_hats"] = to_json_array(col.beta_hats);
        if (per_rep)
            cj["per_rep"] = to_json_matrix(col.per_rep);
        cols.push_back(cj);
    }
    j["columns"] = cols;
    return j.dump(2);
}

// ---- mc config ---------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out;
    if (!parse_double(v, out))
        throw std::runtime_error("mc config: bad number for " + key + ": " + v);
    return out;
}

long to_long(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d))
        throw std::runtime_error("mc config: integer expected for " + key);
    return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes")
        return true;
    if (v == "0" || v == "false" || v == "no")
        return false;
    throw std::runtime_error("mc config: boolean expected for " + key);
}

} // namespace

MCConfig parse_mc_config(std::istream& in) {
    MCConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("mc config: expected key = value at line " +
                                     std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "reps")
            cfg.reps = static_cast<int>(to_long(key, val));
        else if (key == "t_days")
            cfg.t_days = to_double(key, val);
        else if (key == "per_day")
            cfg.per_day = static_cast<int>(to_long(key, val));
        else if (key == "driver") {
            if (val == "stable")
                cfg.driver = DriverKind::Stable;
            else if (val == "ts" || val == "tempered_stable")
                cfg.driver = DriverKind::TemperedStable;
            else
                throw std::runtime_error("mc config: unknown driver " + val);
        } else if (key == "beta")
            cfg.beta = to_double(key, val);
        else if (key == "ts_c")
            cfg.ts_c = to_double(key, val);
        else if (key == "ts_lambda")
            cfg.ts_lambda = to_double(key, val);
        else if (key == "cir_kappa")
            cfg.cir.kappa = to_double(key, val);
        else if (key == "cir_theta")
            cfg.cir.theta = to_double(key, val);
        else if (key == "cir_sigma")
            cfg.cir.sigma_vol = to_double(key, val);
        else if (key == "cir_v0")
            cfg.cir.v0 = to_double(key, val);
        else if (key == "cir_stationary")
            cfg.cir.stationary_init = to_bool(key, val);
        else if (key == "variants") {
            cfg.variants.clear();
            for (const std::string& tok : split_row(val)) {
                if (tok == "known")
                    cfg.variants.push_back(BetaMode::Known);
                else if (tok == "estimated")
                    cfg.variants.push_back(BetaMode::Estimated);
                else if (tok == "fixed2")
                    cfg.variants.push_back(BetaMode::FixedTwo);
                else
                    throw std::runtime_error("mc config: unknown variant " + tok);
            }
        } else if (key == "u_list") {
            const std::vector<std::string> toks = split_row(val);
            cfg.u_list.resize(static_cast<Eigen::Index>(toks.size()));
            for (std::size_t i = 0; i < toks.size(); ++i)
                cfg.u_list[static_cast<Eigen::Index>(i)] = to_double(key, toks[i]);
        } else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(to_long(key, val));
        else if (key == "workers")
            cfg.workers = static_cast<int>(to_long(key, val));
        else if (key == "substeps")
            cfg.substeps = static_cast<int>(to_long(key, val));
        else if (key == "activity_p0")
            cfg.activity_p0 = to_double(key, val);
        else if (key == "activity_k_frac")
            cfg.activity_k_frac = to_double(key, val);
        else
            throw std::runtime_error("mc config: unknown key " + key);
    }
    return cfg;
}

MCConfig parse_mc_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("mc config: cannot open " + path);
    return parse_mc_config(in);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path + " for writing");
    os << content;
    if (!os)
        throw std::runtime_error("failed writing " + path);
}

} // namespace rlt
