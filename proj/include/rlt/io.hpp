#pragma once

#include <iosfwd>
#include <limits>
#include <string>

#include "rlt/activity.hpp"
#include "rlt/levy_sim.hpp"
#include "rlt/mc.hpp"
#include "rlt/md_fit.hpp"
#include "rlt/path_grid.hpp"
#include "rlt/rlt_core.hpp"

namespace rlt {

/// How to turn a text table into a PathGrid.
///  - Levels: one numeric column of levels.
///  - TimeLevel: two columns (timestamp, level); timestamps must be
///    equidistant within 1% of their median spacing.  delta_n overrides the
///    derived spacing when set (the timestamps then only gate equidistance).
///  - Returns: one column of increments, cumulated from zero; delta_n
///    required.
///  - Auto: header row is skipped if present, then column count decides
///    between Levels and TimeLevel.
/// log_levels replaces levels by their logs (levels must be positive);
/// not meaningful for Returns.  strict = false skips malformed rows
/// instead of throwing.
struct IngestSpec {
    enum class Format { Auto, Levels, TimeLevel, Returns };
    Format format = Format::Auto;
    double delta_n = std::numeric_limits<double>::quiet_NaN();
    bool log_levels = false;
    bool strict = true;
};

PathGrid ingest(std::istream& in, const IngestSpec& spec);
PathGrid ingest_file(const std::string& path, const IngestSpec& spec);

/// Path serialization: header "i,x", one row per level, full precision
/// (round-trips bit-exactly through ingest).
void write_path_csv(std::ostream& os, const PathGrid& grid);
void write_path_csv_file(const std::string& path, const PathGrid& grid);

/// Curve serialization: "u,value" plus se / 95% band columns when the
/// curve carries standard errors.
void write_curve_csv(std::ostream& os, const RLTCurve& curve);
void write_curve_csv_file(const std::string& path, const RLTCurve& curve);
std::string curve_json(const RLTCurve& curve);

/// Covariance serialization: JSON with the grid and the full matrix, or a
/// CSV matrix with a u header row.
std::string hac_json(const HACResult& hac);
void write_hac_csv(std::ostream& os, const HACResult& hac);

std::string activity_json(const ActivityEstimate& est);

/// Fit serialization: JSON with parameters, standard errors and fit
/// diagnostics; the curve CSV holds u, empirical, fitted and a 95% band
/// from the covariance diagonal when one is supplied.
std::string fit_json(const FitResult& fit);
void write_fit_curve_csv(std::ostream& os, const RLTCurve& empirical,
                         const FitResult& fit, const HACResult* hac);

/// Monte Carlo table: one row per u with the true value and mean/std per
/// estimator variant.
void write_mc_csv(std::ostream& os, const MCSummary& summary);
std::string mc_json(const MCSummary& summary, bool per_rep);

/// Flat key = value config for the Monte Carlo harness; '#' starts a
/// comment.  Unknown keys raise std::runtime_error, as do malformed values.
MCConfig parse_mc_config(std::istream& in);
MCConfig parse_mc_config_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

} // namespace rlt
