#pragma once

#include <optional>

#include "json.hpp"

#include "finsler/fermat.hpp"

// Scenario-driven front end: config ingestion, run orchestration, and
// JSON/CSV emission. Reports are byte-stable for a fixed config and seed, so
// wall-clock timing lives in the console summary, never in the emitted JSON.

namespace finsler {

struct ObserverSpec {
    std::string type = "static";    // "static" | "polynomial"
    Vec spatial;                    // static family: fixed spatial point
    std::vector<Vec> coeffs;        // polynomial family: pos(t) = sum coeffs[k] t^k
    double t0 = 0.0;
    double t1 = 10.0;
};

struct ScenarioConfig {
    std::string model = "minkowski";
    std::map<std::string, double> params;
    Vec q;                           // defaults to the chart origin
    ObserverSpec observer;
    double c = 0.0;
    std::optional<Vec> time_orientation;
    Tolerances tolerances;
    std::vector<std::string> analyses{"validate"};
    std::uint64_t seed = 1;
    Vec guess;                       // shooting direction; aimed automatically when empty
    Vec y0;                          // geodesic scenario initial velocity
    double span = 1.0;
    int validate_samples = 200;
    int generators = 10;
    std::string out_dir = ".";
};

ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);

struct RunReport {
    nlohmann::ordered_json document;  // the emitted report body
    bool any_failed = false;
    double wall_seconds = 0.0;        // console metadata, not emitted
    // Plot data captured for the CSV bundle.
    std::vector<std::array<double, 2>> tau_sweep;        // (eps, tau)
    std::vector<std::array<double, 2>> jacobi_det;       // (s, det)
    std::vector<ConjugatePoint> conjugate_markers;
    std::shared_ptr<const GeodesicPath> geodesic_path;
    ModelPtr model;
};

RunReport run(const ScenarioConfig& cfg);

// Writes report.json plus the CSV bundle; returns the file names written.
std::vector<std::string> emit(const RunReport& report, const ScenarioConfig& cfg,
                              const std::string& out_dir, const std::string& format = "json");

nlohmann::ordered_json fermat_report_to_json(const FermatReport& r);

// Structural check against the shipped report schema.
bool validate_report_json(const nlohmann::json& j, std::string* why = nullptr);

std::string toolkit_version();

}  // namespace finsler
