#include "finsler/report.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "finsler/models.hpp"

namespace finsler {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

Vec json_to_vec(const njson& j, const char* field) {
    if (!j.is_array()) throw ParseError(std::string("config field '") + field + "' must be an array");
    Vec v;
    for (const auto& e : j) {
        if (!e.is_number()) throw ParseError(std::string("config field '") + field + "' must hold numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

ojson vec_to_json(const Vec& v) {
    ojson a = ojson::array();
    for (double x : v) a.push_back(x);
    return a;
}

Observer make_observer(const ScenarioConfig& cfg) {
    if (cfg.observer.type == "static")
        return Observer::static_worldline(cfg.observer.spatial, cfg.observer.t0, cfg.observer.t1);
    if (cfg.observer.type == "polynomial")
        return Observer::polynomial(cfg.observer.coeffs, cfg.observer.t0, cfg.observer.t1);
    throw BadParameter("observer type must be 'static' or 'polynomial'");
}

std::string observer_description(const ScenarioConfig& cfg) {
    std::string d = cfg.observer.type + " worldline";
    if (cfg.observer.type == "static") {
        d += " at (";
        for (std::size_t i = 0; i < cfg.observer.spatial.size(); ++i) {
            if (i) d += ", ";
            d += std::to_string(cfg.observer.spatial[i]);
        }
        d += ")";
    }
    return d;
}

TimeOrientation make_orientation(const ScenarioConfig& cfg, const LagrangianModel& model) {
    if (cfg.time_orientation) return TimeOrientation::constant(*cfg.time_orientation);
    return TimeOrientation::model_default(model);
}

Vec default_guess(const ScenarioConfig& cfg, const Observer& obs) {
    const double tm = 0.5 * (obs.t_min() + obs.t_max());
    Vec g = sub(obs.position(tm), cfg.q);
    if (norm(g) == 0.0) g[0] = 1.0;
    return g;
}

void csv_write(std::ostream& os, std::initializer_list<double> row) {
    char buf[64];
    bool first = true;
    for (double v : row) {
        if (!first) os << ',';
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
        first = false;
    }
    os << '\n';
}

}  // namespace

// Model-aware observer spatial default, defined near emit().
Vec spatial_default(const ScenarioConfig& cfg, int n);

std::string toolkit_version() { return "finsler-fermat 0.1.0"; }

ScenarioConfig parse_config(const njson& j) {
    ScenarioConfig cfg;
    if (!j.is_object()) throw ParseError("config root must be a JSON object");

    static const std::vector<std::string> known{
        "model", "params", "q", "observer", "c", "time_orientation", "tolerances",
        "analyses", "seed", "guess", "y0", "span", "validate_samples", "generators", "out"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ParseError("unknown config field '" + key + "'");
    }

    if (j.contains("model")) {
        if (!j["model"].is_string()) throw ParseError("config field 'model' must be a string");
        cfg.model = j["model"].get<std::string>();
    }
    catalog_entry(cfg.model);  // UnknownModel on a bad name

    if (j.contains("params")) {
        if (!j["params"].is_object()) throw ParseError("config field 'params' must be an object");
        for (const auto& [k, v] : j["params"].items()) {
            if (!v.is_number()) throw BadParameter("parameter '" + k + "' must be a number");
            cfg.params[k] = v.get<double>();
        }
    }

    // Build once to validate the parameter set and learn the dimension.
    ModelPtr model = build_catalog_model(cfg.model, cfg.params);
    const int n = model->dimension();

    cfg.q.assign(static_cast<std::size_t>(n), 0.0);
    if (cfg.model == "schwarzschild" || cfg.model == "rutz") cfg.q = {0.0, 10.0, 1.5707963267948966, 0.0};
    if (cfg.model == "product_r_s2") cfg.q = {0.0, 1.5707963267948966, 0.0};
    if (j.contains("q")) {
        cfg.q = json_to_vec(j["q"], "q");
        if (static_cast<int>(cfg.q.size()) != n)
            throw BadParameter("config field 'q' has the wrong dimension");
    }

    // Observer defaults: static worldline offset along the first spatial axis.
    cfg.observer.spatial = spatial_default(cfg, n);
    if (j.contains("observer")) {
        const njson& o = j["observer"];
        if (!o.is_object()) throw ParseError("config field 'observer' must be an object");
        if (o.contains("type")) cfg.observer.type = o["type"].get<std::string>();
        if (o.contains("position")) cfg.observer.spatial = json_to_vec(o["position"], "observer.position");
        if (o.contains("coeffs")) {
            cfg.observer.coeffs.clear();
            for (const auto& c : o["coeffs"]) cfg.observer.coeffs.push_back(json_to_vec(c, "observer.coeffs"));
        }
        if (o.contains("interval")) {
            const Vec iv = json_to_vec(o["interval"], "observer.interval");
            if (iv.size() != 2) throw BadParameter("observer.interval must be [t0, t1]");
            cfg.observer.t0 = iv[0];
            cfg.observer.t1 = iv[1];
        }
    }

    if (j.contains("c")) cfg.c = j["c"].get<double>();
    if (cfg.c < 0.0) throw BadParameter("energy parameter c must be nonnegative");
    if (j.contains("time_orientation")) cfg.time_orientation = json_to_vec(j["time_orientation"], "time_orientation");
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("guess")) cfg.guess = json_to_vec(j["guess"], "guess");
    if (j.contains("y0")) cfg.y0 = json_to_vec(j["y0"], "y0");
    if (j.contains("span")) cfg.span = j["span"].get<double>();
    if (j.contains("validate_samples")) cfg.validate_samples = j["validate_samples"].get<int>();
    if (j.contains("generators")) cfg.generators = j["generators"].get<int>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();

    if (j.contains("tolerances")) {
        const njson& t = j["tolerances"];
        auto grab = [&](const char* key, double& slot) {
            if (t.contains(key)) {
                slot = t[key].get<double>();
                if (slot <= 0.0) throw BadParameter(std::string("tolerance '") + key + "' must be positive");
            }
        };
        grab("abs_tol", cfg.tolerances.abs_tol);
        grab("rel_tol", cfg.tolerances.rel_tol);
        grab("margin_floor", cfg.tolerances.margin_floor);
        grab("degeneracy_factor", cfg.tolerances.degeneracy_factor);
        grab("lightlike_band", cfg.tolerances.lightlike_band);
        grab("energy_tol", cfg.tolerances.energy_tol);
        grab("residual_tol", cfg.tolerances.residual_tol);
    }

    if (j.contains("analyses")) {
        cfg.analyses.clear();
        for (const auto& a : j["analyses"]) {
            const std::string name = a.get<std::string>();
            static const std::vector<std::string> kinds{"classify", "geodesic", "fermat",
                                                        "jacobi", "index", "validate"};
            if (std::find(kinds.begin(), kinds.end(), name) == kinds.end())
                throw BadParameter("unknown analysis '" + name + "'");
            cfg.analyses.push_back(name);
        }
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    njson j;
    try {
        j = njson::parse(in);
    } catch (const njson::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

ojson fermat_report_to_json(const FermatReport& r) {
    ojson j;
    j["model"] = r.model_name;
    ojson params = ojson::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    j["params"] = params;
    j["q"] = vec_to_json(r.q);
    j["observer"] = r.observer_desc;
    j["c"] = r.c;
    j["tau"] = r.tau;
    j["first_variation_residual"] = r.first_variation_residual;
    ojson conj = ojson::array();
    for (const ConjugatePoint& cp : r.conjugate_points) {
        ojson e;
        e["s"] = cp.s;
        e["mult"] = cp.multiplicity;
        conj.push_back(e);
    }
    j["conjugate_points"] = conj;
    j["morse_index"] = r.morse_index;
    j["character"] = to_string(r.character);
    ojson sv = ojson::array();
    for (const SecondVariationSample& s : r.second_variation) {
        ojson e;
        e["gap"] = s.relative_gap;
        sv.push_back(e);
    }
    j["second_variation"] = sv;
    return j;
}

bool validate_report_json(const njson& j, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (!j.is_object()) return fail("report must be an object");
    for (const char* key : {"config", "version", "analyses"})
        if (!j.contains(key)) return fail(std::string("missing top-level field '") + key + "'");
    if (!j["analyses"].is_array()) return fail("'analyses' must be an array");
    for (const auto& a : j["analyses"]) {
        if (!a.is_object() || !a.contains("analysis")) return fail("analysis entries need a name");
        if (!a.contains("status")) return fail("analysis entries need a status");
        const std::string status = a["status"].get<std::string>();
        if (status != "ok" && status != "error") return fail("status must be ok or error");
        if (status == "ok" && a["analysis"] == "fermat") {
            const auto& f = a["result"];
            for (const char* key : {"model", "params", "q", "observer", "c", "tau",
                                    "first_variation_residual", "conjugate_points", "morse_index",
                                    "character", "second_variation"})
                if (!f.contains(key)) return fail(std::string("fermat result missing '") + key + "'");
            for (const auto& cp : f["conjugate_points"])
                if (!cp.contains("s") || !cp.contains("mult")) return fail("conjugate point entries need s and mult");
            for (const auto& sv : f["second_variation"])
                if (!sv.contains("gap")) return fail("second variation entries need gap");
        }
    }
    return true;
}

RunReport run(const ScenarioConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();

    RunReport rep;
    rep.model = build_catalog_model(cfg.model, cfg.params);
    const LagrangianModel& model = *rep.model;
    const TimeOrientation T = make_orientation(cfg, model);
    const Observer obs = make_observer(cfg);

    ojson doc;
    {
        ojson cj;
        cj["model"] = cfg.model;
        ojson pj = ojson::object();
        for (const auto& [k, v] : cfg.params) pj[k] = v;
        cj["params"] = pj;
        cj["q"] = vec_to_json(cfg.q);
        ojson oj;
        oj["type"] = cfg.observer.type;
        oj["position"] = vec_to_json(cfg.observer.spatial);
        oj["interval"] = ojson::array({cfg.observer.t0, cfg.observer.t1});
        cj["observer"] = oj;
        cj["c"] = cfg.c;
        cj["seed"] = cfg.seed;
        ojson aj = ojson::array();
        for (const std::string& a : cfg.analyses) aj.push_back(a);
        cj["analyses"] = aj;
        doc["config"] = cj;
    }
    doc["version"] = toolkit_version();
    doc["analyses"] = ojson::array();

    // Dependency order regardless of config order.
    static const std::vector<std::string> order{"validate", "classify", "geodesic",
                                                "fermat", "jacobi", "index"};
    std::vector<std::string> todo;
    for (const std::string& name : order)
        if (std::find(cfg.analyses.begin(), cfg.analyses.end(), name) != cfg.analyses.end())
            todo.push_back(name);

    const Vec guess = cfg.guess.empty() ? default_guess(cfg, obs) : cfg.guess;
    std::optional<AdmissibleCurve> shot;
    std::optional<CurveFrame> frame;

    auto get_shot = [&]() -> const AdmissibleCurve& {
        if (!shot) shot = shoot(model, cfg.q, obs, cfg.c, T, guess, {}, cfg.tolerances);
        return *shot;
    };
    auto get_frame = [&]() -> const CurveFrame& {
        if (!frame) frame = frame_for(model, get_shot(), 129, cfg.tolerances);
        return *frame;
    };

    for (const std::string& name : todo) {
        ojson entry;
        entry["analysis"] = name;
        try {
            if (name == "validate") {
                const auto& catalog = catalog_entry(cfg.model);
                const auto samples = sample_regular_points(model, catalog, cfg.seed, cfg.validate_samples);
                const AxiomReport ax = check_axioms(model, samples, cfg.tolerances);
                const ReversibilityReport rev = check_reversibility(model, samples, cfg.tolerances);
                ojson r;
                r["samples"] = ax.samples;
                r["max_homogeneity"] = ax.max_homogeneity;
                r["max_euler_grad"] = ax.max_euler_grad;
                r["max_euler_metric"] = ax.max_euler_metric;
                r["max_euler_value"] = ax.max_euler_value;
                r["max_g_asymmetry"] = ax.max_g_asymmetry;
                r["max_cartan_contraction"] = ax.max_cartan_contraction;
                r["signature_ok"] = ax.signature_ok;
                r["reversible"] = rev.reversible;
                r["max_reversal_deviation"] = rev.max_deviation;
                entry["status"] = "ok";
                entry["result"] = r;
                if (ax.worst() > cfg.tolerances.abs_tol + cfg.tolerances.rel_tol || !ax.signature_ok) {
                    entry["status"] = "error";
                    entry["error"] = "axiom violations above tolerance";
                    rep.any_failed = true;
                }
            } else if (name == "classify") {
                const Vec y = cfg.y0.empty() ? guess : cfg.y0;
                const CausalClass cls = classify(model, {cfg.q, y}, cfg.tolerances.lightlike_band,
                                                 cfg.tolerances.margin_floor);
                ojson r;
                r["class"] = to_string(cls);
                r["future_pointed"] =
                    cls != CausalClass::singular && is_future_pointed(model, {cfg.q, y}, T, cfg.tolerances);
                entry["status"] = "ok";
                entry["result"] = r;
            } else if (name == "geodesic") {
                GeodesicIVP ivp;
                ivp.x0 = cfg.q;
                ivp.y0 = cfg.y0.empty() ? guess : cfg.y0;
                ivp.s1 = cfg.span;
                IntegratorOptions iopts;
                iopts.energy_tol = cfg.tolerances.energy_tol;
                const GeodesicPath path = integrate(model, ivp, iopts, cfg.tolerances);
                rep.geodesic_path = std::make_shared<GeodesicPath>(path);
                ojson r;
                r["energy_level"] = path.energy_level();
                r["energy_drift"] = path.energy_drift();
                r["steps"] = path.stats().steps;
                r["rejected_steps"] = path.stats().rejected;
                r["endpoint"] = vec_to_json(path.position(path.s_end()));
                entry["status"] = "ok";
                entry["result"] = r;
            } else if (name == "fermat") {
                const AdmissibleCurve& curve = get_shot();
                if (!rep.geodesic_path) rep.geodesic_path = curve.geodesic;
                const CurveFrame& fr = get_frame();

                FermatReport fres;
                fres.model_name = cfg.model;
                fres.params = model.params();
                fres.q = cfg.q;
                fres.observer_desc = observer_description(cfg);
                fres.c = cfg.c;
                fres.tau = curve.tau;

                const FirstVariationReport fv =
                    first_variation_tau(model, curve, obs, T, cfg.generators, cfg.seed, {}, cfg.tolerances);
                fres.first_variation_residual = fv.max_abs_derivative;

                const ConjugateSearch cs = find_conjugate_points(model, curve, fr, cfg.tolerances);
                fres.conjugate_points = cs.points;
                fres.character = classify_critical_point(cs);
                try {
                    fres.morse_index = morse_index(cs);
                } catch (const EndpointConjugate&) {
                    fres.morse_index = 0;
                    for (const ConjugatePoint& cp : cs.points)
                        if (cp.s < 1.0 - 1e-6) fres.morse_index += cp.multiplicity;
                }

                // Second-variation probes along directions transverse to the
                // spatial motion (parallel fields are degenerate for null rays).
                const int nsp = model.dimension() - 1;
                Vec vmid = curve.velocity(0.5);
                Vec vsp(vmid.begin() + 1, vmid.end());
                const double vsp2 = std::max(dot(vsp, vsp), 1e-300);
                std::vector<Vec> probe_dirs;
                for (int d = 0; d < nsp; ++d) {
                    Vec u(static_cast<std::size_t>(nsp), 0.0);
                    u[static_cast<std::size_t>(d)] = 1.0;
                    axpy(-dot(u, vsp) / vsp2, vsp, u);
                    if (norm(u) > 0.3) probe_dirs.push_back(scaled(u, 1.0 / norm(u)));
                }
                if (probe_dirs.empty()) {
                    Vec u(static_cast<std::size_t>(nsp), 0.0);
                    u[0] = 1.0;
                    probe_dirs.push_back(std::move(u));
                }
                for (int mode = 1; mode <= 3; ++mode) {
                    const Vec dir = probe_dirs[static_cast<std::size_t>((mode - 1) % probe_dirs.size())];
                    auto a = [mode, dir](double s) {
                        return scaled(dir, std::sin(mode * 3.14159265358979323846 * s));
                    };
                    auto da = [mode, dir](double s) {
                        return scaled(dir, mode * 3.14159265358979323846 *
                                               std::cos(mode * 3.14159265358979323846 * s));
                    };
                    const VariationField A = make_transverse_field(model, curve, a, da);
                    fres.second_variation.push_back(
                        second_variation_check(model, curve, obs, T, fr, A, {}, cfg.tolerances));
                }

                rep.conjugate_markers = cs.points;
                rep.jacobi_det.clear();
                for (std::size_t k = 0; k < cs.s_samples.size(); k += 8)
                    rep.jacobi_det.push_back({cs.s_samples[k], cs.det_samples[k]});

                // Arrival sweep for plotting: first seeded generator.
                const auto gens = variation_generators(model.dimension(), 1, cfg.seed);
                AllowedVariationFamily fam(model, curve, obs, T, gens[0].first, gens[0].second,
                                           {}, cfg.tolerances);
                rep.tau_sweep.clear();
                for (int k = -5; k <= 5; ++k) {
                    const double eps = 0.02 * k;
                    rep.tau_sweep.push_back({eps, fam.tau(eps)});
                }

                entry["status"] = "ok";
                entry["result"] = fermat_report_to_json(fres);
            } else if (name == "jacobi") {
                const CurveFrame& fr = get_frame();
                const int n = model.dimension();
                Vec dy0(static_cast<std::size_t>(n), 0.0);
                dy0[static_cast<std::size_t>(n - 1)] = 1.0;
                const JacobiField Y = jacobi_integrate(fr, Vec(static_cast<std::size_t>(n), 0.0), dy0);
                ojson r;
                r["max_residual"] = Y.max_residual;
                r["terminal_norm"] = norm(Y.y.back());
                entry["status"] = "ok";
                entry["result"] = r;
            } else if (name == "index") {
                const AdmissibleCurve& curve = get_shot();
                const CurveFrame& fr = get_frame();
                const ConjugateSearch cs = find_conjugate_points(model, curve, fr, cfg.tolerances);
                ojson r;
                int idx = 0;
                for (const ConjugatePoint& cp : cs.points)
                    if (cp.s < 1.0 - 1e-6) idx += cp.multiplicity;
                r["morse_index"] = idx;
                r["character"] = to_string(classify_critical_point(cs));
                entry["status"] = "ok";
                entry["result"] = r;
            }
        } catch (const Error& e) {
            entry["status"] = "error";
            entry["error"] = e.what();
            rep.any_failed = true;
        }
        doc["analyses"].push_back(entry);
    }

    rep.document = std::move(doc);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

std::vector<std::string> emit(const RunReport& report, const ScenarioConfig& cfg,
                              const std::string& out_dir, const std::string& format) {
    std::vector<std::string> written;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    auto open = [&](const std::string& name) {
        const std::string path = out_dir + "/" + name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw IoError("cannot write '" + path + "'");
        written.push_back(path);
        return os;
    };

    {
        std::ofstream os = open("report.json");
        os << report.document.dump(2) << '\n';
    }

    if (format == "csv-bundle" || format == "csv") {
        if (report.geodesic_path && report.model) {
            std::ofstream os = open("path.csv");
            export_csv(*report.model, *report.geodesic_path, os, 201);
        }
        {
            std::ofstream os = open("jacobi_det.csv");
            os << "s,det\n";
            for (const auto& row : report.jacobi_det) csv_write(os, {row[0], row[1]});
        }
        {
            std::ofstream os = open("conjugate_points.csv");
            os << "s,mult\n";
            for (const ConjugatePoint& cp : report.conjugate_markers)
                csv_write(os, {cp.s, double(cp.multiplicity)});
        }
        {
            std::ofstream os = open("tau_sweep.csv");
            os << "eps,tau\n";
            for (const auto& row : report.tau_sweep) csv_write(os, {row[0], row[1]});
        }
    }
    (void)cfg;
    return written;
}

// Model-aware observer spatial defaults.
Vec spatial_default(const ScenarioConfig& cfg, int n) {
    if (cfg.model == "schwarzschild" || cfg.model == "rutz")
        return {10.0, 1.5707963267948966, 1.5707963267948966};
    if (cfg.model == "product_r_s2") return {1.5707963267948966, 1.0};
    Vec sp(static_cast<std::size_t>(n - 1), 0.0);
    sp[0] = 1.0;
    return sp;
}

}  // namespace finsler
