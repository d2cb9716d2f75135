#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "finsler/models.hpp"
#include "finsler/report.hpp"

using namespace finsler;

namespace {

int cmd_models() {
    for (const ModelCatalogEntry& e : model_catalog()) {
        std::printf("%-14s %s\n", e.name.c_str(), e.summary.c_str());
        if (!e.default_params.empty()) {
            std::printf("%-14s defaults:", "");
            for (const auto& [k, v] : e.default_params) std::printf(" %s=%g", k.c_str(), v);
            std::printf("\n");
        }
    }
    return 0;
}

int cmd_validate(const std::string& model_name, int samples, std::uint64_t seed) {
    const ModelCatalogEntry& entry = catalog_entry(model_name);
    ModelPtr model = entry.build({});
    const auto pts = sample_regular_points(*model, entry, seed, samples);
    const AxiomReport ax = check_axioms(*model, pts);
    const ReversibilityReport rev = check_reversibility(*model, pts);

    std::printf("model: %s  (%d regular samples, seed %llu)\n", model_name.c_str(), ax.samples,
                static_cast<unsigned long long>(seed));
    std::printf("  homogeneity     %.3e\n", ax.max_homogeneity);
    std::printf("  euler grad      %.3e\n", ax.max_euler_grad);
    std::printf("  euler metric    %.3e\n", ax.max_euler_metric);
    std::printf("  euler value     %.3e\n", ax.max_euler_value);
    std::printf("  g symmetry      %.3e\n", ax.max_g_asymmetry);
    std::printf("  cartan contr.   %.3e\n", ax.max_cartan_contraction);
    std::printf("  signature       %s\n", ax.signature_ok ? "(-,+,..,+) everywhere" : "VIOLATED");
    std::printf("  reversible      %s (max deviation %.3e, %d reversed samples outside domain)\n",
                rev.reversible ? "yes" : "no", rev.max_deviation, rev.skipped_singular);

    const double tol = default_tolerances().abs_tol + default_tolerances().rel_tol;
    const bool ok = ax.signature_ok && ax.worst() <= tol;
    std::printf("%s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed,
            const std::vector<std::string>& tol_overrides) {
    ScenarioConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    for (const std::string& kv : tol_overrides) {
        const auto pos = kv.find('=');
        if (pos == std::string::npos)
            throw BadParameter("--tol expects KEY=VALUE, got '" + kv + "'");
        const std::string key = kv.substr(0, pos);
        const double value = std::stod(kv.substr(pos + 1));
        if (value <= 0.0) throw BadParameter("tolerance '" + key + "' must be positive");
        if (key == "abs_tol") cfg.tolerances.abs_tol = value;
        else if (key == "rel_tol") cfg.tolerances.rel_tol = value;
        else if (key == "margin_floor") cfg.tolerances.margin_floor = value;
        else if (key == "degeneracy_factor") cfg.tolerances.degeneracy_factor = value;
        else if (key == "lightlike_band") cfg.tolerances.lightlike_band = value;
        else if (key == "energy_tol") cfg.tolerances.energy_tol = value;
        else if (key == "residual_tol") cfg.tolerances.residual_tol = value;
        else throw BadParameter("unknown tolerance key '" + key + "'");
    }

    const RunReport rep = run(cfg);
    const auto files = emit(rep, cfg, cfg.out_dir, "csv-bundle");

    for (const auto& a : rep.document["analyses"]) {
        const std::string name = a["analysis"].get<std::string>();
        const std::string status = a["status"].get<std::string>();
        if (status == "ok")
            std::printf("%-10s ok\n", name.c_str());
        else
            std::printf("%-10s ERROR: %s\n", name.c_str(), a["error"].get<std::string>().c_str());
    }
    std::printf("wrote %zu files to %s (%.2f s)\n", files.size(), cfg.out_dir.c_str(),
                rep.wall_seconds);
    return rep.any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finsler-fermat: causal geodesics, arrival-time variations and Morse data for "
                 "time oriented Finsler spacetimes"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run a scenario config");
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> tol_overrides;
    run_cmd->add_option("config", config_path, "scenario config JSON")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default: from config)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = run_cmd->add_option("--seed", seed_value, "override the RNG seed");
    run_cmd->add_option("--tol", tol_overrides, "tolerance override KEY=VALUE (repeatable)");

    auto* val_cmd = app.add_subcommand("validate", "axiom suite on a catalog model");
    std::string model_name;
    int samples = 200;
    std::uint64_t val_seed = 1;
    val_cmd->add_option("model", model_name, "catalog model name")->required();
    val_cmd->add_option("--samples", samples, "number of regular sample points");
    val_cmd->add_option("--seed", val_seed, "sampling seed");

    auto* models_cmd = app.add_subcommand("models", "list the model catalog");

    CLI11_PARSE(app, argc, argv);

    try {
        if (models_cmd->parsed()) return cmd_models();
        if (val_cmd->parsed()) return cmd_validate(model_name, samples, val_seed);
        if (run_cmd->parsed()) {
            if (seed_opt->count()) seed = seed_value;
            return cmd_run(config_path, out_dir, seed, tol_overrides);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
