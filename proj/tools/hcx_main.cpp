#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "hcx/hcx.hpp"

namespace {

struct Overrides {
    std::string out;
    int order = -1;
    double h = 0.0;
    int threads = 1;
    double tol = 0.0;
};

hcx::Scenario load_scenario(const std::string& path, const Overrides& ov) {
    hcx::Scenario sc = hcx::parse_scenario_file(path);
    if (!ov.out.empty())
        sc.output_dir = ov.out;
    if (ov.order >= 0)
        sc.order = ov.order;
    if (ov.h > 0.0)
        sc.h = ov.h;
    if (ov.tol > 0.0)
        sc.tol = ov.tol;
    return sc;
}

int run_command(const std::string& path, const Overrides& ov) {
    const hcx::Scenario sc = load_scenario(path, ov);
    std::filesystem::create_directories(sc.output_dir);
    const hcx::StudyResult result = hcx::run_study(sc, ov.threads);
    hcx::emit_csv(result.rows, sc.output_dir + "/study.csv");
    hcx::emit_summary(result.summary, sc.output_dir + "/summary.txt");
    std::printf("study: %zu rows -> %s/study.csv\n", result.rows.size(), sc.output_dir.c_str());
    std::printf("c_hat %.6g, error floor %.3e, expansion %.1f ms, direct sweep %.1f ms\n",
                result.summary.c_hat, result.summary.error_floor,
                result.summary.expansion_build_ms, result.summary.direct_sweep_ms);
    if (!result.summary.failures.empty()) {
        for (const auto& f : result.summary.failures)
            std::fprintf(stderr, "row failed: %s\n", f.c_str());
        return 2;
    }
    return 0;
}

int mesh_command(const std::string& path, const Overrides& ov) {
    const hcx::Scenario sc = load_scenario(path, ov);
    std::filesystem::create_directories(sc.output_dir);
    const hcx::Mesh mesh = hcx::build_mesh(sc);
    hcx::save_mesh_file(mesh, sc.output_dir + "/mesh.txt");
    std::printf("mesh: %zu vertices, %zu triangles, %d inclusions, min angle %.2f deg -> %s/mesh.txt\n",
                mesh.vertices.size(), mesh.triangles.size(), mesh.num_inclusions(),
                mesh.min_angle_deg(), sc.output_dir.c_str());
    return 0;
}

int expand_command(const std::string& path, const Overrides& ov) {
    const hcx::Scenario sc = load_scenario(path, ov);
    std::filesystem::create_directories(sc.output_dir);
    const hcx::FemSystem fem(hcx::build_mesh(sc));
    hcx::Expansion e;
    switch (sc.mode) {
    case hcx::ExpansionMode::High: {
        hcx::HighContrastExpander expander(fem, ov.threads, sc.tol);
        e = expander.expand(sc.data, sc.order, sc.name);
        std::ofstream out(sc.output_dir + "/a_geom.csv");
        out << hcx::a_geom_csv(expander.basis());
        break;
    }
    case hcx::ExpansionMode::Low:
        e = hcx::expand_low(fem, sc.data, sc.order, ov.threads, sc.name, sc.tol);
        break;
    case hcx::ExpansionMode::Mixed:
        e = hcx::expand_mixed(fem, sc.mixed_roles(), sc.data, sc.order, ov.threads, sc.name, sc.tol);
        break;
    }
    hcx::save_mesh_file(fem.mesh(), sc.output_dir + "/mesh.txt");
    hcx::save_expansion(e, sc.output_dir + "/expansion");
    std::printf("expansion: terms u_%d..u_%d, max compatibility defect %.3e -> %s/expansion\n",
                e.first_index, e.order(), e.max_compatibility_defect, sc.output_dir.c_str());
    return 0;
}

int check_command(const std::string& path, const Overrides& ov) {
    const hcx::Scenario sc = load_scenario(path, ov);
    const auto items = hcx::run_invariant_checks(sc, ov.threads);
    bool all_ok = true;
    for (const auto& item : items) {
        std::printf("[%s] %-36s  value %.3e  limit %.3e\n", item.pass ? "PASS" : "FAIL",
                    item.name.c_str(), item.value, item.limit);
        all_ok = all_ok && item.pass;
    }
    return all_ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"asymptotic expansions for elliptic problems in binary high-contrast media"};
    app.require_subcommand(1);

    Overrides ov;
    std::string scenario_path;
    app.set_help_flag("--help", "print usage");
    auto add_common = [&](CLI::App* cmd) {
        cmd->set_help_flag("--help", "print usage");
        cmd->add_option("scenario", scenario_path, "scenario file")->required();
        cmd->add_option("--out", ov.out, "output directory (overrides the scenario)");
        cmd->add_option("--order", ov.order, "expansion order I");
        cmd->add_option("--h", ov.h, "mesh spacing");
        cmd->add_option("--threads", ov.threads, "worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--tol", ov.tol, "linear solver tolerance");
    };
    CLI::App* run = app.add_subcommand("run", "full contrast/order study with CSV report");
    CLI::App* mesh = app.add_subcommand("mesh", "generate and store the scenario mesh");
    CLI::App* expand = app.add_subcommand("expand", "compute and serialize the expansion terms");
    CLI::App* check = app.add_subcommand("check", "run the invariant suite");
    for (CLI::App* cmd : {run, mesh, expand, check})
        add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(scenario_path, ov);
        if (mesh->parsed())
            return mesh_command(scenario_path, ov);
        if (expand->parsed())
            return expand_command(scenario_path, ov);
        if (check->parsed())
            return check_command(scenario_path, ov);
    } catch (const hcx::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const hcx::NotImplemented& e) {
        std::fprintf(stderr, "not implemented: %s\n", e.what());
        return 1;
    } catch (const hcx::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 1;
    } catch (const hcx::InclusionOverlap& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 1;
    } catch (const hcx::DegenerateGeometry& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 1;
    } catch (const hcx::InvalidTopology& e) {
        std::fprintf(stderr, "mesh error: %s\n", e.what());
        return 1;
    } catch (const hcx::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 1;
    } catch (const hcx::IncompatibleData& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 3;
    } catch (const hcx::Error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 2;
    }
    return 0;
}
