#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hcx/expansion_high.hpp"
#include "hcx/expansion_low.hpp"
#include "hcx/expansion_mixed.hpp"
#include "hcx/parallel.hpp"
#include "hcx/reference.hpp"
#include "hcx/scenario.hpp"

namespace hcx {

struct StudyRow {
    double contrast = 0.0; // eta, or epsilon in low mode
    int order = 0;         // truncation order I of the partial sum
    double h1_error = 0.0;
    double l2_error = 0.0;
    double ratio = std::numeric_limits<double>::quiet_NaN(); // h1_error(I) / h1_error(I-1)
    double u_norm = 0.0;                                     // H1 norm of the direct solution
    double runtime_ms = 0.0;
};

struct StudySummary {
    std::string scenario_id;
    std::string mesh_id;
    int nodes = 0;
    int triangles = 0;
    int inclusions = 0;
    double c_hat = std::numeric_limits<double>::quiet_NaN();
    double error_floor = 0.0;
    double max_compatibility_defect = 0.0;
    double expansion_build_ms = 0.0;
    double direct_sweep_ms = 0.0;
    bool timing_ok = true;
    std::vector<std::string> failures;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    StudySummary summary;
    Expansion expansion;
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

using StudyClock = std::chrono::steady_clock;

inline double ms_since(StudyClock::time_point t0) {
    return std::chrono::duration<double, std::milli>(StudyClock::now() - t0).count();
}

} // namespace detail

/// Empirical convergence constant: exp of the median of log of the per-step
/// error-reduction ratios, rescaled by the contrast, over the rows that sit
/// above ten times the error floor (the floor is the error at the largest
/// contrast and order, where adding terms no longer helps).
inline double estimate_c_hat(const std::vector<StudyRow>& rows, ExpansionMode mode,
                             double error_floor) {
    std::vector<double> samples;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const StudyRow& a = rows[i];
        const StudyRow& b = rows[i + 1];
        if (b.contrast != a.contrast || b.order != a.order + 1)
            continue;
        if (!(a.h1_error > 10.0 * error_floor) || !(b.h1_error > 10.0 * error_floor))
            continue;
        if (!(a.h1_error > 0.0) || !(b.h1_error > 0.0))
            continue;
        const double step = b.h1_error / a.h1_error;
        const double scaled = (mode == ExpansionMode::Low) ? step / b.contrast : step * b.contrast;
        samples.push_back(std::log(scaled));
    }
    const double m = detail::median(samples);
    return std::isnan(m) ? m : std::exp(m);
}

/// Runs the full contrast/order sweep of a scenario: one contrast-free
/// expansion build, one direct solve per contrast, one row per (contrast, I).
inline StudyResult run_study(const Scenario& sc, int threads = 1) {
    StudyResult result;
    StudySummary& summary = result.summary;
    summary.scenario_id = sc.name;

    const FemSystem fem(build_mesh(sc));
    summary.mesh_id = mesh_fingerprint(fem.mesh());
    summary.nodes = fem.num_nodes();
    summary.triangles = (int)fem.mesh().triangles.size();
    summary.inclusions = fem.num_inclusions();

    const auto t_build = detail::StudyClock::now();
    switch (sc.mode) {
    case ExpansionMode::High:
        result.expansion = expand_high(fem, sc.data, sc.order, threads, sc.name, sc.tol);
        break;
    case ExpansionMode::Low:
        result.expansion = expand_low(fem, sc.data, sc.order, threads, sc.name, sc.tol);
        break;
    case ExpansionMode::Mixed:
        result.expansion =
            expand_mixed(fem, sc.mixed_roles(), sc.data, sc.order, threads, sc.name, sc.tol);
        break;
    }
    summary.expansion_build_ms = detail::ms_since(t_build);
    summary.max_compatibility_defect = result.expansion.max_compatibility_defect;

    const int n_contrasts = (int)sc.sweep.size();
    std::vector<std::vector<StudyRow>> row_blocks((std::size_t)n_contrasts);
    std::vector<std::string> failures((std::size_t)n_contrasts);
    std::vector<double> direct_ms((std::size_t)n_contrasts, 0.0);

    parallel_for(n_contrasts, threads, [&](int ci) {
        const double contrast = sc.sweep[(std::size_t)ci];
        try {
            ContrastCoefficient coeff;
            switch (sc.mode) {
            case ExpansionMode::High:
                coeff = ContrastCoefficient::high(fem.num_inclusions(), contrast);
                break;
            case ExpansionMode::Low:
                coeff = ContrastCoefficient::low(fem.num_inclusions(), contrast);
                break;
            case ExpansionMode::Mixed: {
                const MixedRoles roles = sc.mixed_roles();
                coeff = ContrastCoefficient::mixed(fem.num_inclusions(), contrast, roles.high,
                                                   roles.low);
                break;
            }
            }
            const auto t_direct = detail::StudyClock::now();
            const auto [udirect, report] = solve_direct(fem, coeff, sc.data, sc.tol);
            direct_ms[(std::size_t)ci] = detail::ms_since(t_direct);
            const double u_norm = fem.h1_norm(udirect);

            auto& rows = row_blocks[(std::size_t)ci];
            double prev_h1 = 0.0;
            for (int I = 0; I <= sc.order; ++I) {
                const auto t_row = detail::StudyClock::now();
                const FEFunction partial = evaluate(result.expansion, contrast, I);
                const ErrorPair err = expansion_error(fem, udirect, partial);
                StudyRow row;
                row.contrast = contrast;
                row.order = I;
                row.h1_error = err.h1;
                row.l2_error = err.l2;
                row.u_norm = u_norm;
                if (I > 0 && prev_h1 > 0.0)
                    row.ratio = err.h1 / prev_h1;
                row.runtime_ms = detail::ms_since(t_row) + (I == 0 ? direct_ms[(std::size_t)ci] : 0.0);
                prev_h1 = err.h1;
                rows.push_back(row);
            }
        } catch (const Error& e) {
            failures[(std::size_t)ci] =
                "contrast " + std::to_string(contrast) + ": " + e.what();
        }
    });

    for (int ci = 0; ci < n_contrasts; ++ci) {
        if (!failures[(std::size_t)ci].empty())
            summary.failures.push_back(failures[(std::size_t)ci]);
        for (const auto& row : row_blocks[(std::size_t)ci])
            result.rows.push_back(row);
        summary.direct_sweep_ms += direct_ms[(std::size_t)ci];
    }

    // the floor: error at the most favourable sweep point with all terms in
    if (!result.rows.empty()) {
        const auto& last_block = row_blocks[(std::size_t)n_contrasts - 1];
        summary.error_floor = last_block.empty() ? 0.0 : last_block.back().h1_error;
        summary.c_hat = estimate_c_hat(result.rows, sc.mode, summary.error_floor);
    }
    if (n_contrasts >= 4)
        summary.timing_ok = summary.expansion_build_ms < 0.5 * summary.direct_sweep_ms;
    return result;
}

// --- CSV / summary emission ---------------------------------------------------

inline std::string study_csv(const std::vector<StudyRow>& rows) {
    std::string out = "eta,I,h1_error,l2_error,ratio,u_norm,runtime_ms\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,", r.contrast, r.order, r.h1_error,
                      r.l2_error);
        out += buf;
        if (!std::isnan(r.ratio)) {
            std::snprintf(buf, sizeof buf, "%.17g", r.ratio);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g,%.3f\n", r.u_norm, r.runtime_ms);
        out += buf;
    }
    return out;
}

inline std::vector<StudyRow> parse_study_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("eta,I,", 0) != 0)
        throw ParseError("study csv: missing header");
    std::vector<StudyRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 7)
            throw ParseError("study csv: wrong column count at line " + std::to_string(lineno));
        StudyRow r;
        r.contrast = std::stod(cells[0]);
        r.order = std::stoi(cells[1]);
        r.h1_error = std::stod(cells[2]);
        r.l2_error = std::stod(cells[3]);
        r.ratio = cells[4].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[4]);
        r.u_norm = std::stod(cells[5]);
        r.runtime_ms = std::stod(cells[6]);
        rows.push_back(r);
    }
    return rows;
}

inline void emit_csv(const std::vector<StudyRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << study_csv(rows);
    if (!out)
        throw IoError("write failed: " + path);
}

inline std::string summary_text(const StudySummary& s) {
    std::ostringstream out;
    char buf[128];
    out << "scenario " << s.scenario_id << "\n";
    out << "mesh " << s.mesh_id << "\n";
    out << "nodes " << s.nodes << "\n";
    out << "triangles " << s.triangles << "\n";
    out << "inclusions " << s.inclusions << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", s.c_hat);
    out << "c_hat " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", s.error_floor);
    out << "error_floor " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", s.max_compatibility_defect);
    out << "max_compatibility_defect " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.3f", s.expansion_build_ms);
    out << "expansion_build_ms " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.3f", s.direct_sweep_ms);
    out << "direct_sweep_ms " << buf << "\n";
    out << "timing_ok " << (s.timing_ok ? 1 : 0) << "\n";
    for (const auto& f : s.failures)
        out << "failure " << f << "\n";
    return out.str();
}

inline void emit_summary(const StudySummary& s, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << summary_text(s);
    if (!out)
        throw IoError("write failed: " + path);
}

} // namespace hcx
