// Acceptance suite: one check per shipped guarantee, one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hcx/hcx.hpp"

using namespace hcx;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    if (!pass)
        ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

const FemSystem& annulus() {
    static FemSystem fem = [] {
        GeometrySpec geo;
        geo.domain = make_ngon(0, 0, 1.0, 64);
        geo.inclusions.push_back(make_ngon(0, 0, 0.5, 64));
        return FemSystem(generate_mesh(geo, 0.05));
    }();
    return fem;
}

const FemSystem& two_disks() {
    static FemSystem fem = [] {
        GeometrySpec geo;
        geo.domain = make_rectangle(0, 0, 1, 1);
        geo.inclusions.push_back(make_ngon(0.28, 0.5, 0.15, 20));
        geo.inclusions.push_back(make_ngon(0.72, 0.5, 0.15, 20));
        return FemSystem(generate_mesh(geo, 0.05));
    }();
    return fem;
}

PiecewiseData odd_data(const FemSystem& fem) {
    PiecewiseData d;
    d.forcing.assign((std::size_t)fem.num_inclusions() + 1, 0.0);
    d.g1 = 1.0;
    return d;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = (double)xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct AnnulusStudy {
    std::vector<StudyRow> rows;
    StudySummary summary;
};

const AnnulusStudy& annulus_study() {
    static AnnulusStudy study = [] {
        Scenario sc;
        sc.name = "acceptance-annulus";
        sc.mode = ExpansionMode::High;
        sc.geometry.domain = make_ngon(0, 0, 1.0, 64);
        sc.geometry.inclusions.push_back(make_ngon(0, 0, 0.5, 64));
        sc.roles = {"high"};
        sc.data = odd_data(annulus());
        sc.h = 0.05;
        sc.order = 8;
        sc.sweep = {1e2, 1e3, 1e4};
        const StudyResult r = run_study(sc);
        return AnnulusStudy{r.rows, r.summary};
    }();
    return study;
}

void criterion_1_geometric_convergence() {
    const auto& study = annulus_study();
    const double c_hat = study.summary.c_hat;
    const double floor = study.summary.error_floor;
    bool pass = std::isfinite(c_hat) && c_hat > 0.0;
    std::string detail = fmt("c_hat=%.4f floor=%.2e", c_hat, floor);
    const double eta = 1e3;
    int checked = 0;
    std::vector<double> errs(9, 0.0);
    for (const auto& row : study.rows)
        if (row.contrast == eta)
            errs[(std::size_t)row.order] = row.h1_error;
    for (int I = 0; I < 4; ++I) {
        if (!(errs[(std::size_t)I] > 10.0 * floor) || !(errs[(std::size_t)I + 1] > 10.0 * floor))
            break;
        const double reduction = errs[(std::size_t)I] / errs[(std::size_t)I + 1];
        const double lo = 0.5 * eta / c_hat;
        const double hi = 2.0 * eta / c_hat;
        if (!(reduction >= lo && reduction <= hi)) {
            pass = false;
            detail += fmt(" I=%d reduction=%.1f outside [%.1f, %.1f]", I, reduction, lo, hi);
        }
        ++checked;
    }
    if (checked < 2) {
        pass = false;
        detail += " too few pre-floor steps";
    } else {
        detail += fmt(" steps_checked=%d", checked);
    }
    report(1, "geometric convergence per added term at eta=1e3", pass, detail);
}

void criterion_2_contrast_convergence() {
    const auto& study = annulus_study();
    std::vector<double> errs;
    for (double eta : {1e2, 1e3, 1e4})
        for (const auto& row : study.rows)
            if (row.contrast == eta && row.order == 0)
                errs.push_back(row.h1_error);
    bool pass = errs.size() == 3;
    std::string detail;
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double ratio = errs[i] / errs[i - 1];
        detail += fmt("ratio=%.4f ", ratio);
        if (!(errs[i] < errs[i - 1] && ratio >= 0.05 && ratio <= 0.2))
            pass = false;
    }
    report(2, "first-order approach of u_eta to the limit", pass, detail);
}

void criterion_3_analytic_values() {
    const FemSystem& fem = annulus();
    const PiecewiseData data = odd_data(fem);
    HighContrastExpander hx(fem);
    const auto [u0_high, c] = hx.compute_u0(data);
    const double high_val = fem.evaluate_at(u0_high, {0.75, 0.0});
    const double high_ref = (0.75 - 0.25 / 0.75) / 0.75;

    LowContrastExpander lx(fem);
    const FEFunction u0_low = lx.compute_u0(data, lx.compute_u_minus1(data));
    const double low_val = fem.evaluate_at(u0_low, {0.75, 0.0});
    const double low_ref = (0.75 + 0.25 / 0.75) / 1.25;

    const double a11 = hx.basis().a_geom[0][0];
    const double a11_ref = 2.0 * M_PI / std::log(2.0);

    const bool pass = std::abs(high_val - high_ref) <= 0.02 &&
                      std::abs(low_val - low_ref) <= 0.02 &&
                      std::abs(a11 - a11_ref) / a11_ref <= 0.02;
    report(3, "analytic limit values at (0.75, 0) and the interface energy", pass,
           fmt("high=%.4f/%.4f low=%.4f/%.4f a11=%.4f/%.4f", high_val, high_ref, low_val, low_ref,
               a11, a11_ref));
}

void criterion_4_compatibility() {
    double worst = 0.0;
    {
        const Expansion e = expand_high(annulus(), odd_data(annulus()), 8);
        worst = std::max(worst, e.max_compatibility_defect);
    }
    {
        PiecewiseData data = odd_data(two_disks());
        data.forcing = {0.0, 1.0, 0.0};
        const Expansion e = expand_high(two_disks(), data, 6);
        worst = std::max(worst, e.max_compatibility_defect);
    }
    {
        GeometrySpec geo;
        geo.domain = make_rectangle(0, 0, 1, 0.6);
        geo.inclusions.push_back(make_ngon(0.3, 0.3, 0.12, 32));
        geo.inclusions.push_back(make_ngon(0.7, 0.3, 0.12, 32));
        const FemSystem fem(generate_mesh(geo, 0.04));
        PiecewiseData data;
        data.forcing.assign(3, 0.0);
        data.g0 = -0.5;
        data.g1 = 1.0;
        const Expansion e = expand_mixed(fem, {1, 2}, data, 6);
        worst = std::max(worst, e.max_compatibility_defect);
    }
    report(4, "compatibility defect of every Neumann step", worst <= 1e-10,
           fmt("max defect %.2e <= 1e-10", worst));
}

void criterion_5_orthogonality() {
    const FemSystem& fem = two_disks();
    PiecewiseData data = odd_data(fem);
    data.forcing = {0.0, 1.0, 0.0};
    const ConstrainedSolver bg = make_background_dirichlet(fem);
    const HarmonicBasis basis = build_harmonic_basis(fem, bg);
    const Expansion e = expand_high(fem, data, 6);
    const double worst = max_orthogonality_defect(fem, basis, e);
    report(5, "Gram-orthogonality of every term on two inclusions", worst <= 1e-10,
           fmt("max |chi' K u_i| / |u_i| = %.2e", worst));
}

void criterion_6_constant_formulas() {
    struct Case {
        std::string name;
        GeometrySpec geo;
        PiecewiseData data;
    };
    std::vector<Case> cases;
    {
        Case c;
        c.name = "symmetric";
        c.geo.domain = make_ngon(0, 0, 1.0, 64);
        c.geo.inclusions.push_back(make_ngon(0, 0, 0.5, 64));
        c.data.forcing.assign(2, 0.0);
        c.data.g1 = 1.0;
        cases.push_back(c);
    }
    {
        Case c;
        c.name = "asymmetric";
        c.geo.domain = make_rectangle(0, 0, 1, 1);
        c.geo.inclusions.push_back(make_rectangle(0.2, 0.3, 0.45, 0.55));
        c.data.forcing.assign(2, 0.0);
        c.data.g1 = 1.0;
        cases.push_back(c);
    }
    {
        Case c;
        c.name = "forced";
        c.geo.domain = make_rectangle(0, 0, 1, 1);
        c.geo.inclusions.push_back(make_rectangle(0.4, 0.4, 0.6, 0.6));
        c.data.forcing = {0.0, 1.0};
        cases.push_back(c);
    }
    bool pass = true;
    std::string detail;
    for (const auto& cse : cases) {
        const FemSystem fem(generate_mesh(cse.geo, 0.05));
        HighContrastExpander hx(fem);
        const auto [u0, c_energy] = hx.compute_u0(cse.data);
        // flux form: c = (f integral - boundary flux of u00) / chi flux
        const FEFunction u00 = hx.compute_u00(cse.data);
        const std::vector<int> bg_tags{0};
        std::vector<double> b0;
        if (cse.data.has_forcing())
            b0 = assemble_load(fem.mesh(), cse.data, bg_tags);
        const auto r_u00 = residual_functional(fem.stiffness_background(), u00, b0);
        const auto r_chi = residual_functional(fem.stiffness_background(), hx.basis().chis[0]);
        double num = 0.0, den = 0.0;
        const std::vector<int> incl_tags{1};
        const auto bf = assemble_load(fem.mesh(), cse.data, incl_tags);
        for (int p : fem.index().closure_nodes(1))
            num += bf[(std::size_t)p];
        for (int p : fem.index().interface_nodes[0]) {
            num -= r_u00[(std::size_t)p];
            den += r_chi[(std::size_t)p];
        }
        const double c_flux = num / den;
        const double diff = std::abs(c_flux - c_energy[0]);
        detail += fmt("%s |dc|=%.2e ", cse.name.c_str(), diff);
        pass = pass && diff <= 1e-10 * std::max(1.0, std::abs(c_energy[0]));
    }
    report(6, "energy and flux formulas for the inclusion constant agree", pass, detail);
}

void criterion_7_constancy() {
    const FemSystem& fem = annulus();
    const PiecewiseData data = odd_data(fem);
    HighContrastExpander hx(fem);
    const auto [u0, c] = hx.compute_u0(data);
    const double exact_dev = inclusion_rms_deviation(fem, u0, 1);
    const auto [ud, rep] = solve_direct(fem, ContrastCoefficient::high(1, 1e6), data);
    const double emergent_dev = inclusion_rms_deviation(fem, ud, 1) / fem.h1_norm(ud);
    const bool pass = exact_dev <= 1e-12 && emergent_dev <= 1e-4;
    report(7, "constancy of the limit on the inclusion", pass,
           fmt("built-in %.2e <= 1e-12, direct at 1e6 %.2e <= 1e-4", exact_dev, emergent_dev));
}

void criterion_8_low_contrast() {
    const FemSystem& fem = annulus();
    bool pass = true;
    std::string detail;
    {
        PiecewiseData data;
        data.forcing = {0.0, 1.0};
        std::vector<double> xs, ys;
        for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
            const auto [ud, rep] = solve_direct(fem, ContrastCoefficient::low(1, eps), data);
            xs.push_back(std::log(eps));
            ys.push_back(std::log(fem.h1_norm(ud)));
        }
        const double slope = fit_slope(xs, ys);
        detail += fmt("blowup slope %.3f ", slope);
        pass = pass && std::abs(slope + 1.0) <= 0.1;
    }
    {
        const PiecewiseData data = odd_data(fem);
        const Expansion e = expand_low(fem, data, 2);
        const double um1_norm = fem.h1_norm(e.term(-1));
        pass = pass && um1_norm <= 1e-12;
        std::vector<double> xs, ys;
        for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
            const auto [ud, rep] = solve_direct(fem, ContrastCoefficient::low(1, eps), data);
            const ErrorPair err = expansion_error(fem, ud, e.term(0));
            xs.push_back(std::log(eps));
            ys.push_back(std::log(err.h1));
        }
        const double slope = fit_slope(xs, ys);
        detail += fmt("|u_-1|=%.1e reduction slope %.3f", um1_norm, slope);
        pass = pass && std::abs(slope - 1.0) <= 0.15;
    }
    report(8, "low-contrast blow-up and the forcing-free reduction", pass, detail);
}

void criterion_9_mixed_consistency() {
    const FemSystem& fem2 = two_disks();
    const FemSystem fem1(retag_as_background(fem2.mesh(), 2));
    PiecewiseData data;
    data.forcing = {0.0, 1.0};
    data.g1 = 1.0;
    const Expansion pure = expand_high(fem1, data, 6);
    const Expansion degenerate = expand_mixed(fem1, {1, 0}, data, 6);
    double worst = 0.0;
    for (double eta : {1e2, 1e3, 1e4}) {
        const FEFunction a = evaluate(pure, eta, 6);
        const FEFunction b = evaluate(degenerate, eta, 6);
        FEFunction diff = fem1.zero();
        for (int p = 0; p < fem1.num_nodes(); ++p)
            diff[p] = a[p] - b[p];
        worst = std::max(worst, fem1.h1_norm(diff) / std::max(1.0, fem1.h1_norm(a)));
    }
    report(9, "mixed pipeline with the low role removed equals pure high", worst <= 1e-10,
           fmt("max relative difference %.2e", worst));
}

void criterion_10_contrast_free_precomputation() {
    const std::vector<double> etas{1e2, 1e3, 1e4, 1e5};
    using Clock = std::chrono::steady_clock;
    double best_expansion = 1e300, best_direct = 1e300;
    GeometrySpec geo;
    geo.domain = make_ngon(0, 0, 1.0, 64);
    geo.inclusions.push_back(make_ngon(0, 0, 0.5, 64));
    const Mesh mesh = generate_mesh(geo, 0.05);
    for (int rep = 0; rep < 3; ++rep) {
        {
            const FemSystem fem{Mesh(mesh)};
            const PiecewiseData data = odd_data(fem);
            const auto t0 = Clock::now();
            HighContrastExpander hx(fem);
            const Expansion e = hx.expand(data, 8);
            for (double eta : etas)
                (void)evaluate(e, eta, 8);
            best_expansion = std::min(
                best_expansion, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
        }
        {
            const FemSystem fem{Mesh(mesh)};
            const PiecewiseData data = odd_data(fem);
            const auto t0 = Clock::now();
            for (double eta : etas)
                (void)solve_direct(fem, ContrastCoefficient::high(1, eta), data);
            best_direct = std::min(
                best_direct, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
        }
    }
    report(10, "one expansion build beats half of four direct solves",
           best_expansion < 0.5 * best_direct,
           fmt("expansion %.1f ms vs direct sweep %.1f ms", best_expansion, best_direct));
}

void criterion_11_trivial_suite() {
    bool pass = true;
    std::string detail;
    { // high and low on the annulus
        const FemSystem& fem = annulus();
        PiecewiseData ones;
        ones.forcing.assign(2, 0.0);
        ones.g0 = 1.0;
        for (auto mode : {ExpansionMode::High, ExpansionMode::Low}) {
            const Expansion e = mode == ExpansionMode::High ? expand_high(fem, ones, 4)
                                                            : expand_low(fem, ones, 4);
            double u0_dev = 0.0;
            for (double v : e.term(0).values)
                u0_dev = std::max(u0_dev, std::abs(v - 1.0));
            double tail = 0.0;
            for (int i = 1; i <= 4; ++i)
                tail = std::max(tail, fem.h1_norm(e.term(i)));
            detail += fmt("%s dev=%.1e tail=%.1e ", to_string(mode), u0_dev, tail);
            pass = pass && u0_dev <= 1e-10 && tail <= 1e-12;
            const auto [ud, rep] =
                solve_direct(fem, mode == ExpansionMode::High ? ContrastCoefficient::high(1, 1e4)
                                                              : ContrastCoefficient::low(1, 1e-4),
                             ones);
            double dev = 0.0;
            for (double v : ud.values)
                dev = std::max(dev, std::abs(v - 1.0));
            pass = pass && dev <= 1e-10;
        }
    }
    { // mixed on the two-disk rectangle
        GeometrySpec geo;
        geo.domain = make_rectangle(0, 0, 1, 0.6);
        geo.inclusions.push_back(make_ngon(0.3, 0.3, 0.12, 32));
        geo.inclusions.push_back(make_ngon(0.7, 0.3, 0.12, 32));
        const FemSystem fem(generate_mesh(geo, 0.04));
        PiecewiseData ones;
        ones.forcing.assign(3, 0.0);
        ones.g0 = 1.0;
        const Expansion e = expand_mixed(fem, {1, 2}, ones, 4);
        double u0_dev = 0.0;
        for (double v : e.term(0).values)
            u0_dev = std::max(u0_dev, std::abs(v - 1.0));
        double tail = fem.h1_norm(e.term(-1));
        for (int i = 1; i <= 4; ++i)
            tail = std::max(tail, fem.h1_norm(e.term(i)));
        detail += fmt("mixed dev=%.1e tail=%.1e", u0_dev, tail);
        pass = pass && u0_dev <= 1e-10 && tail <= 1e-12;
    }
    report(11, "constant data is exact in all three modes", pass, detail);
}

} // namespace

int main() {
    try {
        criterion_1_geometric_convergence();
        criterion_2_contrast_convergence();
        criterion_3_analytic_values();
        criterion_4_compatibility();
        criterion_5_orthogonality();
        criterion_6_constant_formulas();
        criterion_7_constancy();
        criterion_8_low_contrast();
        criterion_9_mixed_consistency();
        criterion_10_contrast_free_precomputation();
        criterion_11_trivial_suite();
    } catch (const Error& e) {
        std::printf("[FAIL] suite aborted: %s\n", e.what());
        return 99;
    }
    std::printf("%d of 11 criteria passed\n", 11 - g_failures);
    return g_failures;
}
