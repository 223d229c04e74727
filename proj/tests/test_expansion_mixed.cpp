#include <doctest.h>

#include "fixtures.hpp"

using namespace hcx;

namespace {

PiecewiseData mirror_odd_data(const FemSystem& fem) {
    PiecewiseData d;
    d.forcing.assign((std::size_t)fem.num_inclusions() + 1, 0.0);
    d.g0 = -0.5;
    d.g1 = 1.0; // g = x - 1/2, odd under the mirror x -> 1 - x
    return d;
}

} // namespace

TEST_CASE("u_{-1} of the mixed expansion lives in the low inclusion only") {
    const auto& fem = fixtures::mixed_rect();
    MixedContrastExpander mx(fem, {1, 2});
    SUBCASE("no forcing in the low inclusion: identically zero") {
        const FEFunction u = mx.compute_u_minus1(mirror_odd_data(fem));
        CHECK(fem.h1_norm(u) == 0.0);
    }
    SUBCASE("forcing in the low inclusion: supported on its closure") {
        PiecewiseData data = mirror_odd_data(fem);
        data.forcing[2] = 1.0;
        const FEFunction u = mx.compute_u_minus1(data);
        CHECK(fem.h1_norm(u) > 0.0);
        for (int p = 0; p < fem.num_nodes(); ++p)
            if (fem.index().node_inclusion[(std::size_t)p] != 2)
                CHECK(u[p] == 0.0);
    }
}

TEST_CASE("forced low disk reproduces the Poisson center value") {
    GeometrySpec geo;
    geo.domain = make_rectangle(0, 0, 1.2, 1.0);
    geo.inclusions.push_back(make_ngon(0.25, 0.5, 0.12, 16)); // high
    geo.inclusions.push_back(make_ngon(0.8, 0.5, 0.25, 32));  // low
    const FemSystem fem(generate_mesh(geo, 0.05));
    PiecewiseData data;
    data.forcing = {0.0, 0.0, 1.0};
    MixedContrastExpander mx(fem, {1, 2});
    const FEFunction u = mx.compute_u_minus1(data);
    CHECK(std::abs(fem.evaluate_at(u, {0.8, 0.5}) - 0.25 * 0.25 / 4.0) < 2e-3);
}

TEST_CASE("constant data collapses the whole mixed series") {
    const auto& fem = fixtures::mixed_rect();
    PiecewiseData data;
    data.forcing.assign(3, 0.0);
    data.g0 = 1.0;
    const Expansion e = expand_mixed(fem, {1, 2}, data, 4);
    CHECK(fem.h1_norm(e.term(-1)) == 0.0);
    for (double v : e.term(0).values)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.constants_of(0)[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 1; i <= 4; ++i)
        CHECK(fem.h1_norm(e.term(i)) <= 1e-12);
}

TEST_CASE("the limit constant matches a stiff direct solve") {
    const auto& fem = fixtures::mixed_rect();
    const PiecewiseData data = mirror_odd_data(fem);
    const Expansion e = expand_mixed(fem, {1, 2}, data, 4);
    CHECK(inclusion_rms_deviation(fem, e.term(0), 1) <=
          1e-12 * std::max(1.0, fem.h1_norm(e.term(0))));
    const auto [ud, rep] = solve_direct(fem, ContrastCoefficient::mixed(2, 1e6, 1, 2), data);
    double mean = 0.0;
    const auto nodes = fem.index().closure_nodes(1);
    for (int p : nodes)
        mean += ud[p];
    mean /= (double)nodes.size();
    CHECK(std::abs(mean - e.constants_of(0)[0]) < 1e-5);
}

TEST_CASE("mixed recursion: defects, reciprocity and a stable rate") {
    const auto& fem = fixtures::mixed_rect();
    const PiecewiseData data = mirror_odd_data(fem);
    const Expansion e = expand_mixed(fem, {1, 2}, data, 5);
    CHECK(e.max_compatibility_defect <= 1e-10);

    SUBCASE("transmission across the high interface") {
        for (int i = 0; i < e.order(); ++i) {
            const auto r_out = residual_functional(fem.stiffness_background(), e.term(i));
            const auto r_in = residual_functional(fem.stiffness_inclusion(1), e.term(i + 1));
            double scale = 1e-300;
            for (int p : fem.index().interface_nodes[0])
                scale = std::max(scale, std::abs(r_out[(std::size_t)p]));
            scale = std::max(scale, 1e-6);
            for (int p : fem.index().interface_nodes[0])
                CHECK(std::abs(r_in[(std::size_t)p] + r_out[(std::size_t)p]) <= 1e-10 * scale);
        }
    }
    SUBCASE("transmission across the low interface") {
        for (int i = 0; i < e.order(); ++i) {
            const auto r_out = residual_functional(fem.stiffness_background(), e.term(i + 1));
            const auto r_in = residual_functional(fem.stiffness_inclusion(2), e.term(i));
            double scale = 1e-300;
            for (int p : fem.index().interface_nodes[1])
                scale = std::max(scale, std::abs(r_in[(std::size_t)p]));
            scale = std::max(scale, 1e-6);
            for (int p : fem.index().interface_nodes[1])
                CHECK(std::abs(r_out[(std::size_t)p] + r_in[(std::size_t)p]) <= 1e-10 * scale);
        }
    }
    SUBCASE("terms are harmonic where the recursion says they must be") {
        CHECK(max_background_harmonicity(fem, e) <= 1e-10);
        for (int i = 0; i <= e.order(); ++i) {
            const FEFunction& u = e.term(i);
            const double scale = std::max(fem.h1_norm(u), 1e-300);
            const auto r_low = residual_functional(fem.stiffness_inclusion(2), u);
            for (int p : fem.index().inclusion_interior[1])
                CHECK(std::abs(r_low[(std::size_t)p]) <= 1e-10 * scale);
            if (i >= 2) {
                const auto r_high = residual_functional(fem.stiffness_inclusion(1), u);
                for (int p : fem.index().inclusion_interior[0])
                    CHECK(std::abs(r_high[(std::size_t)p]) <= 1e-10 * scale);
            }
        }
    }
    SUBCASE("term norms grow at a pinned stable rate") {
        // regression pin from the reference run on this mesh
        const double pinned_ratio = 1.05;
        for (int i = 2; i <= 5; ++i) {
            const double ratio = fem.h1_norm(e.term(i)) / fem.h1_norm(e.term(i - 1));
            CHECK(std::abs(ratio - pinned_ratio) < 0.1 * pinned_ratio);
        }
    }
}

TEST_CASE("with the low role removed the mixed pipeline degenerates to pure high") {
    const auto& fem = fixtures::two_disks();
    Mesh merged = retag_as_background(fem.mesh(), 2);
    const FemSystem fem1(std::move(merged));
    PiecewiseData data;
    data.forcing = {0.0, 1.0};
    data.g1 = 1.0;
    const Expansion pure = expand_high(fem1, data, 5);
    const Expansion degenerate = expand_mixed(fem1, {1, 0}, data, 5);
    REQUIRE(degenerate.first_index == -1);
    CHECK(fem1.h1_norm(degenerate.term(-1)) == 0.0);
    for (double eta : {1e2, 1e3}) {
        const FEFunction a = evaluate(pure, eta, 5);
        const FEFunction b = evaluate(degenerate, eta, 5);
        FEFunction diff = fem1.zero();
        for (int p = 0; p < fem1.num_nodes(); ++p)
            diff[p] = a[p] - b[p];
        CHECK(fem1.h1_norm(diff) <= 1e-10 * std::max(1.0, fem1.h1_norm(a)));
    }
}
