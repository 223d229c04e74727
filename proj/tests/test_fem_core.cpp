#include <doctest.h>

#include <random>

#include "fixtures.hpp"

using namespace hcx;

namespace {

Mesh reference_triangle() {
    Mesh mesh;
    mesh.vertices = {{0, 0}, {1, 0}, {0, 1}};
    mesh.triangles = {{{0, 1, 2}, 0}};
    mesh.boundary_edges = {{0, 1, kOuterBoundaryTag}, {1, 2, kOuterBoundaryTag},
                           {2, 0, kOuterBoundaryTag}};
    return mesh;
}

const FemSystem& unit_square() {
    static FemSystem fem = [] {
        GeometrySpec geo;
        geo.domain = make_rectangle(0, 0, 1, 1);
        return FemSystem(generate_mesh(geo, 0.1));
    }();
    return fem;
}

FEFunction nodal(const FemSystem& fem, double (*f)(Point2)) {
    FEFunction u = fem.zero();
    for (int p = 0; p < fem.num_nodes(); ++p)
        u[p] = f(fem.mesh().vertices[(std::size_t)p]);
    return u;
}

} // namespace

TEST_CASE("element stiffness of the reference right triangle") {
    const Mesh mesh = reference_triangle();
    const std::vector<double> w{1.0};
    const SparseMatrix K = assemble_stiffness(mesh, w);
    const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(K.row_value(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-14));
}

TEST_CASE("stiffness row sums vanish (constants in the kernel)") {
    const auto& fem = fixtures::annulus();
    const SparseMatrix& K = fem.stiffness_unit();
    for (int r = 0; r < K.n; ++r) {
        double s = 0.0;
        for (int k = K.row_ptr[(std::size_t)r]; k < K.row_ptr[(std::size_t)r + 1]; ++k)
            s += K.vals[(std::size_t)k];
        CHECK(std::abs(s) < 1e-12);
    }
}

TEST_CASE("energy of the linear function x on the unit square is one") {
    const auto& fem = unit_square();
    const FEFunction u = nodal(fem, [](Point2 p) { return p.x; });
    CHECK(fem.stiffness_unit().quadratic(u.values, u.values) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("load vectors integrate piecewise-constant forcing exactly") {
    const auto& fem = fixtures::square_inclusion();
    const std::vector<int> all_tags{0, 1};
    SUBCASE("zero forcing gives the zero vector") {
        PiecewiseData f = fixtures::data_g_const(fem, 0.0);
        const auto b = assemble_load(fem.mesh(), f, all_tags);
        for (double v : b)
            CHECK(v == 0.0);
    }
    SUBCASE("unit forcing sums to the domain area") {
        PiecewiseData f = fixtures::data_g_const(fem, 0.0);
        f.forcing = {1.0, 1.0};
        const auto b = assemble_load(fem.mesh(), f, all_tags);
        double s = 0.0;
        for (double v : b)
            s += v;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("forcing on the inclusion only sums to its area") {
        PiecewiseData f = fixtures::data_g_const(fem, 0.0);
        f.forcing = {0.0, 1.0};
        const std::vector<int> incl{1};
        const auto b = assemble_load(fem.mesh(), f, incl);
        double s = 0.0;
        for (double v : b)
            s += v;
        CHECK(s == doctest::Approx(0.04).epsilon(1e-12));
    }
}

TEST_CASE("Dirichlet solve reproduces constants and linear functions") {
    const auto& fem = unit_square();
    std::vector<int> free_nodes = fem.index().background_interior;
    const std::vector<double> no_load(fem.num_nodes(), 0.0);
    SUBCASE("g == 1 gives u == 1") {
        std::vector<std::pair<int, double>> bc;
        for (int p : fem.index().outer_boundary)
            bc.emplace_back(p, 1.0);
        const auto [u, rep] = solve_dirichlet(fem, fem.stiffness_unit(), free_nodes, no_load, bc);
        for (double v : u.values)
            CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.residual <= 1e-12);
    }
    SUBCASE("g == x gives u == x") {
        std::vector<std::pair<int, double>> bc;
        for (int p : fem.index().outer_boundary)
            bc.emplace_back(p, fem.mesh().vertices[(std::size_t)p].x);
        const auto [u, rep] = solve_dirichlet(fem, fem.stiffness_unit(), free_nodes, no_load, bc);
        for (int p = 0; p < fem.num_nodes(); ++p)
            CHECK(u[p] == doctest::Approx(fem.mesh().vertices[(std::size_t)p].x).epsilon(1e-11));
    }
    SUBCASE("a region node without boundary data is rejected") {
        std::vector<std::pair<int, double>> bc;
        const auto& ob = fem.index().outer_boundary;
        for (std::size_t i = 0; i + 1 < ob.size(); ++i)
            bc.emplace_back(ob[i], 0.0);
        CHECK_THROWS_AS(solve_dirichlet(fem, fem.stiffness_unit(), free_nodes, no_load, bc),
                        MissingBoundaryData);
    }
}

TEST_CASE("Dirichlet solve on the annulus background matches the harmonic oracle") {
    const auto& fem = fixtures::annulus();
    std::vector<std::pair<int, double>> bc;
    for (int p : fem.index().outer_boundary)
        bc.emplace_back(p, fem.mesh().vertices[(std::size_t)p].x); // cos(theta) on the circle
    for (int p : fem.index().interface_nodes[0])
        bc.emplace_back(p, 0.0);
    const std::vector<double> no_load(fem.num_nodes(), 0.0);
    const auto [u, rep] = solve_dirichlet(fem, fem.stiffness_background(),
                                          fem.index().background_interior, no_load, bc);
    // u = (rho - r^2/rho) cos(theta) / (1 - r^2) with r = 1/2
    const double expected = (0.75 - 0.25 / 0.75) / 0.75;
    CHECK(std::abs(fem.evaluate_at(u, {0.75, 0.0}) - expected) < 2e-2);
    SUBCASE("discrete maximum principle: extrema on the constrained nodes") {
        double lo = 0.0, hi = 0.0;
        for (const auto& [p, v] : bc) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (int p : fem.index().background_interior) {
            CHECK(u[p] >= lo - 1e-10);
            CHECK(u[p] <= hi + 1e-10);
        }
    }
}

TEST_CASE("mean-zero Neumann solve") {
    const auto& fem = fixtures::square_inclusion();
    const std::vector<double> masses = inclusion_node_masses(fem.mesh(), 1);
    SUBCASE("zero load gives the zero function") {
        const std::vector<double> load(fem.num_nodes(), 0.0);
        const auto [u, rep] = solve_neumann_mean_zero(fem, 1, load);
        CHECK(fem.h1_norm(u) == 0.0);
        CHECK(rep.compatibility_defect == 0.0);
    }
    SUBCASE("flux of a global linear field balances to machine precision") {
        FEFunction x_field = fem.zero();
        for (int p = 0; p < fem.num_nodes(); ++p)
            x_field[p] = fem.mesh().vertices[(std::size_t)p].x;
        const auto r = residual_functional(fem.stiffness_background(), x_field);
        std::vector<double> load(fem.num_nodes(), 0.0);
        for (int p : fem.index().interface_nodes[0])
            load[(std::size_t)p] = -r[(std::size_t)p];
        const auto [u, rep] = solve_neumann_mean_zero(fem, 1, load);
        CHECK(rep.compatibility_defect <= 1e-12);
    }
    SUBCASE("forcing plus matching outflux: mean-zero solution with small residual") {
        PiecewiseData f = fixtures::data_g_const(fem, 0.0);
        f.forcing = {0.0, 1.0};
        const std::vector<int> incl{1};
        std::vector<double> load = assemble_load(fem.mesh(), f, incl);
        // outflux of total -|D1| spread over the interface by partition of unity
        double iface_mass = 0.0;
        for (int p : fem.index().interface_nodes[0])
            iface_mass += masses[(std::size_t)p];
        const double area = fem.mesh().subdomain_area(1);
        for (int p : fem.index().interface_nodes[0])
            load[(std::size_t)p] -= area * masses[(std::size_t)p] / iface_mass;
        const auto [u, rep] = solve_neumann_mean_zero(fem, 1, load);
        CHECK(rep.compatibility_defect <= 1e-12);
        CHECK(rep.residual <= 1e-12);
        double wu = 0.0;
        for (int p : fem.index().closure_nodes(1))
            wu += masses[(std::size_t)p] * u[p];
        CHECK(std::abs(wu) <= 1e-12 * std::max(1.0, fem.l2_norm(u)));
    }
    SUBCASE("an incompatible load is rejected") {
        std::vector<double> load(fem.num_nodes(), 0.0);
        for (int p : fem.index().closure_nodes(1))
            load[(std::size_t)p] = 1.0;
        CHECK_THROWS_AS(solve_neumann_mean_zero(fem, 1, load), IncompatibleData);
    }
}

TEST_CASE("weak flux") {
    const auto& fem = fixtures::annulus();
    const std::vector<int> bg_tags{0};
    SUBCASE("constant field has zero flux") {
        FEFunction c = fem.zero();
        for (auto& v : c.values)
            v = 3.5;
        const WeakFlux flux = weak_flux(fem, c, bg_tags, 1);
        for (double v : flux.values)
            CHECK(std::abs(v) < 1e-12);
        CHECK(std::abs(flux.total) < 1e-12);
    }
    SUBCASE("characteristic function flux equals its energy, near 2*pi/ln 2") {
        const ConstrainedSolver bg = make_background_dirichlet(fem);
        const FEFunction chi = compute_chi(fem, bg, 1);
        const WeakFlux flux = weak_flux(fem, chi, bg_tags, 1);
        const double analytic = 2.0 * M_PI / std::log(2.0);
        CHECK(std::abs(flux.total - analytic) / analytic < 0.02);
    }
    SUBCASE("discrete conservation: total boundary flux equals the forcing integral") {
        PiecewiseData f = fixtures::data_g_const(fem, 0.0);
        f.forcing = {1.0, 0.0};
        const auto b0 = assemble_load(fem.mesh(), f, bg_tags);
        std::vector<std::pair<int, double>> bc;
        for (int p : fem.index().outer_boundary)
            bc.emplace_back(p, 0.0);
        for (int p : fem.index().interface_nodes[0])
            bc.emplace_back(p, 0.0);
        const auto [u, rep] = solve_dirichlet(fem, fem.stiffness_background(),
                                              fem.index().background_interior, b0, bc);
        const auto r = residual_functional(fem.stiffness_background(), u, b0);
        double total = 0.0;
        for (int p : fem.index().outer_boundary)
            total += r[(std::size_t)p];
        for (int p : fem.index().interface_nodes[0])
            total += r[(std::size_t)p];
        const double bg_area = fem.mesh().subdomain_area(0);
        CHECK(std::abs(total + bg_area) < 1e-11 * std::max(1.0, bg_area));
    }
}

TEST_CASE("norms") {
    const auto& fem = unit_square();
    SUBCASE("constants: zero seminorm, l2 = |c| sqrt(area)") {
        FEFunction c = fem.zero();
        for (auto& v : c.values)
            v = -2.0;
        CHECK(fem.h1_seminorm(c) < 1e-12);
        CHECK(fem.l2_norm(c) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("u = x: seminorm 1, l2^2 = 1/3") {
        const FEFunction u = nodal(fem, [](Point2 p) { return p.x; });
        CHECK(fem.h1_seminorm(u) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fem.l2_norm(u) * fem.l2_norm(u) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("h1^2 equals seminorm^2 + l2^2 for random data") {
        std::mt19937 rng(21);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        FEFunction u = fem.zero();
        for (auto& v : u.values)
            v = dist(rng);
        const double h1 = fem.h1_norm(u);
        const double semi = fem.h1_seminorm(u);
        const double l2 = fem.l2_norm(u);
        CHECK(std::abs(h1 * h1 - semi * semi - l2 * l2) < 1e-13 * h1 * h1);
    }
}

TEST_CASE("Galerkin symmetry of the assembled forms") {
    const auto& fem = fixtures::square_inclusion();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> u(fem.num_nodes()), v(fem.num_nodes());
    for (int i = 0; i < fem.num_nodes(); ++i) {
        u[(std::size_t)i] = dist(rng);
        v[(std::size_t)i] = dist(rng);
    }
    const double uv = fem.stiffness_unit().quadratic(u, v);
    const double vu = fem.stiffness_unit().quadratic(v, u);
    CHECK(std::abs(uv - vu) <= 1e-12 * std::max(1.0, std::abs(uv)));
}
