#pragma once

#include "hcx/hcx.hpp"

// Shared meshes for the test suite, built once per process.
namespace fixtures {

// Unit disk (64-gon) with the concentric inclusion of radius 1/2.
inline const hcx::FemSystem& annulus() {
    static hcx::FemSystem fem = [] {
        hcx::GeometrySpec geo;
        geo.domain = hcx::make_ngon(0, 0, 1.0, 64);
        geo.inclusions.push_back(hcx::make_ngon(0, 0, 0.5, 64));
        return hcx::FemSystem(hcx::generate_mesh(geo, 0.05));
    }();
    return fem;
}

// Unit square with the centered square inclusion [0.4,0.6]^2.
inline const hcx::FemSystem& square_inclusion() {
    static hcx::FemSystem fem = [] {
        hcx::GeometrySpec geo;
        geo.domain = hcx::make_rectangle(0, 0, 1, 1);
        geo.inclusions.push_back(hcx::make_rectangle(0.4, 0.4, 0.6, 0.6));
        return hcx::FemSystem(hcx::generate_mesh(geo, 0.05));
    }();
    return fem;
}

// Unit square with two mirror-image disks of radius 0.15.
inline const hcx::FemSystem& two_disks() {
    static hcx::FemSystem fem = [] {
        hcx::GeometrySpec geo;
        geo.domain = hcx::make_rectangle(0, 0, 1, 1);
        geo.inclusions.push_back(hcx::make_ngon(0.28, 0.5, 0.15, 20));
        geo.inclusions.push_back(hcx::make_ngon(0.72, 0.5, 0.15, 20));
        return hcx::FemSystem(hcx::generate_mesh(geo, 0.05));
    }();
    return fem;
}

// Mixed-role rectangle with two mirror-image disks (high first, low second).
inline const hcx::FemSystem& mixed_rect() {
    static hcx::FemSystem fem = [] {
        hcx::GeometrySpec geo;
        geo.domain = hcx::make_rectangle(0, 0, 1, 0.6);
        geo.inclusions.push_back(hcx::make_ngon(0.3, 0.3, 0.12, 32));
        geo.inclusions.push_back(hcx::make_ngon(0.7, 0.3, 0.12, 32));
        return hcx::FemSystem(hcx::generate_mesh(geo, 0.04));
    }();
    return fem;
}

inline hcx::PiecewiseData data_g_const(const hcx::FemSystem& fem, double g) {
    hcx::PiecewiseData d;
    d.forcing.assign((std::size_t)fem.num_inclusions() + 1, 0.0);
    d.g0 = g;
    return d;
}

inline hcx::PiecewiseData data_g_x(const hcx::FemSystem& fem) {
    hcx::PiecewiseData d;
    d.forcing.assign((std::size_t)fem.num_inclusions() + 1, 0.0);
    d.g1 = 1.0;
    return d;
}

} // namespace fixtures
