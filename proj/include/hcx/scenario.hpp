#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hcx/expansion.hpp"
#include "hcx/expansion_mixed.hpp"
#include "hcx/triangulate.hpp"

namespace hcx {

/// Declarative experiment description: geometry, coefficient mode, data,
/// contrast sweep and expansion order.
struct Scenario {
    std::string name = "scenario";
    ExpansionMode mode = ExpansionMode::High;
    GeometrySpec geometry;
    std::vector<std::string> roles; // per inclusion: "high" | "low"
    PiecewiseData data;
    double h = 0.05;
    int order = 8;
    std::vector<double> sweep;
    std::string output_dir = "out";
    double tol = 1e-12; // linear solver tolerance (CLI flag, not a config key)

    int num_inclusions() const { return (int)geometry.inclusions.size(); }

    MixedRoles mixed_roles() const {
        MixedRoles r{0, 0};
        for (std::size_t i = 0; i < roles.size(); ++i) {
            if (roles[i] == "high")
                r.high = (int)i + 1;
            else if (roles[i] == "low")
                r.low = (int)i + 1;
        }
        return r;
    }
};

struct ScenarioParseOutcome {
    Scenario scenario;
    std::vector<std::string> errors; // "field.path: message"
    std::string not_implemented;     // structurally valid but unsupported configuration
};

namespace detail {

inline bool parse_shape(const std::string& value, Polygon& out, std::string& err) {
    std::istringstream in(value);
    std::string kind;
    in >> kind;
    if (kind == "rect") {
        double x0, y0, x1, y1;
        if (!(in >> x0 >> y0 >> x1 >> y1)) {
            err = "rect needs `rect x0 y0 x1 y1`";
            return false;
        }
        if (!(x1 > x0) || !(y1 > y0)) {
            err = "rect extent is empty";
            return false;
        }
        out = make_rectangle(x0, y0, x1, y1);
    } else if (kind == "disk") {
        double cx, cy, r;
        int n = 64;
        if (!(in >> cx >> cy >> r)) {
            err = "disk needs `disk cx cy r [n]`";
            return false;
        }
        in >> n;
        if (!(r > 0.0) || n < 8) {
            err = "disk needs r > 0 and n >= 8";
            return false;
        }
        out = make_ngon(cx, cy, r, n);
    } else if (kind == "polygon") {
        std::vector<Point2> pts;
        double x, y;
        while (in >> x >> y)
            pts.push_back({x, y});
        if (pts.size() < 3) {
            err = "polygon needs at least 3 `x y` pairs";
            return false;
        }
        out = Polygon{std::move(pts)};
    } else {
        err = "unknown shape `" + kind + "` (rect | disk | polygon)";
        return false;
    }
    std::string rest;
    if (in >> rest) {
        err = "trailing tokens after shape";
        return false;
    }
    return true;
}

inline bool parse_numbers(const std::string& value, std::vector<double>& out) {
    std::istringstream in(value);
    out.clear();
    double v;
    while (in >> v)
        out.push_back(v);
    return in.eof() && !out.empty();
}

} // namespace detail

/// Parses the flat key-value scenario format.  Returns the scenario plus a
/// list of field-level errors; the scenario is usable only when the list is
/// empty.
inline ScenarioParseOutcome parse_scenario_checked(const std::string& text) {
    ScenarioParseOutcome out;
    Scenario& sc = out.scenario;
    auto fail = [&](const std::string& field, const std::string& what) {
        out.errors.push_back(field + ": " + what);
    };

    std::map<int, Polygon> inclusion_shapes;
    std::map<int, std::string> inclusion_roles;
    std::map<int, double> forcing;
    bool have_domain = false;
    bool have_sweep_eta = false, have_sweep_eps = false;
    std::vector<double> sweep_values;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::istringstream probe(line);
            std::string tok;
            if (probe >> tok)
                fail("line " + std::to_string(lineno), "expected `key = value`");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            fail("line " + std::to_string(lineno), "missing key");
            continue;
        }

        if (key == "name") {
            sc.name = value;
        } else if (key == "mode") {
            if (value == "high") sc.mode = ExpansionMode::High;
            else if (value == "low") sc.mode = ExpansionMode::Low;
            else if (value == "mixed") sc.mode = ExpansionMode::Mixed;
            else fail("mode", "must be high, low or mixed");
        } else if (key == "geometry.domain") {
            std::string err;
            if (!detail::parse_shape(value, sc.geometry.domain, err))
                fail("geometry.domain", err);
            else
                have_domain = true;
        } else if (key.rfind("inclusion.", 0) == 0) {
            const std::string rest = key.substr(10);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) {
                fail(key, "expected inclusion.<k>.shape or inclusion.<k>.role");
                continue;
            }
            int k = 0;
            try {
                k = std::stoi(rest.substr(0, dot));
            } catch (...) {
                fail(key, "inclusion index is not a number");
                continue;
            }
            if (k < 1) {
                fail(key, "inclusion indices start at 1");
                continue;
            }
            const std::string attr = rest.substr(dot + 1);
            if (attr == "shape") {
                Polygon poly;
                std::string err;
                if (!detail::parse_shape(value, poly, err))
                    fail(key, err);
                else
                    inclusion_shapes[k] = std::move(poly);
            } else if (attr == "role") {
                if (value != "high" && value != "low")
                    fail(key, "role must be high or low");
                else
                    inclusion_roles[k] = value;
            } else {
                fail(key, "unknown inclusion attribute `" + attr + "`");
            }
        } else if (key.rfind("forcing.d", 0) == 0) {
            int k = -1;
            try {
                k = std::stoi(key.substr(9));
            } catch (...) {
            }
            if (k < 0) {
                fail(key, "expected forcing.d<subdomain>");
                continue;
            }
            try {
                forcing[k] = std::stod(value);
            } catch (...) {
                fail(key, "not a number");
            }
        } else if (key == "boundary.g") {
            std::vector<double> g;
            if (!detail::parse_numbers(value, g) || g.empty() || g.size() > 3)
                fail("boundary.g", "expected 1 to 3 coefficients `g0 [g1 g2]`");
            else {
                sc.data.g0 = g[0];
                sc.data.g1 = g.size() > 1 ? g[1] : 0.0;
                sc.data.g2 = g.size() > 2 ? g[2] : 0.0;
            }
        } else if (key == "mesh.h") {
            try {
                sc.h = std::stod(value);
            } catch (...) {
                sc.h = -1.0;
            }
            if (!(sc.h > 0.0))
                fail("mesh.h", "must be a positive number");
        } else if (key == "order") {
            try {
                sc.order = std::stoi(value);
            } catch (...) {
                sc.order = -1;
            }
            if (sc.order < 0)
                fail("order", "must be a non-negative integer");
        } else if (key == "sweep.eta") {
            if (!detail::parse_numbers(value, sweep_values))
                fail("sweep.eta", "expected a list of numbers");
            else
                have_sweep_eta = true;
        } else if (key == "sweep.epsilon") {
            if (!detail::parse_numbers(value, sweep_values))
                fail("sweep.epsilon", "expected a list of numbers");
            else
                have_sweep_eps = true;
        } else if (key == "output") {
            sc.output_dir = value;
        } else {
            fail(key, "unknown key");
        }
    }

    if (!have_domain)
        fail("geometry.domain", "required");

    // contiguous inclusion numbering
    const int M = inclusion_shapes.empty() ? 0 : inclusion_shapes.rbegin()->first;
    for (int k = 1; k <= M; ++k)
        if (!inclusion_shapes.count(k))
            fail("inclusion." + std::to_string(k) + ".shape",
                 "inclusion indices must be contiguous from 1");
    for (const auto& [k, role] : inclusion_roles)
        if (!inclusion_shapes.count(k))
            fail("inclusion." + std::to_string(k) + ".role", "no shape for this inclusion");
    if (!out.errors.empty())
        return out;

    sc.geometry.inclusions.clear();
    sc.roles.assign((std::size_t)M, "");
    for (int k = 1; k <= M; ++k) {
        sc.geometry.inclusions.push_back(inclusion_shapes[k]);
        const auto it = inclusion_roles.find(k);
        if (it != inclusion_roles.end())
            sc.roles[(std::size_t)k - 1] = it->second;
    }

    // roles default by mode, then mode/role consistency
    const char* default_role = sc.mode == ExpansionMode::Low ? "low" : "high";
    for (auto& r : sc.roles)
        if (r.empty())
            r = (sc.mode == ExpansionMode::Mixed) ? "" : default_role;
    if (sc.mode == ExpansionMode::High) {
        for (std::size_t i = 0; i < sc.roles.size(); ++i)
            if (sc.roles[i] != "high")
                fail("inclusion." + std::to_string(i + 1) + ".role",
                     "high mode allows only high inclusions");
    } else if (sc.mode == ExpansionMode::Low) {
        for (std::size_t i = 0; i < sc.roles.size(); ++i)
            if (sc.roles[i] != "low")
                fail("inclusion." + std::to_string(i + 1) + ".role",
                     "low mode allows only low inclusions");
    } else {
        int highs = 0, lows = 0;
        for (const auto& r : sc.roles) {
            highs += r == "high";
            lows += r == "low";
        }
        if (M > 2 && highs >= 1 && lows >= 1 && highs + lows == M)
            out.not_implemented = "only the two-inclusion mixed configuration is supported";
        else if (M != 2 || highs != 1 || lows != 1)
            fail("mode", "mixed mode requires two inclusions with distinct roles");
    }

    sc.data.forcing.assign((std::size_t)M + 1, 0.0);
    for (const auto& [k, f] : forcing) {
        if (k > M)
            fail("forcing.d" + std::to_string(k), "no such subdomain");
        else
            sc.data.forcing[(std::size_t)k] = f;
    }

    if (sc.mode == ExpansionMode::Low) {
        if (have_sweep_eta)
            fail("sweep.eta", "low mode sweeps epsilon; use sweep.epsilon");
        sc.sweep = have_sweep_eps ? sweep_values
                                  : std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5};
    } else {
        if (have_sweep_eps)
            fail("sweep.epsilon", "high/mixed modes sweep eta; use sweep.eta");
        sc.sweep = have_sweep_eta ? sweep_values
                                  : std::vector<double>{1e2, 1e3, 1e4, 1e5};
    }
    for (double v : sc.sweep)
        if (!(v > 0.0))
            fail(sc.mode == ExpansionMode::Low ? "sweep.epsilon" : "sweep.eta",
                 "contrast values must be positive");
    std::sort(sc.sweep.begin(), sc.sweep.end());
    if (sc.mode == ExpansionMode::Low)
        std::reverse(sc.sweep.begin(), sc.sweep.end()); // largest epsilon first

    return out;
}

/// Throwing wrapper: ConfigError lists every field-level problem.
inline Scenario parse_scenario(const std::string& text) {
    ScenarioParseOutcome out = parse_scenario_checked(text);
    if (!out.errors.empty()) {
        std::string msg;
        for (const auto& e : out.errors) {
            if (!msg.empty())
                msg += "; ";
            msg += e;
        }
        throw ConfigError(msg);
    }
    if (!out.not_implemented.empty())
        throw NotImplemented(out.not_implemented);
    return out.scenario;
}

inline Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

inline Mesh build_mesh(const Scenario& sc) { return generate_mesh(sc.geometry, sc.h); }

} // namespace hcx
