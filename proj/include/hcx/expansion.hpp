#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hcx/fem.hpp"

namespace hcx {

enum class ExpansionMode { High, Low, Mixed };

inline const char* to_string(ExpansionMode m) {
    switch (m) {
    case ExpansionMode::High: return "high";
    case ExpansionMode::Low: return "low";
    case ExpansionMode::Mixed: return "mixed";
    }
    return "high";
}

inline ExpansionMode expansion_mode_from_string(const std::string& s) {
    if (s == "high") return ExpansionMode::High;
    if (s == "low") return ExpansionMode::Low;
    if (s == "mixed") return ExpansionMode::Mixed;
    throw ParseError("unknown expansion mode: " + s);
}

/// Contrast-free term list u_first .. u_I with the per-term inclusion
/// constants.  Terms for all modes live in one container with an index offset
/// so that the mixed case (which starts at u_{-1}) needs no special casing.
struct Expansion {
    ExpansionMode mode = ExpansionMode::High;
    int first_index = 0;
    std::vector<FEFunction> terms;
    std::vector<std::vector<double>> constants; // aligned with `terms`; may hold empty rows
    double max_compatibility_defect = 0.0;
    std::string mesh_id;
    std::string scenario_id;

    int order() const { return first_index + (int)terms.size() - 1; }
    bool has_term(int i) const { return i >= first_index && i <= order(); }
    const FEFunction& term(int i) const { return terms[(std::size_t)(i - first_index)]; }
    const std::vector<double>& constants_of(int i) const {
        return constants[(std::size_t)(i - first_index)];
    }
};

/// Partial sum at a given contrast.  High/mixed: sum of contrast^{-i} u_i
/// (mixed includes the contrast * u_{-1} term); low: contrast^{-1} u_{-1} plus
/// sum of contrast^{i} u_i.  Truncation order I counts the non-negative terms.
inline FEFunction evaluate(const Expansion& e, double contrast, int I) {
    if (!(contrast > 0.0))
        throw Error("evaluate: contrast must be positive");
    if (I < 0 || I > e.order())
        throw Error("evaluate: truncation order outside the computed range");
    FEFunction out = zero_function(*e.terms.front().mesh);
    auto axpy = [&](double a, const FEFunction& u) {
        for (std::size_t p = 0; p < out.values.size(); ++p)
            out.values[p] += a * u.values[p];
    };
    if (e.first_index == -1) {
        const double w = (e.mode == ExpansionMode::Low) ? 1.0 / contrast : contrast;
        axpy(w, e.term(-1));
    }
    for (int i = 0; i <= I; ++i) {
        const double w = (e.mode == ExpansionMode::Low) ? std::pow(contrast, i)
                                                        : std::pow(contrast, -i);
        axpy(w, e.term(i));
    }
    return out;
}

inline std::string mesh_fingerprint(const Mesh& mesh) {
    const std::string text = save_mesh(mesh);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

// --- directory serialization -------------------------------------------------
// <dir>/manifest.txt   mode, order, ids and the constants table (CSV rows i,c_1..c_M)
// <dir>/term_<i>.txt   one FEFunction per term, mathematical index in the name

inline void save_expansion(const Expansion& e, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream manifest;
    manifest << "mode " << to_string(e.mode) << "\n";
    manifest << "order " << e.order() << "\n";
    manifest << "first_index " << e.first_index << "\n";
    manifest << "mesh " << e.mesh_id << "\n";
    manifest << "scenario " << e.scenario_id << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", e.max_compatibility_defect);
    manifest << "max_defect " << buf << "\n";
    manifest << "constants\n";
    for (int i = e.first_index; i <= e.order(); ++i) {
        const auto& c = e.constants_of(i);
        if (c.empty())
            continue;
        manifest << i;
        for (double v : c) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            manifest << buf;
        }
        manifest << "\n";
    }
    {
        std::ofstream out(dir + "/manifest.txt");
        if (!out)
            throw IoError("cannot open for writing: " + dir + "/manifest.txt");
        out << manifest.str();
    }
    for (int i = e.first_index; i <= e.order(); ++i)
        save_fefunction_file(e.term(i), dir + "/term_" + std::to_string(i) + ".txt");
}

inline Expansion load_expansion(const std::string& dir, const Mesh& mesh) {
    std::ifstream in(dir + "/manifest.txt");
    if (!in)
        throw IoError("cannot open for reading: " + dir + "/manifest.txt");
    Expansion e;
    int order = -1;
    std::string line;
    bool in_constants = false;
    std::vector<std::pair<int, std::vector<double>>> crows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (in_constants) {
            std::istringstream ls(line);
            std::string cell;
            std::vector<double> row;
            int idx = 0;
            bool first = true;
            while (std::getline(ls, cell, ',')) {
                if (first) {
                    idx = std::stoi(cell);
                    first = false;
                } else {
                    row.push_back(std::stod(cell));
                }
            }
            crows.emplace_back(idx, std::move(row));
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "mode") {
            std::string v;
            ls >> v;
            e.mode = expansion_mode_from_string(v);
        } else if (key == "order") {
            ls >> order;
        } else if (key == "first_index") {
            ls >> e.first_index;
        } else if (key == "mesh") {
            ls >> e.mesh_id;
        } else if (key == "scenario") {
            ls >> e.scenario_id;
        } else if (key == "max_defect") {
            ls >> e.max_compatibility_defect;
        } else if (key == "constants") {
            in_constants = true;
        } else {
            throw ParseError("unknown manifest key: " + key);
        }
    }
    if (order < e.first_index)
        throw ParseError("manifest missing a valid order");
    const int n_terms = order - e.first_index + 1;
    e.terms.resize((std::size_t)n_terms);
    e.constants.assign((std::size_t)n_terms, {});
    for (int i = e.first_index; i <= order; ++i)
        e.terms[(std::size_t)(i - e.first_index)] =
            load_fefunction_file(dir + "/term_" + std::to_string(i) + ".txt", mesh);
    for (auto& [idx, row] : crows) {
        if (idx < e.first_index || idx > order)
            throw ParseError("constants row index outside term range");
        e.constants[(std::size_t)(idx - e.first_index)] = std::move(row);
    }
    return e;
}

} // namespace hcx
