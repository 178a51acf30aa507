#pragma once

// Shared helpers for the test binaries: a random ground program generator and
// model-set utilities used by the oracle comparisons.

#include <mshot/control.hpp>
#include <mshot/solver.hpp>

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace mshot::testing {

struct RandomShape {
    AtomId      max_atoms{10};
    std::size_t max_rules{15};
    bool        choices{true};
    bool        inputs{true};
    bool        objective{false};
};

inline SolverProgram random_program(std::mt19937& rng, const RandomShape& shape) {
    auto pick = [&](std::uint32_t lo, std::uint32_t hi) { return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng); };
    SolverProgram p;
    const AtomId n = pick(1, shape.max_atoms);
    p.atom_count   = n + 1;
    auto atom      = [&] { return static_cast<AtomId>(pick(1, n)); };
    const std::size_t rules = pick(0, static_cast<std::uint32_t>(shape.max_rules));
    for (std::size_t i = 0; i < rules; ++i) {
        GroundRule r;
        const std::uint32_t kind = pick(0, 9);
        if (kind < 6) {
            r.head = atom();
        } else if (kind < 8 && shape.choices) {
            GroundChoice c;
            for (std::uint32_t k = pick(1, 3); k > 0; --k) { c.atoms.push_back(atom()); }
            if (pick(0, 2) == 0) { c.lower = static_cast<std::int64_t>(pick(0, 2)); }
            if (pick(0, 2) == 0) { c.upper = static_cast<std::int64_t>(pick(0, 2)); }
            r.head = c;
        } else if (kind < 8) {
            r.head = atom();
        }
        for (std::uint32_t k = pick(0, 2); k > 0; --k) { r.pos.push_back(atom()); }
        for (std::uint32_t k = pick(0, 2); k > 0; --k) { r.neg.push_back(atom()); }
        p.rules.push_back(std::move(r));
    }
    if (shape.inputs && pick(0, 2) == 0) {
        std::set<AtomId> defined;
        for (const auto& r : p.rules) {
            for (AtomId a : r.head_atoms()) { defined.insert(a); }
        }
        for (AtomId a = 1; a <= n; ++a) {
            if (defined.count(a) == 0 && pick(0, 1) == 0) {
                p.inputs.push_back(a);
                if (pick(0, 1) == 0) { p.assumptions.emplace_back(a, pick(0, 1) == 1); }
            }
        }
    }
    if (shape.objective) {
        for (std::uint32_t k = pick(1, 4); k > 0; --k) {
            ObjectiveTerm t;
            t.weight   = static_cast<std::int64_t>(pick(0, 10)) - 5;
            t.priority = pick(1, 2);
            t.tuple    = {Value::integer(t.weight), Value::integer(t.priority), Value::integer(k)};
            std::vector<GroundLiteral> cond;
            for (std::uint32_t c = pick(1, 2); c > 0; --c) { cond.push_back({atom(), pick(0, 3) == 0}); }
            t.conditions.push_back(cond);
            p.objective.push_back(std::move(t));
        }
    }
    if (pick(0, 3) == 0) {
        p.show_all = false;
        for (AtomId a = 1; a <= n; ++a) {
            if (pick(0, 1) == 0) { p.shown.push_back(a); }
        }
    }
    return p;
}

/// Projection of `atoms` onto the program's shown atoms.
inline std::vector<AtomId> project(const SolverProgram& p, const std::vector<AtomId>& atoms) {
    if (p.show_all) { return atoms; }
    std::vector<AtomId> out;
    std::set_intersection(atoms.begin(), atoms.end(), p.shown.begin(), p.shown.end(), std::back_inserter(out));
    return out;
}

using ModelSet = std::set<std::vector<AtomId>>;

inline ModelSet solve_all(const SolverProgram& p, const SolveOptions& base = {}) {
    ModelSet      out;
    SolveOptions  options = base;
    options.mode          = SolveMode::All;
    options.limit         = 0;
    solve(p, [&](const Model& m) {
        out.insert(m.shown);
        return true;
    }, options);
    return out;
}

inline ModelSet brute_projected(const SolverProgram& p) {
    ModelSet out;
    for (const auto& m : brute_force_models(p)) { out.insert(project(p, m)); }
    return out;
}

/// Lexicographic minimum cost over the brute-force models.
inline std::optional<CostVector> brute_optimum(const SolverProgram& p) {
    std::optional<CostVector> best;
    for (const auto& m : brute_force_models(p)) {
        CostVector c = evaluate_cost(p, m);
        if (!best || c < *best) { best = c; }
    }
    return best;
}

/// Shown atoms of every model, as sorted text sets.
inline std::set<std::set<std::string>> solve_text(Engine& engine, SolveRequest request = {}) {
    std::set<std::set<std::string>> out;
    if (!request.mode) { request.mode = SolveMode::All; }
    if (!request.limit) { request.limit = 0; }
    engine.solve([&](const Model& m) {
        std::set<std::string> atoms;
        for (AtomId a : m.shown) { atoms.insert(engine.symbol(a).to_string()); }
        out.insert(atoms);
        return true;
    }, std::move(request));
    return out;
}

} // namespace mshot::testing
