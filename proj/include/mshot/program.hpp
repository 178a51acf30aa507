#pragma once

#include <mshot/grounder.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace mshot {

/// Objective totals per priority level. Levels compare highest first; a
/// missing level reads as 0.
class CostVector {
public:
    using Levels = std::map<std::int64_t, std::int64_t, std::greater<>>;

    CostVector() = default;
    explicit CostVector(Levels levels) : levels_(std::move(levels)) {}

    void add(std::int64_t priority, std::int64_t weight) { levels_[priority] += weight; }
    void set(std::int64_t priority, std::int64_t total) { levels_[priority] = total; }
    [[nodiscard]] std::int64_t at(std::int64_t priority) const;
    [[nodiscard]] const Levels& levels() const noexcept { return levels_; }
    [[nodiscard]] bool empty() const noexcept { return levels_.empty(); }

    friend std::strong_ordering operator<=>(const CostVector& a, const CostVector& b);
    friend bool operator==(const CostVector& a, const CostVector& b) { return (a <=> b) == 0; }

private:
    Levels levels_;
};

enum class Ordering { Less, Equal, Greater };

Ordering compare_costs(const CostVector& a, const CostVector& b);

/// One objective tuple: contributes `weight` at `priority` when any of its
/// conditions (conjunctions of literals) holds.
struct ObjectiveTerm {
    std::int64_t                            weight{0};
    std::int64_t                            priority{0};
    std::vector<Value>                      tuple;
    std::vector<std::vector<GroundLiteral>> conditions;
    friend bool operator==(const ObjectiveTerm&, const ObjectiveTerm&) = default;
};

/// Immutable input to the solver.
struct SolverProgram {
    std::vector<GroundRule>              rules;
    /// Atoms without defining rules whose truth is chosen freely (inputs).
    std::vector<AtomId>                  inputs;
    std::vector<std::pair<AtomId, bool>> assumptions;
    std::vector<ObjectiveTerm>           objective;
    /// Projection used for output and enumeration; ignored when `show_all`.
    std::vector<AtomId>                  shown;
    bool                                 show_all{true};
    /// Ids are in [0, atom_count); id 0 is always false.
    AtomId                               atom_count{1};

    friend bool operator==(const SolverProgram&, const SolverProgram&) = default;
};

/// Objective value of a total interpretation given as a sorted atom set.
CostVector evaluate_cost(const SolverProgram& program, const std::vector<AtomId>& model);

} // namespace mshot
