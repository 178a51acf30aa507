#include <mshot/program.hpp>

#include <algorithm>

namespace mshot {

std::int64_t CostVector::at(std::int64_t priority) const {
    auto it = levels_.find(priority);
    return it == levels_.end() ? 0 : it->second;
}

std::strong_ordering operator<=>(const CostVector& a, const CostVector& b) {
    auto ia = a.levels_.begin();
    auto ib = b.levels_.begin();
    // Walk both level maps from the highest priority down, reading gaps as 0.
    while (ia != a.levels_.end() || ib != b.levels_.end()) {
        std::int64_t prio = 0;
        if (ia == a.levels_.end()) {
            prio = ib->first;
        } else if (ib == b.levels_.end()) {
            prio = ia->first;
        } else {
            prio = std::max(ia->first, ib->first);
        }
        std::int64_t va = (ia != a.levels_.end() && ia->first == prio) ? (ia++)->second : 0;
        std::int64_t vb = (ib != b.levels_.end() && ib->first == prio) ? (ib++)->second : 0;
        if (auto c = va <=> vb; c != 0) { return c; }
    }
    return std::strong_ordering::equal;
}

Ordering compare_costs(const CostVector& a, const CostVector& b) {
    auto c = a <=> b;
    if (c < 0) { return Ordering::Less; }
    if (c > 0) { return Ordering::Greater; }
    return Ordering::Equal;
}

CostVector evaluate_cost(const SolverProgram& program, const std::vector<AtomId>& model) {
    auto holds = [&](AtomId a) { return std::binary_search(model.begin(), model.end(), a); };
    CostVector cost;
    for (const auto& term : program.objective) {
        cost.add(term.priority, 0);
        bool any = std::any_of(term.conditions.begin(), term.conditions.end(), [&](const auto& cond) {
            return std::all_of(cond.begin(), cond.end(), [&](const GroundLiteral& l) { return holds(l.atom) != l.negated; });
        });
        if (any) { cost.add(term.priority, term.weight); }
    }
    return cost;
}

} // namespace mshot
