#pragma once

#include <mshot/atom_table.hpp>
#include <mshot/error.hpp>
#include <mshot/grounder.hpp>
#include <mshot/program.hpp>

#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

namespace mshot {

enum class ExternalStatus { Free, Defined, Released };

struct ExternalState {
    ExternalStatus status{ExternalStatus::Free};
    /// Assigned truth value; meaningful while Free.
    bool value{false};
    friend bool operator==(const ExternalState&, const ExternalState&) = default;
};

struct IncrementRecord {
    std::uint32_t       tag{0};
    std::vector<AtomId> defined;
    std::size_t         first_rule{0};
    std::size_t         end_rule{0};
    std::vector<AtomId> external_decls;
};

/// The accumulated ground program. Single owner: all mutators require
/// exclusive access; `snapshot` returns an independent value.
class Store {
public:
    explicit Store(WarningSink warn = {});

    [[nodiscard]] AtomTable& atoms() noexcept { return atoms_; }
    [[nodiscard]] const AtomTable& atoms() const noexcept { return atoms_; }
    [[nodiscard]] Domain& domain() noexcept { return domain_; }
    [[nodiscard]] const Domain& domain() const noexcept { return domain_; }

    /// Tag the next joined unit should carry.
    [[nodiscard]] std::uint32_t next_tag() const noexcept { return static_cast<std::uint32_t>(increments_.size()); }

    /// Appends a unit after checking that it neither redefines atoms of earlier
    /// increments nor closes a positive cycle through them. On error the store
    /// is unchanged.
    void join_module(GroundUnit unit);

    void assign_external(const Value& atom, bool value);
    void assign_external(AtomId atom, bool value);
    void release_external(const Value& atom);
    void release_external(AtomId atom);

    [[nodiscard]] std::optional<ExternalState> external_state(const Value& atom) const;
    [[nodiscard]] bool is_external(AtomId atom) const;

    /// Per-call overrides in `extra` replace the stored assignment of the same atom.
    [[nodiscard]] SolverProgram snapshot(std::span<const std::pair<AtomId, bool>> extra = {}) const;

    [[nodiscard]] std::span<const GroundUnit> units() const noexcept { return units_; }
    [[nodiscard]] std::span<const IncrementRecord> increments() const noexcept { return increments_; }
    [[nodiscard]] std::size_t rule_count() const noexcept { return rules_.size(); }
    [[nodiscard]] const std::set<Signature>& shown() const noexcept { return shown_; }

private:
    AtomId resolve(const Value& atom) const;
    void   check_cycles(const GroundUnit& unit, std::uint32_t tag) const;

    WarningSink                                       warn_;
    AtomTable                                         atoms_;
    Domain                                            domain_;
    std::vector<GroundRule>                           rules_;
    std::vector<std::uint32_t>                        rule_tags_;
    std::vector<GroundUnit>                           units_;
    std::vector<IncrementRecord>                      increments_;
    std::unordered_map<AtomId, std::uint32_t>         defined_in_;
    std::map<AtomId, ExternalState>                   externals_;
    std::map<std::pair<std::int64_t, std::vector<Value>>, std::size_t> objective_index_;
    std::vector<ObjectiveTerm>                        objective_;
    std::set<Signature>                               shown_;
};

} // namespace mshot
