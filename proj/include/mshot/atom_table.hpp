#pragma once

#include <mshot/value.hpp>

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace mshot {

using AtomId = std::uint32_t;

/// Bijection between ground atoms and dense ids. Id 0 is reserved for the
/// always-false atom; ids are never reused.
class AtomTable {
public:
    AtomTable() { symbols_.push_back(Value::function("#false")); }

    AtomId intern(const Value& atom) {
        auto [it, inserted] = ids_.try_emplace(atom, static_cast<AtomId>(symbols_.size()));
        if (inserted) { symbols_.push_back(atom); }
        return it->second;
    }

    [[nodiscard]] std::optional<AtomId> find(const Value& atom) const {
        if (auto it = ids_.find(atom); it != ids_.end()) { return it->second; }
        return std::nullopt;
    }

    [[nodiscard]] const Value& symbol(AtomId id) const { return symbols_.at(id); }
    /// One past the largest id handed out.
    [[nodiscard]] AtomId next_id() const noexcept { return static_cast<AtomId>(symbols_.size()); }
    [[nodiscard]] std::size_t size() const noexcept { return symbols_.size() - 1; }

private:
    std::unordered_map<Value, AtomId, ValueHash> ids_;
    std::vector<Value>                           symbols_;
};

} // namespace mshot
