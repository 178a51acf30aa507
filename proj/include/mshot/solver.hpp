#pragma once

#include <mshot/program.hpp>

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace mshot {

enum class SolveMode { First, All, Intersection, Union };
enum class SolveStatus { Sat, Unsat, Interrupted };

std::string_view to_string(SolveMode mode);
std::string_view to_string(SolveStatus status);

struct Model {
    /// True atoms, sorted.
    std::vector<AtomId> atoms;
    /// Shown projection, sorted by id.
    std::vector<AtomId> shown;
    CostVector          cost;
    /// 1-based discovery ordinal.
    std::size_t         index{0};

    [[nodiscard]] bool contains(AtomId atom) const;
};

struct Statistics {
    std::uint64_t choices{0};
    std::uint64_t conflicts{0};
    std::uint64_t restarts{0};
    std::uint64_t models_found{0};
    std::uint64_t rules_ground{0};
    std::uint64_t atoms{0};
    std::uint64_t solve_calls{0};
    double        last_solve_time{0.0};
};

/// Shared cancellation flag; copies refer to the same flag.
class CancelToken {
public:
    CancelToken() : flag_(std::make_shared<std::atomic<bool>>(false)) {}

    void cancel() const noexcept { flag_->store(true, std::memory_order_relaxed); }
    [[nodiscard]] bool cancelled() const noexcept { return flag_->load(std::memory_order_relaxed); }

private:
    std::shared_ptr<std::atomic<bool>> flag_;
};

struct SolveOptions {
    SolveMode     mode{SolveMode::First};
    /// Maximum number of models to enumerate (0 = no limit). Optimization
    /// ignores it and always runs to a proven optimum.
    std::size_t   limit{0};
    std::uint64_t seed{0};
    /// Luby restart unit in conflicts; 0 disables restarts.
    std::uint32_t restart_unit{100};
};

struct SolveResult {
    SolveStatus               status{SolveStatus::Unsat};
    std::size_t               models{0};
    /// Set when the objective is nonempty and at least one model was found.
    std::optional<CostVector> optimum;
    /// True when the optimum was proven (search space exhausted).
    bool                      optimum_proven{false};
    /// Search counters of this call only.
    Statistics                stats;
};

/// Return false to stop the search after this model.
using ModelCallback = std::function<bool(const Model&)>;

/// Stable models of `program` by conflict-driven search over the completion
/// with unfounded-set checks. With a nonempty objective, runs branch-and-bound
/// and reports every improving model. Intersection/Union deliver a single
/// synthetic model holding the combined shown projection.
SolveResult solve(const SolverProgram& program, const ModelCallback& on_model, const SolveOptions& options = {},
                  const CancelToken& cancel = {});

/// Reduct test: `candidate` (sorted ids) is the least model of the reduct and
/// respects the bounds of choice rules and the assumptions.
bool check_stable(const SolverProgram& program, const std::vector<AtomId>& candidate);

/// All stable models by exhaustive enumeration (test oracle). Throws TooLarge
/// above 20 atoms.
std::vector<std::vector<AtomId>> brute_force_models(const SolverProgram& program);

} // namespace mshot
