#pragma once

#include <mshot/error.hpp>
#include <mshot/solver.hpp>
#include <mshot/store.hpp>
#include <mshot/syntax.hpp>

#include <condition_variable>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace mshot {

/// Solver configuration adjustable through `Engine::set_conf`.
struct Config {
    /// Number of models to compute; 0 means all.
    std::size_t               models{1};
    /// Luby restart unit in conflicts; 0 disables restarts.
    std::uint32_t             restarts{100};
    std::uint64_t             seed{0};
    /// Explicit enumeration mode; when unset it follows `models`.
    std::optional<SolveMode>  enum_mode;

    friend bool operator==(const Config&, const Config&) = default;
};

/// Per-call solve parameters. Unset fields fall back to the configuration.
struct SolveRequest {
    /// Truth values for declared external atoms, for this call only.
    std::vector<std::pair<Value, bool>> assumptions;
    std::optional<SolveMode>            mode;
    std::optional<std::size_t>          limit;
    CancelToken                         cancel;
};

/// Handle on a background search started by `Engine::asolve`.
class SolveHandle {
public:
    /// Blocks until the search ends; rethrows errors raised by the search.
    SolveResult wait();
    void cancel() const;
    [[nodiscard]] bool done() const;
    /// The result once the search has ended.
    [[nodiscard]] std::optional<SolveResult> result() const;

private:
    friend class Engine;
    struct State {
        mutable std::mutex         mutex;
        std::condition_variable    finished_cv;
        bool                       finished{false};
        SolveResult                result;
        std::exception_ptr         error;
        CancelToken                cancel;
        std::thread                thread;
    };
    explicit SolveHandle(std::shared_ptr<State> state) : state_(std::move(state)) {}
    std::shared_ptr<State> state_;
};

/// A multi-shot grounding and solving session: subprograms are queued with
/// `ground`, instantiated at the next `flush` or `solve`, and accumulated in a
/// store that persists across solve calls.
class Engine {
public:
    explicit Engine(WarningSink warn = {});
    ~Engine();
    Engine(const Engine&)            = delete;
    Engine& operator=(const Engine&) = delete;

    /// Parses a program text and appends its subprograms.
    void load(std::string_view text);
    /// Appends `text` to subprogram `name` with the given parameters.
    void add(const std::string& name, const std::vector<std::string>& params, std::string_view text);
    /// Overrides a `#const` definition; overrides win over the program text.
    void set_const(const std::string& name, const Term& value);

    /// Queues an instantiation request; nothing is grounded until `flush`.
    void ground(const std::string& name, const std::vector<Value>& args = {});
    /// Instantiates all queued requests jointly and joins them in queue order.
    void flush();

    SolveResult solve(const ModelCallback& on_model = {}, SolveRequest request = {});
    /// Flushes on the calling thread and searches in the background.
    SolveHandle asolve(ModelCallback on_model = {}, SolveRequest request = {});

    /// While ground requests are pending, external operations are deferred
    /// and applied in order right after the next flush.
    void assign_external(const Value& atom, bool value);
    void release_external(const Value& atom);

    /// Applies space-separated `key=value` pairs (models, restarts, seed,
    /// enum-mode); `replace` resets to defaults first.
    void set_conf(std::string_view options, bool replace);
    [[nodiscard]] const Config& config() const noexcept { return config_; }

    /// Counters accumulated over all solve calls.
    [[nodiscard]] Statistics get_stats();

    [[nodiscard]] bool has_subprogram(const std::string& name, std::size_t arity) const;
    [[nodiscard]] std::size_t pending() const noexcept { return pending_.size(); }
    [[nodiscard]] const Store& store() const noexcept { return store_; }
    [[nodiscard]] const Value& symbol(AtomId atom) const { return store_.atoms().symbol(atom); }
    [[nodiscard]] std::string dump_ground() const;

private:
    using Key = std::pair<std::string, std::size_t>;

    void merge(std::vector<SubprogramDef> defs);
    void ensure_idle(std::string_view operation);
    void collect_background();
    [[nodiscard]] std::map<std::string, Term> constants() const;
    SolverProgram prepare(const SolveRequest& request);
    [[nodiscard]] SolveOptions options_for(const SolveRequest& request) const;
    void record(const Statistics& stats);

    WarningSink                               warn_;
    std::map<Key, SubprogramDef>              subprograms_;
    std::vector<std::pair<std::string, Term>> program_consts_;
    std::map<std::string, Term>               const_overrides_;
    std::vector<std::pair<std::string, std::vector<Value>>> pending_;
    /// Deferred external operations: nullopt releases, a bool assigns.
    std::vector<std::pair<Value, std::optional<bool>>> deferred_;
    Store                                     store_;
    Config                                    config_;
    Statistics                                stats_;
    std::shared_ptr<SolveHandle::State>       background_;
};

} // namespace mshot
