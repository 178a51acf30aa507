// Acceptance runner: one PASS or FAIL line per end-to-end criterion, followed
// by a summary. Exits non-zero when any criterion fails.

#include "support.hpp"

#include <mshot/cli.hpp>
#include <mshot/control.hpp>
#include <mshot/syntax.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>
#include <thread>

using namespace mshot;
namespace fs = std::filesystem;
using Clock  = std::chrono::steady_clock;

namespace {

const fs::path programs_dir{MSHOT_PROGRAMS_DIR};

/// Raised by `expect` with a description of the violated check.
struct Failure {
    std::string what;
};

void expect(bool ok, const std::string& what) {
    if (!ok) { throw Failure{what}; }
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Value atom(const std::string& text) { return evaluate_ground(parse_term(text)); }

ErrorCode error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    throw Failure{"expected an error"};
}

std::pair<int, std::string> run_cli(const cli::Config& config) {
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(config, out, err);
    return {code, out.str() + err.str()};
}

// ---------------------------------------------------------------------------

void worked_example() {
    cli::Config plain;
    plain.files = {(programs_dir / "acid.lp").string()};
    auto [code, out] = run_cli(plain);
    expect(code == cli::exit_sat, "default mode exit code " + std::to_string(code));
    expect(out == "Answer: 1\na(1) a(2)\nSATISFIABLE\n", "default mode output: " + out);

    cli::Config script = plain;
    script.mode        = cli::Mode::Script;
    script.script      = (programs_dir / "acid42.script").string();
    std::tie(code, out) = run_cli(script);
    expect(code == cli::exit_sat, "script mode exit code");
    expect(out == "Answer: 1\nb(42)\nSATISFIABLE\n", "script mode output: " + out);
}

void external_lifecycle() {
    Engine e;
    e.load("#external q(1). #external q(2). a :- q(1). b :- q(2), not a. #show a/0. #show b/0.");
    e.ground("base");
    expect(testing::solve_text(e) == std::set<std::set<std::string>>{{}}, "externals default to false");
    e.assign_external(atom("q(1)"), true);
    expect(testing::solve_text(e) == std::set<std::set<std::string>>{{"a"}}, "assign true");
    e.assign_external(atom("q(1)"), false);
    e.assign_external(atom("q(2)"), true);
    expect(testing::solve_text(e) == std::set<std::set<std::string>>{{"b"}}, "reassign");
    e.release_external(atom("q(2)"));
    expect(testing::solve_text(e) == std::set<std::set<std::string>>{{}}, "release makes the atom false");
    expect(error_of([&] { e.assign_external(atom("q(2)"), true); }) == ErrorCode::AlreadyReleased, "assign after release");
    expect(error_of([&] { e.release_external(atom("q(2)")); }) == ErrorCode::AlreadyReleased, "double release");
    expect(error_of([&] { e.assign_external(atom("a"), true); }) == ErrorCode::AlreadyDefined, "assign a defined atom");
    expect(error_of([&] { e.assign_external(atom("zz"), true); }) == ErrorCode::NotExternal, "assign an unknown atom");

    // A later increment may define a free external; it stops being an input.
    e.add("later", {}, "q(1) :- c. c.");
    e.ground("later");
    expect(testing::solve_text(e) == std::set<std::set<std::string>>{{"a"}}, "definition overrides the assignment");
    expect(e.store().external_state(atom("q(1)"))->status == ExternalStatus::Defined, "status becomes Defined");
}

/// Random ground programs over atoms x0..xn split into parts; every
/// rule only refers to atoms of its own or an earlier part.
void compositionality() {
    std::mt19937 rng(2024);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int round = 0; round < 200; ++round) {
        const int parts = pick(1, 4);
        const int per   = pick(1, 4);
        std::vector<std::string> texts(static_cast<std::size_t>(parts));
        auto name = [](int a) { return "x(" + std::to_string(a) + ")"; };
        for (int part = 0; part < parts; ++part) {
            const int lo = part * per;
            const int hi = lo + per - 1;
            std::string& t = texts[static_cast<std::size_t>(part)];
            for (int r = pick(1, 5); r > 0; --r) {
                std::string body;
                for (int k = pick(0, 2); k > 0; --k) { body += (body.empty() ? " :- " : ", ") + name(pick(0, hi)); }
                for (int k = pick(0, 1); k > 0; --k) { body += (body.empty() ? " :- not " : ", not ") + name(pick(0, hi)); }
                switch (pick(0, 3)) {
                    case 0: t += "{ " + name(pick(lo, hi)) + "; " + name(pick(lo, hi)) + " }" + body + ".\n"; break;
                    case 1:
                        if (!body.empty()) {
                            t += ":-" + body.substr(3) + ".\n";
                            break;
                        }
                        [[fallthrough]];
                    default: t += name(pick(lo, hi)) + body + ".\n"; break;
                }
            }
        }
        std::string whole;
        Engine multi;
        for (int part = 0; part < parts; ++part) {
            const std::string n = "part" + std::to_string(part);
            multi.add(n, {}, texts[static_cast<std::size_t>(part)]);
            multi.ground(n);
            multi.flush();
            whole += texts[static_cast<std::size_t>(part)];
        }
        Engine single;
        single.load(whole);
        single.ground("base");
        expect(testing::solve_text(multi) == testing::solve_text(single), "multi-shot differs from one-shot on:\n" + whole);
    }
}

void random_oracle() {
    std::mt19937 rng(99);
    for (int i = 0; i < 1000; ++i) {
        testing::RandomShape shape;
        shape.max_atoms = 12;
        shape.max_rules = 18;
        shape.objective = (i % 2) == 1;
        auto p = testing::random_program(rng, shape);
        // Enumeration with an objective only reports improving models, so the
        // model sets are compared on the program without it.
        auto plain = p;
        plain.objective.clear();
        expect(testing::solve_all(plain) == testing::brute_projected(plain), "model set mismatch at program " + std::to_string(i));
        if (shape.objective) {
            auto expected = testing::brute_optimum(p);
            auto r        = solve(p, {});
            expect(r.optimum.has_value() == expected.has_value(), "optimum presence at program " + std::to_string(i));
            if (expected) {
                expect(*r.optimum == *expected && r.optimum_proven, "optimum value at program " + std::to_string(i));
            }
        }
    }
}

/// Replays `move(D,P,t)` atoms on three pegs; disk 1 is the largest.
bool valid_hanoi_plan(const std::vector<std::string>& atoms, std::size_t steps) {
    std::map<std::size_t, std::pair<int, char>> moves;
    std::regex move_re(R"(move\((\d+),([abc]),(\d+)\))");
    for (const auto& a : atoms) {
        std::smatch m;
        if (!std::regex_match(a, m, move_re)) { return false; }
        if (!moves.emplace(std::stoul(m[3]), std::pair{std::stoi(m[1]), m[2].str()[0]}).second) { return false; }
    }
    if (moves.size() != steps) { return false; }
    std::map<char, std::vector<int>> pegs{{'a', {1, 2, 3}}, {'b', {}}, {'c', {}}};
    for (std::size_t t = 1; t <= steps; ++t) {
        auto it = moves.find(t);
        if (it == moves.end()) { return false; }
        auto [disk, target] = it->second;
        char from           = 0;
        for (auto& [peg, stack] : pegs) {
            if (!stack.empty() && stack.back() == disk) { from = peg; }
        }
        if (from == 0 || from == target) { return false; }
        auto& dest = pegs[target];
        if (!dest.empty() && dest.back() > disk) { return false; }
        pegs[from].pop_back();
        dest.push_back(disk);
    }
    return pegs['c'] == std::vector<int>{1, 2, 3};
}

void towers_of_hanoi() {
    Engine e;
    // Each file starts in the base subprogram, as on the command line.
    e.load(slurp(programs_dir / "tohE.lp"));
    e.load(slurp(programs_dir / "tohI.lp"));
    e.ground("base");
    for (std::int64_t step = 1; step <= 10; ++step) {
        e.ground("cumulative", {Value::integer(step)});
        e.assign_external(atom("query(" + std::to_string(step) + ")"), true);
        std::vector<std::string> plan;
        auto r = e.solve([&](const Model& m) {
            for (AtomId a : m.shown) { plan.push_back(e.symbol(a).to_string()); }
            return true;
        });
        if (step < 7) {
            expect(r.status == SolveStatus::Unsat, "step " + std::to_string(step) + " should be unsatisfiable");
            e.release_external(atom("query(" + std::to_string(step) + ")"));
            continue;
        }
        expect(r.status == SolveStatus::Sat, "step 7 should be satisfiable");
        expect(valid_hanoi_plan(plan, 7), "the plan fails the independent simulator");
        return;
    }
}

void volatile_objective() {
    cli::Config config;
    config.mode   = cli::Mode::Script;
    config.files  = {(programs_dir / "volatile.lp").string()};
    config.script = (programs_dir / "volatile.script").string();
    auto [code, out] = run_cli(config);
    expect(code == cli::exit_sat, "exit code " + std::to_string(code));
    std::regex opt_re(R"(Optimization: (-?\d+))");
    std::vector<std::string> values;
    for (std::sregex_iterator it(out.begin(), out.end(), opt_re), end; it != end; ++it) { values.push_back((*it)[1]); }
    expect(values.size() >= 2, "two optimization results expected:\n" + out);
    // Each solve reports improving costs; compare the last value of each call.
    auto first_call  = out.substr(0, out.find("OPTIMUM FOUND"));
    auto second_call = out.substr(out.find("OPTIMUM FOUND") + 13);
    auto last_value  = [&](const std::string& s) {
        std::string v;
        for (std::sregex_iterator it(s.begin(), s.end(), opt_re), end; it != end; ++it) { v = (*it)[1]; }
        return v;
    };
    expect(last_value(first_call) == "2", "active objective optimum:\n" + out);
    expect(last_value(second_call) == "0", "inactive objective optimum:\n" + out);
    expect(second_call.find("OPTIMUM FOUND") != std::string::npos, "second call proves its optimum");
}

void enumeration_modes() {
    std::mt19937 rng(4);
    for (int i = 0; i < 200; ++i) {
        auto p      = testing::random_program(rng, {});
        auto models = testing::brute_projected(p);
        auto single = [&](SolveMode mode) {
            std::vector<std::vector<AtomId>> out;
            auto r = solve(p, [&](const Model& m) { return out.push_back(m.shown), true; }, {mode});
            return std::pair{r.status, out};
        };
        const std::string at = " at program " + std::to_string(i);
        auto [first_status, first] = single(SolveMode::First);
        auto [inter_status, inter] = single(SolveMode::Intersection);
        auto [union_status, uni]   = single(SolveMode::Union);
        if (models.empty()) {
            expect(first_status == SolveStatus::Unsat && first.empty(), "first on unsat" + at);
            expect(inter.empty() && uni.empty(), "brave/cautious on unsat" + at);
            continue;
        }
        expect(first.size() == 1 && models.count(first[0]) == 1, "first" + at);
        std::vector<AtomId> expected_inter = *models.begin();
        std::set<AtomId>    expected_union;
        for (const auto& m : models) {
            std::vector<AtomId> tmp;
            std::set_intersection(expected_inter.begin(), expected_inter.end(), m.begin(), m.end(), std::back_inserter(tmp));
            expected_inter = tmp;
            expected_union.insert(m.begin(), m.end());
        }
        expect(inter.size() == 1 && inter[0] == expected_inter, "intersection" + at);
        expect(uni.size() == 1 && uni[0] == std::vector<AtomId>(expected_union.begin(), expected_union.end()), "union" + at);
        expect(testing::solve_all(p) == models, "all" + at);
    }
}

void interruption() {
    Engine e;
    e.load(R"(
        pigeon(1..11). hole(1..10).
        1 { in(P,H) : hole(H) } 1 :- pigeon(P).
        #external relax.
        :- in(P,H), in(Q,H), P < Q, not relax.
    )");
    e.ground("base");
    e.flush();
    expect(e.store().atoms().size() >= 30, "the instance has at least 30 atoms");
    auto handle = e.asolve();
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    expect(!handle.done(), "the search finished before it could be interrupted");
    auto start = Clock::now();
    handle.cancel();
    auto r       = handle.wait();
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    expect(r.status == SolveStatus::Interrupted, "status after cancel is " + std::string(to_string(r.status)));
    expect(latency <= 50, "cancel latency " + std::to_string(latency) + " ms");
    // The engine stays usable.
    e.assign_external(atom("relax"), true);
    expect(e.solve().status == SolveStatus::Sat, "solve after interruption");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void()>>> criteria{
        {"worked example (default and script modes)", worked_example},
        {"external atom lifecycle", external_lifecycle},
        {"multi-shot grounding equals one-shot grounding", compositionality},
        {"1000 random programs agree with brute force", random_oracle},
        {"incremental Towers of Hanoi stops at step 7", towers_of_hanoi},
        {"volatile objective switches between optima", volatile_objective},
        {"enumeration modes match brute force", enumeration_modes},
        {"interruption within 50 ms", interruption},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        auto        start = Clock::now();
        std::string problem;
        try {
            check();
        } catch (const Failure& f) {
            problem = f.what;
        } catch (const std::exception& e) {
            problem = std::string("exception: ") + e.what();
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
        std::cout << (problem.empty() ? "PASS " : "FAIL ") << name << " (" << ms << " ms)\n";
        if (!problem.empty()) {
            std::cout << "     " << problem << '\n';
            ++failed;
        }
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
