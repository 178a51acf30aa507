#include <doctest.h>

#include <mshot/cli.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace mshot;
namespace fs = std::filesystem;

namespace {

const fs::path programs_dir{MSHOT_PROGRAMS_DIR};

/// A program file in the temporary directory, removed on destruction.
struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& text) {
        static int counter = 0;
        path = fs::temp_directory_path() / ("mshot_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".lp");
        std::ofstream(path) << text;
    }
    ~TempFile() { fs::remove(path); }
};

struct Run {
    int         code;
    std::string out;
    std::string err;
};

Run run(const cli::Config& config) {
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(config, out, err);
    return {code, out.str(), err.str()};
}

Run run_text(const std::string& text, cli::Config config = {}) {
    TempFile file(text);
    config.files = {file.path.string()};
    return run(config);
}

Run run_script_text(const std::string& program, const std::string& script) {
    Engine engine;
    engine.load(program);
    std::istringstream in(script);
    std::ostringstream out;
    cli::Config config;
    config.mode = cli::Mode::Script;
    try {
        int code = cli::run_script(config, engine, in, out);
        return {code, out.str(), ""};
    } catch (const std::exception& e) {
        return {cli::exit_input_error, out.str(), e.what()};
    }
}

} // namespace

TEST_CASE("default mode prints the model and status") {
    auto r = run_text("a(1). #program acid(k). b(k). #program base. a(2).");
    CHECK(r.code == cli::exit_sat);
    CHECK(r.out == "Answer: 1\na(1) a(2)\nSATISFIABLE\n");
}

TEST_CASE("unsatisfiable program") {
    auto r = run_text(":- not x.");
    CHECK(r.code == cli::exit_unsat);
    CHECK(r.out == "UNSATISFIABLE\n");
}

TEST_CASE("models and enumeration options") {
    cli::Config all;
    all.models = 0;
    auto r     = run_text("{ a }.", all);
    CHECK(r.out == "Answer: 1\n\nAnswer: 2\na\nSATISFIABLE\n");

    cli::Config cautious;
    cautious.enum_mode = SolveMode::Intersection;
    r = run_text("{ a }. b.", cautious);
    CHECK(r.out == "Answer: 1\nb\nSATISFIABLE\n");
}

TEST_CASE("optimization output") {
    auto r = run_text("1 { x; y } 1. #minimize{ 2@1,x : x; 1@1,y : y }.");
    CHECK(r.code == cli::exit_sat);
    CHECK(r.out.ends_with("Answer: 1\ny\nOptimization: 1\nOPTIMUM FOUND\n") == true);
}

TEST_CASE("constant overrides") {
    cli::Config config;
    config.consts = {{"n", "3"}};
    auto r        = run_text("#const n = 1. p(n).", config);
    CHECK(r.out == "Answer: 1\np(3)\nSATISFIABLE\n");
}

TEST_CASE("dump-ground prints the ground program") {
    cli::Config config;
    config.dump_ground = true;
    auto r             = run_text("p(1). q(X) :- p(X).", config);
    CHECK(r.code == cli::exit_sat);
    CHECK(r.out.find("q(1) :- p(1).\n") != std::string::npos);
    CHECK(r.out.ends_with("Answer: 1\np(1) q(1)\nSATISFIABLE\n"));
}

TEST_CASE("input errors exit with 65") {
    auto r = run_text("p(.");
    CHECK(r.code == cli::exit_input_error);
    CHECK(r.err.find("SyntaxError") != std::string::npos);

    cli::Config missing;
    missing.files = {"/nonexistent/mshot/file.lp"};
    CHECK(run(missing).code == cli::exit_input_error);

    cli::Config inc;
    inc.mode = cli::Mode::Inc;
    r        = run_text("a.", inc);
    CHECK(r.code == cli::exit_input_error);
    CHECK(r.err.find("MissingSubprogram") != std::string::npos);
}

TEST_CASE("script mode") {
    SUBCASE("parameterized subprogram") {
        auto r = run_script_text("a(1). #program acid(k). b(k). #program base. a(2).", "ground acid(42)\nsolve\n");
        CHECK(r.code == cli::exit_sat);
        CHECK(r.out == "Answer: 1\nb(42)\nSATISFIABLE\n");
    }
    SUBCASE("external lifecycle") {
        auto r = run_script_text("#external e. a :- e.", "ground base\nassign e true\nsolve\nrelease e\nsolve\n");
        CHECK(r.code == cli::exit_sat);
        CHECK(r.out == "Answer: 1\na e\nSATISFIABLE\nAnswer: 1\n\nSATISFIABLE\n");
    }
    SUBCASE("assigning a released atom fails") {
        auto r = run_script_text("#external e.", "ground base\nrelease e\nassign e true\nsolve\n");
        CHECK(r.code == cli::exit_input_error);
    }
    SUBCASE("comments, add and conf") {
        auto r = run_script_text("", "# a comment\n\nadd extra(k) <<END\nx(k).\nEND\nground extra(5)\nconf models=0\nsolve\n");
        CHECK(r.out == "Answer: 1\nx(5)\nSATISFIABLE\n");
    }
    SUBCASE("unknown commands are rejected") {
        auto r = run_script_text("", "frobnicate\n");
        CHECK(r.code == cli::exit_input_error);
    }
    SUBCASE("per-call solve options") {
        auto r = run_script_text("{ a; b }.", "ground base\nsolve models=0 enum=intersection\n");
        CHECK(r.out == "Answer: 1\n\nSATISFIABLE\n");
    }
}

TEST_CASE("script files from disk") {
    cli::Config config;
    config.mode   = cli::Mode::Script;
    config.files  = {(programs_dir / "acid.lp").string()};
    config.script = (programs_dir / "acid42.script").string();
    auto r        = run(config);
    CHECK(r.code == cli::exit_sat);
    CHECK(r.out == "Answer: 1\nb(42)\nSATISFIABLE\n");
}

TEST_CASE("incremental mode on Towers of Hanoi") {
    cli::Config config;
    config.mode  = cli::Mode::Inc;
    config.files = {(programs_dir / "tohE.lp").string(), (programs_dir / "tohI.lp").string()};
    SUBCASE("stops at the first satisfiable step") {
        auto r = run(config);
        CHECK(r.code == cli::exit_sat);
        CHECK(r.out.find("Step: 7\n") != std::string::npos);
        CHECK(r.out.find("Step: 8\n") == std::string::npos);
        CHECK(r.out.ends_with("SATISFIABLE\n"));
    }
    SUBCASE("imax bounds the number of steps") {
        config.imax = 3;
        auto r      = run(config);
        CHECK(r.code == cli::exit_unsat);
        CHECK(r.out.find("Step: 3\n") != std::string::npos);
        CHECK(r.out.find("Step: 4\n") == std::string::npos);
    }
}

TEST_CASE("incremental mode honours iinit") {
    cli::Config config;
    config.mode  = cli::Mode::Inc;
    config.iinit = 4;
    auto r       = run_text("#program cumulative(t). #external query(t). :- query(t), t < 5. p(t). #show p/1.", config);
    CHECK(r.code == cli::exit_sat);
    CHECK(r.out == "Step: 4\nUNSATISFIABLE\nStep: 5\nAnswer: 1\np(4) p(5)\nSATISFIABLE\n");
}

TEST_CASE("output is deterministic") {
    cli::Config config;
    config.models = 0;
    auto first    = run_text("{ p(1..4) }. :- p(1), p(2).", config);
    auto second   = run_text("{ p(1..4) }. :- p(1), p(2).", config);
    CHECK(first.out == second.out);
    CHECK(first.out.find("Answer: 12\n") != std::string::npos);
}

TEST_CASE("interrupted runs report UNKNOWN") {
    CancelToken token;
    token.cancel();
    Engine engine;
    engine.load("{ p(1..5) }.");
    std::ostringstream out;
    cli::Config config;
    int code = cli::run_default(config, engine, out, token);
    CHECK(code == cli::exit_unknown);
    CHECK(out.str().ends_with("UNKNOWN\n"));
}
