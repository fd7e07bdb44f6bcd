#include <verifide/json_io.hpp>
#include <verifide/replay.hpp>
#include <verifide/session.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace verifide;

namespace {

std::optional<Bounds> parse_bounds(const std::string& text) {
    Bounds b;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(text);
    if (!(in >> b.int_low >> c1 >> b.int_high >> c2 >> b.max_array_len) || c1 != ',' || c2 != ',' || !in.eof()) {
        return std::nullopt;
    }
    if (!b.valid()) return std::nullopt;
    return b;
}

int run_replay(const std::string& script_path, const std::optional<int>& workers, const std::optional<int>& debounce,
               const std::optional<int>& timeout, const std::string& bounds_text, const std::string& cache_file,
               bool no_cache, bool real_time_flag, const std::string& out_path) {
    SessionScript script;
    try {
        script = load_session_script(script_path);
    } catch (const ScriptError& e) {
        std::cerr << "replay: " << e.what() << '\n';
        return 1;
    }
    ReplayOptions options;
    apply_overrides(script.overrides, options.config, options.real_time);
    if (workers) options.config.max_workers = *workers;
    if (debounce) options.config.debounce_ms = *debounce;
    if (timeout) options.config.timeout_ms = *timeout;
    if (!bounds_text.empty()) {
        std::optional<Bounds> b = parse_bounds(bounds_text);
        if (!b) {
            std::cerr << "replay: --bounds expects lo,hi,len\n";
            return 1;
        }
        b->max_steps = options.config.bounds.max_steps;
        options.config.bounds = *b;
    }
    if (no_cache) options.config.cache_enabled = false;
    if (real_time_flag) options.real_time = true;
    if (!cache_file.empty()) options.cache_file = cache_file;
    if (!options.config.valid()) {
        std::cerr << "replay: invalid configuration\n";
        return 1;
    }

    const Report report = run_session(script, options);
    const std::string text = report.to_json().dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out || !(out << text)) {
            std::cerr << "replay: cannot write " << out_path << '\n';
            return 1;
        }
    }
    return report.has_resolution_errors() ? 2 : 0;
}

int run_check(const std::string& path, const std::string& bounds_text, int timeout) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "check: cannot read " << path << '\n';
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    Bounds bounds;
    if (!bounds_text.empty()) {
        std::optional<Bounds> b = parse_bounds(bounds_text);
        if (!b) {
            std::cerr << "check: --bounds expects lo,hi,len\n";
            return 1;
        }
        bounds = *b;
    }
    auto program = std::make_shared<const Program>(analyze(buf.str()));
    for (const Diagnostic& d : program->diagnostics) {
        std::cout << path << ':' << d.span.start_line + 1 << ':' << d.span.start_col + 1 << ": "
                  << to_string(d.severity) << ": " << d.message << '\n';
    }
    if (!program->ok()) return 2;
    bool all_verified = true;
    for (const VerificationUnit& unit : extract_units(program)) {
        const Verdict v = *verify_unit(unit, bounds, effective_timeout_ms(unit, timeout));
        std::cout << to_string(unit.id) << ": " << to_string(v.kind) << '\n';
        for (const VerificationError& e : v.errors) {
            std::cout << "  " << path << ':' << e.error_span.start_line + 1 << ':' << e.error_span.start_col + 1 << ": "
                      << e.message << '\n';
        }
        all_verified = all_verified && v.kind == Verdict::Kind::Verified;
    }
    return all_verified ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous verification engine for MiniSpec programs"};
    app.require_subcommand(1);

    auto* replay = app.add_subcommand("replay", "Replay an edit-session script and print a JSON report");
    std::string script_path;
    std::optional<int> workers;
    std::optional<int> debounce;
    std::optional<int> timeout;
    std::string bounds_text;
    std::string cache_file;
    bool no_cache = false;
    bool real_time = false;
    std::string out_path;
    replay->add_option("script", script_path, "Session script (JSON)")->required();
    replay->add_option("--workers", workers, "Maximum concurrent prover workers")->check(CLI::PositiveNumber);
    replay->add_option("--debounce-ms", debounce, "Idle interval before resolution")->check(CLI::NonNegativeNumber);
    replay->add_option("--timeout-ms", timeout, "Per-unit prover time limit")->check(CLI::NonNegativeNumber);
    replay->add_option("--bounds", bounds_text, "Input bounds as lo,hi,len");
    replay->add_option("--cache-file", cache_file, "Load and save the result cache here");
    replay->add_flag("--no-cache", no_cache, "Disable the result cache");
    replay->add_flag("--real-time", real_time, "Sleep scripted delays and report real wall time");
    replay->add_option("--out", out_path, "Write the report here instead of stdout");

    auto* serve = app.add_subcommand("serve", "Serve the NDJSON editor protocol");
    int port = 4717;
    std::string host = "127.0.0.1";
    bool stdio = false;
    std::optional<int> serve_workers;
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
    serve->add_option("--host", host, "Listen address");
    serve->add_flag("--stdio", stdio, "Use standard input and output instead of TCP");
    serve->add_option("--workers", serve_workers, "Maximum concurrent prover workers")->check(CLI::PositiveNumber);

    auto* check = app.add_subcommand("check", "Verify every unit of one source file");
    std::string check_path;
    std::string check_bounds;
    int check_timeout = 10000;
    check->add_option("file", check_path, "MiniSpec source file")->required();
    check->add_option("--bounds", check_bounds, "Input bounds as lo,hi,len");
    check->add_option("--timeout-ms", check_timeout, "Per-unit prover time limit")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*replay) {
        return run_replay(script_path, workers, debounce, timeout, bounds_text, cache_file, no_cache, real_time,
                          out_path);
    }
    if (*serve) {
        Config config;
        if (serve_workers) config.max_workers = *serve_workers;
        if (stdio) {
            serve_stdio(config);
            return 0;
        }
        return serve_tcp(config, host, port);
    }
    return run_check(check_path, check_bounds, check_timeout);
}
