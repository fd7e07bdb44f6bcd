#pragma once

#include <verifide/lang.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace testing_support {

inline std::filesystem::path corpus_dir() { return VERIFIDE_CORPUS_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string corpus_program(const std::string& name) { return read_file(corpus_dir() / "programs" / name); }

inline std::vector<std::filesystem::path> corpus_files(const std::string& sub, const std::string& ext) {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir() / sub)) {
        if (e.path().extension() == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::shared_ptr<const verifide::Program> analyzed(const std::string& text) {
    return std::make_shared<const verifide::Program>(verifide::analyze(text));
}

// The three buffers of the re-verification example.
inline const std::string kThreeSnap0 =
    "method Foo()\n  ensures P();\n{ }\n\nmethod Bar() { }\n\nfunction P(): bool { true }\n";
inline const std::string kThreeSnap1 =
    "method Foo()\n  ensures P();\n{ }\n\nmethod Bar() { Foo(); }\n\nfunction P(): bool { true }\n";
inline const std::string kThreeSnap2 =
    "method Foo()\n  ensures P();\n{ }\n\nmethod Bar() { Foo(); }\n\nfunction P(): bool { false }\n";

}  // namespace testing_support
