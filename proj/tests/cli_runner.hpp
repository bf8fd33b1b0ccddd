#pragma once

// Runs the clipscale binary in a scratch directory and captures its output.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cli {

struct Result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
    std::ofstream(p, std::ios::binary) << content;
}

class Sandbox {
public:
    explicit Sandbox(const std::string& name)
        : dir_(std::filesystem::temp_directory_path() / ("clipscale_" + name + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    ~Sandbox() { std::filesystem::remove_all(dir_); }
    Sandbox(const Sandbox&) = delete;
    Sandbox& operator=(const Sandbox&) = delete;

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // `args` is appended to the binary path verbatim (already shell-quoted).
    Result run(const std::string& args) const {
        const auto out = dir_ / ".stdout", err = dir_ / ".stderr";
        const std::string cmd = std::string("'") + CLIPSCALE_CLI + "' " + args + " >'" + out.string() + "' 2>'" +
                                err.string() + "'";
        const int status = std::system(cmd.c_str());
        Result r;
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

private:
    std::filesystem::path dir_;
};

inline std::string data(const std::string& rel) { return std::string("'") + CLIPSCALE_DATA_DIR + "/" + rel + "'"; }

}  // namespace cli
