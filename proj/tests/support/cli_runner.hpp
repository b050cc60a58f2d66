#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace testutil {

struct CliResult {
    int code = -1;
    std::string out;
};

// Runs `binary args` through the shell; stdout is captured, stderr passes through.
inline CliResult cli(const std::string& binary, const std::string& args) {
    const std::string cmd = "\"" + binary + "\" " + args;
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace testutil
