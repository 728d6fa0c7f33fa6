#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "cmdp/harness.hpp"

namespace {

int usage() {
    std::fprintf(stderr,
                 "usage:\n"
                 "  cmdp_lab run <config.json> [--seed N] [--episodes N] [--out DIR]\n"
                 "  cmdp_lab check <config.json>\n"
                 "  cmdp_lab plot-data <summary.json>\n");
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) return usage();
    const std::string cmd = argv[1];
    const std::string path = argv[2];
    std::vector<std::string> overrides(argv + 3, argv + argc);

    if (cmd == "run") return cmdp::cli_run(path, overrides);
    if (cmd == "check") {
        if (!overrides.empty()) return usage();
        return cmdp::cli_check(path);
    }
    if (cmd == "plot-data") {
        if (!overrides.empty()) return usage();
        return cmdp::cli_plot_data(path);
    }
    return usage();
}
