// Acceptance suite: runs every validation check at its stated tolerance and
// prints one pass/fail line per criterion. Exit status 0 only if all pass.

#include "muscat/validate.hpp"

#include <cstdio>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    std::vector<std::string> only;
    for (int i = 1; i < argc; ++i) only.emplace_back(argv[i]);

    const muscat::validate::Options options;
    int failures = 0;
    try {
        const auto results = muscat::validate::run_acceptance_checks(only, options);
        for (const auto& r : results) {
            std::printf("[%s] %s (%.1fs) %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                        r.seconds, r.details.c_str());
            std::fflush(stdout);
            if (!r.pass) ++failures;
        }
        std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
                    results.size());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance suite error: %s\n", e.what());
        return 2;
    }
    return failures == 0 ? 0 : 1;
}
