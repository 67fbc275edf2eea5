// Acceptance runner: executes every criterion of the verification suite and
// prints one PASS/FAIL line per criterion.  Exit status 0 iff all pass.

#include "orderdens/verify.hpp"

#include <cstdio>
#include <cstring>

int main(int argc, char** argv) {
    orderdens::VerifyOptions opts;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--skip-empirical")) opts.skip_empirical = true;
        else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc)
            opts.threads = std::atoi(argv[++i]);
        else if (!std::strcmp(argv[i], "--bound") && i + 1 < argc)
            opts.empirical_bound = std::atoll(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--skip-empirical] [--threads N] [--bound B]\n",
                         argv[0]);
            return 2;
        }
    }
    auto results = orderdens::run_acceptance(opts);
    bool pass = orderdens::all_passed(results);
    for (const auto& r : results)
        std::printf("C%d %-4s %-62s (%.1fs)%s%s\n", r.id, r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.seconds, r.detail.empty() ? "" : " -- ",
                    r.detail.c_str());
    std::printf("acceptance: %s\n", pass ? "all criteria passed" : "FAILURES PRESENT");
    return pass ? 0 : 1;
}
