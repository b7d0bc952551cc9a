#pragma once

#include <string>

namespace ddlab {

struct AcceptanceOptions {
    std::string cli_path;  // path to the ddlab binary, used by the reproducibility check
    int only = 0;          // run a single criterion (1-13); 0 runs all
};

// Runs the acceptance suite, printing one PASS/FAIL line per criterion.
// Returns the number of failed criteria.
int run_acceptance(const AcceptanceOptions& opts);

}  // namespace ddlab
