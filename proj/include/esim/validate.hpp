#pragma once

#include <iosfwd>
#include <string>

namespace esim {

struct ValidateOptions {
    bool quick = false;    // skip the slower end-to-end determinism checks
    bool perturb = false;  // negative control: inject a known error and expect failure
    std::string data_dir = "data";
};

// Self-contained consistency checks over the core estimators and a short
// end-to-end run. Prints one line per check; returns true when all pass.
bool run_validation(const ValidateOptions& options, std::ostream& out);

}  // namespace esim
