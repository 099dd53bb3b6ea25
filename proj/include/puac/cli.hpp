#pragma once
// Batch command-line front end: gen | train | estimate-priors | eval |
// experiment | baselines. All outputs land in a run directory named by the
// hash of the resolved config plus the seed.

namespace puac {

// Returns the process exit code: 0 success, 1 runtime error, 2 usage error.
int run_cli(int argc, const char* const* argv);

} // namespace puac
