#pragma once

namespace blindspot {

// Entry point behind the `blindspot` binary; exposed so tests can drive the
// CLI in-process. Exit codes: 0 success, 2 configuration error (no outputs
// written), 3 at least one replicate aborted (partial logs kept).
int cli_main(int argc, const char* const* argv);

}  // namespace blindspot
