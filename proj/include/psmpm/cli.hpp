#pragma once

#include <iosfwd>

namespace psmpm {

/// Command-line entry point: `run <config>`, `converge <config>` and
/// `basis-check <mesh>`. Returns 0 on success, 1 on validation, solver or
/// invariant failures and 2 on IO errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace psmpm
