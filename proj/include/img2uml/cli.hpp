#pragma once

#include <iosfwd>
#include <memory>

#include "img2uml/gateway.hpp"

namespace img2uml::cli {

/// Process exit codes.
enum ExitStatus : int {
  kSuccess = 0,
  kDomainFailure = 1,  // syntax error, refusal, nonzero diff under --strict
  kUsageError = 2,     // bad flags, configuration or input files
  kInfrastructure = 3, // transport failures, missing replay fixtures
};

/// Runs one command line. `transport` defaults to the HTTP transport.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, EnvLookup env = process_env(),
        std::shared_ptr<Transport> transport = nullptr);

}  // namespace img2uml::cli
