#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "linctl/systems.hpp"
#include "linctl/types.hpp"

namespace linctl::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitInternal = 1;

struct SystemFile {
  std::string name;
  LtiSystem system;
  bool has_C = false;
};

/// Strict parse of a system file: keys name, A, B, optional C and metadata.
SystemFile load_system_file(const std::string& path);
SystemFile parse_system_text(const std::string& text, const std::string& fallback_name);

/// Tolerance overrides; unknown keys are rejected.
ToleranceConfig load_config_file(const std::string& path);

/// Runs one command. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace linctl::cli
