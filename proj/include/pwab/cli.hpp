#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pwab::cli {

// Entry point shared by the pwab executable and the tests. Returns the
// process exit code; usage and errors go to stdout / stderr.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

// Environment variable holding the provider credential.
inline constexpr const char* kApiKeyEnv = "PWAB_API_KEY";

}  // namespace pwab::cli
