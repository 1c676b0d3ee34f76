#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace compois::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line (argv[0] is the program name). Never throws; every
/// failure maps to an exit code with a message on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a over the bytes of a file or a string.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

}  // namespace compois::cli
