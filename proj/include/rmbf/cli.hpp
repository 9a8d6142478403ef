#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rmbf::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kIo = 3 };

// Output directory used by `simulate` when --out-dir is absent.
inline constexpr const char* kOutDirEnv = "RMBF_OUT_DIR";

// Decimal or 0x-prefixed hexadecimal 64-bit seed. Throws DomainError.
std::uint64_t parse_seed(std::string_view text);

// Runs the command line `args` (without the program name). `in` feeds
// `parse` when no file is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::istream& in);

} // namespace rmbf::cli
