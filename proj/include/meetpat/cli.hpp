#ifndef meetpat_cli_hpp
#define meetpat_cli_hpp

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace meetpat::cli {

// exit statuses
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kIo = 2;
inline constexpr int kParse = 3;
inline constexpr int kValidation = 4;
inline constexpr int kFailure = 5;

/// 64-bit FNV-1a, used as the corpus digest in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/*
 * Runs one subcommand. `args` excludes the program name. Outputs go to the
 * directory given by --out; --config FILE supplies option values (a flat
 * JSON object or a previous manifest) for options absent from `args`.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace meetpat::cli

#endif
