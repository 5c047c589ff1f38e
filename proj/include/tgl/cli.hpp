#ifndef TGL_CLI_HPP
#define TGL_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tgl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// `args` excludes the program name, e.g. {"topology", "--default", "--out", "d"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace tgl::cli

#endif  // TGL_CLI_HPP
