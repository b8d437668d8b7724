#ifndef CLASSEVAL_DIGEST_HPP
#define CLASSEVAL_DIGEST_HPP

#include <string>
#include <string_view>

namespace classeval {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

}  // namespace classeval

#endif  // CLASSEVAL_DIGEST_HPP
