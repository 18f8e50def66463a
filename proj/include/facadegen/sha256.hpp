#pragma once

#include <string>
#include <string_view>

namespace facadegen {

// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::string_view data);

// Digest of a file's bytes. Throws Error("io") if the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace facadegen
