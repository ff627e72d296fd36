#pragma once

#include <string>

namespace seqbench {

// Lowercase 32-hex-char MD5 of the given bytes.
std::string md5_hex(const std::string& bytes);

}  // namespace seqbench
