#pragma once

#include <string>

namespace sqzmem {

/// Git blob object id: hex SHA-1 of "blob <size>\0" + content.
std::string git_blob_sha1(const std::string& content);

}  // namespace sqzmem
