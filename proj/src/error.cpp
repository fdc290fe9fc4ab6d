// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/error.hpp"

namespace bloomprobe {

ParseError::ParseError(const std::string& what, std::size_t line)
    : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : DataError(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

UnsupportedVersionError::UnsupportedVersionError(std::uint32_t version, std::uint64_t offset)
    : FormatError("unsupported ACTV version " + std::to_string(version), offset), version_(version) {}

}  // namespace bloomprobe
