#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace iocttl {

inline constexpr const char* kToolVersion = "0.1.0";

struct InputDigest {
  std::string path;
  std::string fnv1a64;  // hex digest of the raw bytes
  std::uint64_t bytes = 0;
};

// Provenance block attached to every artifact: the output is reproducible
// from the manifest plus the digested inputs.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string subcommand;
  std::string config_json;  // fully resolved flag values, serialized
  std::vector<InputDigest> inputs;
  std::string timestamp_utc;

  std::string to_json() const;
};

std::uint64_t fnv1a64(const void* data, std::size_t size);
InputDigest digest_file(const std::string& path);
std::string utc_timestamp_now();

}  // namespace iocttl
