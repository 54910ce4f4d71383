// Copyright 2026 The ahnpl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run manifests: what a command read, what it wrote and with which
// settings, so any artifact can be regenerated and verified.

#ifndef AHNPL_TOOLS_MANIFEST_H_
#define AHNPL_TOOLS_MANIFEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace ahnpl {

std::string Sha256Hex(const std::string& bytes);
absl::StatusOr<std::string> Sha256File(const std::string& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  // Settings the command ran with; config_hash is the SHA-256 of its
  // compact serialization.
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;

  absl::Status AddInput(const std::string& path);
  absl::Status AddOutput(const std::string& path);
  std::string ConfigHash() const;
  nlohmann::ordered_json ToJson() const;
  absl::Status Write(const std::string& path) const;
};

}  // namespace ahnpl

#endif  // AHNPL_TOOLS_MANIFEST_H_
