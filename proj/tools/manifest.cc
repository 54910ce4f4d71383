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

#include "manifest.h"

#include <openssl/evp.h>

#include <fstream>
#include <iterator>
#include <memory>

#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"

#ifndef AHNPL_VERSION
#define AHNPL_VERSION "dev"
#endif

namespace ahnpl {

std::string Sha256Hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  return absl::BytesToHexString(absl::string_view(
      reinterpret_cast<const char*>(digest), length));
}

absl::StatusOr<std::string> Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return Sha256Hex(bytes);
}

absl::Status RunManifest::AddInput(const std::string& path) {
  absl::StatusOr<std::string> digest = Sha256File(path);
  if (!digest.ok()) return digest.status();
  inputs.push_back({path, *digest});
  return absl::OkStatus();
}

absl::Status RunManifest::AddOutput(const std::string& path) {
  absl::StatusOr<std::string> digest = Sha256File(path);
  if (!digest.ok()) return digest.status();
  outputs.push_back({path, *digest});
  return absl::OkStatus();
}

std::string RunManifest::ConfigHash() const { return Sha256Hex(config.dump()); }

nlohmann::ordered_json RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["tool"] = "ahnpl";
  j["version"] = AHNPL_VERSION;
  j["command"] = command;
  j["args"] = args;
  j["seed"] = seed;
  j["config_hash"] = ConfigHash();
  j["config"] = config;
  auto files = [](const std::vector<FileDigest>& list) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const FileDigest& f : list) {
      arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    }
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  return j;
}

absl::Status RunManifest::Write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << ToJson().dump(2) << '\n';
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

}  // namespace ahnpl
