// Copyright 2026 The LKTD Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "lktd/error.hpp"
#include "lktd/runtime.hpp"

namespace lktd {
namespace {

constexpr char kMagic[8] = {'L', 'K', 'T', 'D', 'P', 'O', 'O', 'L'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError(path + ": truncated pool snapshot header");
  }
  return value;
}

}  // namespace

void write_pool(const std::string& path, const SamplePool& pool,
                const MlpSpec& spec) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const auto p = static_cast<std::uint64_t>(spec.param_count());
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, spec.hash());
  put(out, p);
  put(out, static_cast<std::uint64_t>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const ParamVector& theta = pool.at(i);
    if (static_cast<std::uint64_t>(theta.size()) != p) {
      throw UsageError("pool member length does not match the network");
    }
    out.write(reinterpret_cast<const char*>(theta.data()),
              static_cast<std::streamsize>(p * sizeof(double)));
  }
  if (!out) throw IoError("write failed for " + path);
}

SamplePool read_pool(const std::string& path, const MlpSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path + ": not a pool snapshot");
  }
  if (get<std::uint32_t>(in, path) != kVersion) {
    throw IoError(path + ": unsupported pool snapshot version");
  }
  const auto hash = get<std::uint64_t>(in, path);
  const auto p = get<std::uint64_t>(in, path);
  const auto m = get<std::uint64_t>(in, path);
  if (hash != spec.hash() ||
      p != static_cast<std::uint64_t>(spec.param_count())) {
    throw IoError(path + ": snapshot was written for a different network");
  }
  SamplePool pool(static_cast<std::size_t>(m));
  ParamVector theta(static_cast<Eigen::Index>(p));
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!in.read(reinterpret_cast<char*>(theta.data()),
                 static_cast<std::streamsize>(p * sizeof(double)))) {
      throw IoError(path + ": truncated pool snapshot");
    }
    pool.push(theta);
  }
  return pool;
}

}  // namespace lktd
