// Copyright 2026 The LVAE Authors
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

// IDX container: a big-endian magic (0x0000 08 <rank>), `rank` big-endian
// 32-bit dimensions, then the unsigned-byte payload in row-major order.
// Gzip-compressed input is detected by its header and inflated first.

#ifndef LVAE_DATA_IDX_H_
#define LVAE_DATA_IDX_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace lvae::data {

inline constexpr uint32_t kIdxLabelsMagic = 0x00000801;
inline constexpr uint32_t kIdxImagesMagic = 0x00000803;

struct IdxArray {
  uint32_t magic = 0;
  std::vector<int64_t> dims;
  std::vector<uint8_t> values;
};

// Parses `bytes` and requires the given magic.
absl::StatusOr<IdxArray> ParseIdx(std::string_view bytes, uint32_t expected_magic);

// Serializes without compression; ParseIdx(SerializeIdx(a)) reproduces `a`.
std::string SerializeIdx(const IdxArray& array);

absl::StatusOr<std::string> ReadFileBytes(const std::string& path);

// Inflates a gzip stream.
absl::StatusOr<std::string> Gunzip(std::string_view bytes);

// Compresses into a gzip stream (used for fixtures).
absl::StatusOr<std::string> Gzip(std::string_view bytes);

}  // namespace lvae::data

#endif  // LVAE_DATA_IDX_H_
