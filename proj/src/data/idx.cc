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

#include "lvae/data/idx.h"

#include <zlib.h>

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace lvae::data {
namespace {

constexpr int kGzipWindowBits = 15 + 16;

bool IsGzip(std::string_view bytes) {
  return bytes.size() >= 2 && static_cast<uint8_t>(bytes[0]) == 0x1f &&
         static_cast<uint8_t>(bytes[1]) == 0x8b;
}

uint32_t ReadBigEndian32(std::string_view bytes, size_t offset) {
  uint32_t v = 0;
  for (size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<uint8_t>(bytes[offset + i]);
  return v;
}

void AppendBigEndian32(std::string& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xff));
  }
}

}  // namespace

absl::StatusOr<std::string> Gunzip(std::string_view bytes) {
  z_stream stream{};
  if (inflateInit2(&stream, kGzipWindowBits) != Z_OK) {
    return absl::InternalError("inflateInit2 failed");
  }
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  stream.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  char buffer[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    stream.next_out = reinterpret_cast<Bytef*>(buffer);
    stream.avail_out = sizeof(buffer);
    rc = inflate(&stream, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&stream);
      return absl::DataLossError(absl::StrCat("corrupt gzip stream (zlib code ", rc, ")"));
    }
    out.append(buffer, sizeof(buffer) - stream.avail_out);
    if (rc == Z_OK && stream.avail_in == 0 && stream.avail_out != 0) {
      inflateEnd(&stream);
      return absl::DataLossError("truncated gzip stream");
    }
  }
  inflateEnd(&stream);
  return out;
}

absl::StatusOr<std::string> Gzip(std::string_view bytes) {
  z_stream stream{};
  if (deflateInit2(&stream, Z_BEST_COMPRESSION, Z_DEFLATED, kGzipWindowBits, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    return absl::InternalError("deflateInit2 failed");
  }
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  stream.avail_in = static_cast<uInt>(bytes.size());
  std::string out(deflateBound(&stream, stream.avail_in), '\0');
  stream.next_out = reinterpret_cast<Bytef*>(out.data());
  stream.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&stream, Z_FINISH);
  deflateEnd(&stream);
  if (rc != Z_STREAM_END) return absl::InternalError("deflate did not finish");
  out.resize(stream.total_out);
  return out;
}

absl::StatusOr<IdxArray> ParseIdx(std::string_view bytes, uint32_t expected_magic) {
  std::string inflated;
  if (IsGzip(bytes)) {
    absl::StatusOr<std::string> raw = Gunzip(bytes);
    if (!raw.ok()) return raw.status();
    inflated = *std::move(raw);
    bytes = inflated;
  }
  if (bytes.size() < 4) return absl::DataLossError("IDX header truncated");
  IdxArray out;
  out.magic = ReadBigEndian32(bytes, 0);
  if (out.magic != expected_magic) {
    return absl::InvalidArgumentError(
        absl::StrFormat("IDX magic 0x%08x, expected 0x%08x", out.magic, expected_magic));
  }
  const size_t rank = out.magic & 0xff;
  const size_t header = 4 + 4 * rank;
  if (bytes.size() < header) return absl::DataLossError("IDX dimensions truncated");
  uint64_t count = 1;
  for (size_t i = 0; i < rank; ++i) {
    out.dims.push_back(ReadBigEndian32(bytes, 4 + 4 * i));
    count *= out.dims.back();
  }
  if (bytes.size() - header < count) {
    return absl::DataLossError(
        absl::StrCat("IDX payload truncated: ", bytes.size() - header, " of ", count, " bytes"));
  }
  if (bytes.size() - header > count) {
    return absl::DataLossError("IDX payload has trailing bytes");
  }
  out.values.assign(bytes.begin() + header, bytes.end());
  return out;
}

std::string SerializeIdx(const IdxArray& array) {
  std::string out;
  AppendBigEndian32(out, array.magic);
  for (int64_t d : array.dims) AppendBigEndian32(out, static_cast<uint32_t>(d));
  out.append(array.values.begin(), array.values.end());
  return out;
}

absl::StatusOr<std::string> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace lvae::data
