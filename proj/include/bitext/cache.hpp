// Copyright 2026 The bitext-align Authors
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

#pragma once

// Append-only on-disk embedding cache. One record per line:
//
//   <sha256 hex key>\t<dim>\t<base64 of little-endian float32 values>\n
//
// Later lines win over earlier ones for the same key. A line without its
// terminating newline (torn append) is reported as corruption.

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bitext/digest.hpp"
#include "bitext/error.hpp"
#include "bitext/io.hpp"

namespace bitext {

struct CacheRecord {
  std::string key;
  std::vector<float> vector;  // raw provider output, not normalized

  std::size_t dim() const noexcept { return vector.size(); }
};

inline std::string cache_key(std::string_view model_id,
                             std::string_view input_type,
                             std::string_view text) {
  std::string material;
  material.reserve(model_id.size() + input_type.size() + text.size() + 2);
  material.append(model_id).append("\n").append(input_type).append("\n");
  material.append(text);
  const auto h = digest::sha256(material);
  return digest::to_hex(h);
}

inline std::string encode_cache_line(const CacheRecord& record) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(record.vector.size() * 4);
  for (float v : record.vector) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) bytes.push_back((u >> (8 * b)) & 0xFF);
  }
  std::string line = record.key;
  line += '\t';
  line += std::to_string(record.vector.size());
  line += '\t';
  line += digest::base64_encode(bytes);
  line += '\n';
  return line;
}

/// Parses one line (without its newline). `line_no` is 1-based.
inline CacheRecord parse_cache_line(std::string_view line,
                                    const std::string& path,
                                    std::size_t line_no) {
  auto fail = [&](const std::string& what) {
    return CacheCorruption(path, line_no, what);
  };
  const auto t1 = line.find('\t');
  const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
  if (t2 == std::string_view::npos ||
      line.find('\t', t2 + 1) != std::string_view::npos) {
    throw fail("expected 3 tab-separated fields");
  }
  const auto key = line.substr(0, t1);
  const auto dim_str = line.substr(t1 + 1, t2 - t1 - 1);
  const auto payload = line.substr(t2 + 1);
  if (key.size() != 64 || !digest::is_lower_hex(key)) {
    throw fail("key is not 64 lowercase hex characters");
  }
  if (dim_str.empty() || dim_str.size() > 9 ||
      dim_str.find_first_not_of("0123456789") != std::string_view::npos) {
    throw fail("malformed dimension");
  }
  const std::size_t dim = std::stoul(std::string(dim_str));
  if (dim == 0) throw fail("dimension must be positive");
  const auto bytes = digest::base64_decode(payload);
  if (!bytes) throw fail("malformed base64 payload");
  if (bytes->size() != dim * 4) {
    throw fail("payload holds " + std::to_string(bytes->size()) +
               " bytes, expected " + std::to_string(dim * 4));
  }
  CacheRecord record{std::string(key), std::vector<float>(dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) {
      u |= static_cast<std::uint32_t>((*bytes)[4 * i + b]) << (8 * b);
    }
    record.vector[i] = std::bit_cast<float>(u);
  }
  return record;
}

namespace detail {

// One write(2) per call plus fsync; O_APPEND keeps concurrent appenders
// from interleaving within a record.
inline void durable_append(const std::filesystem::path& path,
                           const std::string& data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC,
                        0644);
  if (fd < 0) {
    throw IoError("cannot open cache " + path.string() + ": " +
                  std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw IoError("write to cache " + path.string() + " failed: " +
                    std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError("fsync of cache " + path.string() + " failed: " +
                  std::strerror(err));
  }
  ::close(fd);
}

}  // namespace detail

/// In-memory index over a cache file. Loading validates every line.
/// Readers may run concurrently; writers are serialized.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) return;
    const std::string content = io::read_file(path_);
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < content.size()) {
      ++line_no;
      const std::size_t nl = content.find('\n', start);
      if (nl == std::string::npos) {
        throw CacheCorruption(path_.string(), line_no,
                              "truncated record (missing newline)");
      }
      auto record = parse_cache_line(
          std::string_view(content).substr(start, nl - start), path_.string(),
          line_no);
      entries_[record.key] = std::move(record.vector);
      start = nl + 1;
    }
  }

  const std::filesystem::path& path() const noexcept { return path_; }

  std::optional<CacheRecord> get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return CacheRecord{key, it->second};
  }

  bool contains(const std::string& key) const {
    std::shared_lock lock(mutex_);
    return entries_.count(key) > 0;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  void put(const CacheRecord& record) {
    put_batch(std::span<const CacheRecord>(&record, 1));
  }

  /// Appends all records with a single write and fsync.
  void put_batch(std::span<const CacheRecord> records) {
    if (records.empty()) return;
    std::string data;
    for (const auto& r : records) {
      if (r.key.size() != 64 || !digest::is_lower_hex(r.key) || r.dim() == 0) {
        throw ValidationError("refusing to write malformed cache record");
      }
      data += encode_cache_line(r);
    }
    std::unique_lock lock(mutex_);
    detail::durable_append(path_, data);
    for (const auto& r : records) entries_[r.key] = r.vector;
  }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::vector<float>> entries_;
};

inline void cache_put(const CacheRecord& record,
                      const std::filesystem::path& path) {
  if (record.key.size() != 64 || !digest::is_lower_hex(record.key) ||
      record.dim() == 0) {
    throw ValidationError("refusing to write malformed cache record");
  }
  detail::durable_append(path, encode_cache_line(record));
}

inline std::optional<CacheRecord> cache_get(const std::string& key,
                                            const std::filesystem::path& path) {
  return EmbeddingCache(path).get(key);
}

}  // namespace bitext
