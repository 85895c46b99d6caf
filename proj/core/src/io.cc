/*
 * Copyright 2026 The dpfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "dpfl/io.h"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dpfl/errors.h"

namespace dpfl {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

std::string FormatDouble(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace le {

void PutU32(std::string& out, std::uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  out.append(bytes, 4);
}
void PutF32(std::string& out, float v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  out.append(bytes, 4);
}
void PutF64(std::string& out, double v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  out.append(bytes, 8);
}
std::uint32_t GetU32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}
float GetF32(const char* p) {
  float v;
  std::memcpy(&v, p, 4);
  return v;
}
double GetF64(const char* p) {
  double v;
  std::memcpy(&v, p, 8);
  return v;
}

}  // namespace le

std::string EncodeModel(const ParameterVector& w) {
  if (w.size() > 0xFFFFFFFFu) throw InvalidArgument("model too large");
  std::string out(kModelMagic, 4);
  le::PutU32(out, static_cast<std::uint32_t>(w.size()));
  out.reserve(out.size() + 8 * w.size());
  for (const double v : w) le::PutF64(out, v);
  return out;
}

ParameterVector DecodeModel(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw MalformedHeader("not a model file (bad magic or short header)");
  }
  const std::uint32_t d = le::GetU32(bytes.data() + 4);
  const std::size_t expected = 8 + 8 * static_cast<std::size_t>(d);
  if (bytes.size() < expected) {
    throw TruncatedPayload("model file truncated: expected " +
                           std::to_string(expected) + " bytes, got " +
                           std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw MalformedHeader("model file has trailing bytes");
  }
  ParameterVector w(d);
  for (std::size_t i = 0; i < d; ++i) {
    w[i] = le::GetF64(bytes.data() + 8 + 8 * i);
  }
  return w;
}

void SaveModel(const std::filesystem::path& path, const ParameterVector& w) {
  WriteFileAtomic(path, EncodeModel(w));
}

ParameterVector LoadModel(const std::filesystem::path& path) {
  return DecodeModel(ReadFile(path));
}

}  // namespace dpfl
