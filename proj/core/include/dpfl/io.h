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
#ifndef DPFL_IO_H_
#define DPFL_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dpfl/nn.h"

namespace dpfl {

// Shortest decimal form that round-trips to the same double.
std::string FormatDouble(double value);

// Writes `contents` to a sibling temporary file and renames it over `path`,
// so readers see either the old file or the complete new one.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents);

std::string ReadFile(const std::filesystem::path& path);

// Model file: magic "DPMD", u32 d, then d little-endian f64 values.
inline constexpr char kModelMagic[4] = {'D', 'P', 'M', 'D'};

std::string EncodeModel(const ParameterVector& w);
ParameterVector DecodeModel(std::string_view bytes);
void SaveModel(const std::filesystem::path& path, const ParameterVector& w);
ParameterVector LoadModel(const std::filesystem::path& path);

namespace le {

void PutU32(std::string& out, std::uint32_t v);
void PutF32(std::string& out, float v);
void PutF64(std::string& out, double v);
std::uint32_t GetU32(const char* p);
float GetF32(const char* p);
double GetF64(const char* p);

}  // namespace le
}  // namespace dpfl

#endif  // DPFL_IO_H_
