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

#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>

#include "dpfl/errors.h"
#include "test_support.h"

namespace dpfl {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dpfl_io_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double Parse(const std::string& text) {
  double x = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), x);
  return x;
}

TEST(FormatDouble, RoundTripsExactly) {
  const ParameterVector v = testing::RandomVector(1000, 3, 1e3);
  for (const double x : v) {
    EXPECT_EQ(Parse(FormatDouble(x)), x);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(2.0), "2");
  EXPECT_EQ(Parse(FormatDouble(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
}

TEST(Model, EncodeDecodeIsBitExact) {
  const ParameterVector w = testing::RandomVector(123, 9);
  const std::string bytes = EncodeModel(w);
  EXPECT_EQ(bytes.size(), 4 + 4 + 8 * w.size());
  EXPECT_EQ(bytes.substr(0, 4), "DPMD");
  EXPECT_EQ(DecodeModel(bytes), w);
}

TEST(Model, DecodeErrors) {
  EXPECT_THROW(DecodeModel(""), MalformedHeader);
  EXPECT_THROW(DecodeModel("XXXX\x01\x00\x00\x00"), MalformedHeader);
  std::string bytes = EncodeModel(ParameterVector{1.0, 2.0});
  EXPECT_THROW(DecodeModel(bytes.substr(0, bytes.size() - 1)), TruncatedPayload);
  EXPECT_THROW(DecodeModel(bytes + "x"), MalformedHeader);
}

TEST(Model, SaveLoadFile) {
  const fs::path dir = TempDir("model");
  const ParameterVector w = testing::RandomVector(10, 1);
  SaveModel(dir / "m.bin", w);
  EXPECT_EQ(LoadModel(dir / "m.bin"), w);
  EXPECT_THROW(LoadModel(dir / "missing.bin"), Error);
}

TEST(WriteFileAtomic, ReplacesWholeFileAndLeavesNoTemp) {
  const fs::path dir = TempDir("atomic");
  WriteFileAtomic(dir / "a.txt", "first version, longer");
  WriteFileAtomic(dir / "a.txt", "second");
  EXPECT_EQ(ReadFile(dir / "a.txt"), "second");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++files;
  }
  EXPECT_EQ(files, 1u);
}

TEST(WriteFileAtomic, MissingDirectoryFails) {
  EXPECT_THROW(WriteFileAtomic("/nonexistent_dir_dpfl/x.txt", "x"), Error);
}

TEST(LittleEndian, Helpers) {
  std::string s;
  le::PutU32(s, 0x01020304u);
  EXPECT_EQ(static_cast<unsigned char>(s[0]), 0x04);
  EXPECT_EQ(le::GetU32(s.data()), 0x01020304u);
  s.clear();
  le::PutF32(s, 1.5f);
  EXPECT_EQ(le::GetF32(s.data()), 1.5f);
  s.clear();
  le::PutF64(s, -0.125);
  EXPECT_EQ(le::GetF64(s.data()), -0.125);
}

}  // namespace
}  // namespace dpfl
