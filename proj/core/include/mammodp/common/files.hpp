// Copyright 2026 The mammodp Authors
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

#ifndef MAMMODP_COMMON_FILES_HPP_
#define MAMMODP_COMMON_FILES_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace mammodp {

std::string ReadFile(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames over the destination.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace mammodp

#endif  // MAMMODP_COMMON_FILES_HPP_
