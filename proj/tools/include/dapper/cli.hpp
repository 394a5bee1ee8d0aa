// Copyright 2026 The Dapper Authors
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

#include <ostream>
#include <string>
#include <vector>

namespace dapper::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // bad flag, config or input data
inline constexpr int kExitFailure = 2;  // anything that went wrong while running

// Entry point of the dapper tool. args excludes the program name. Results go
// to files, progress and errors to `err`, help and summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace dapper::cli
