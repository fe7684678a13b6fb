// Copyright 2026 The fedsim Authors
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
#include <string_view>
#include <vector>

namespace fedsim::cli {

struct Check {
  // kWithin: |measured - expected| <= bound. kAtMost / kAtLeast compare
  // measured against bound directly.
  enum Kind { kWithin, kAtMost, kAtLeast };

  std::string name;
  Kind kind = kWithin;
  double measured = 0.0;
  double expected = 0.0;
  double bound = 0.0;
  bool passed = false;
};

std::vector<Check> verify_grad();
std::vector<Check> verify_theorem2();
std::vector<Check> verify_ot();
std::vector<Check> verify_stats();

// Throws ArgumentError for an unknown suite name.
std::vector<Check> run_suite(std::string_view suite);

void print_checks(const std::vector<Check>& checks, std::ostream& out);

}  // namespace fedsim::cli
