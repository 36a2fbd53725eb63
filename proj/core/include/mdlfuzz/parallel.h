// Copyright 2026 The mdlfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MDLFUZZ_PARALLEL_H_
#define MDLFUZZ_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace mdlfuzz {

// Logical CPU count, at least 1.
std::size_t DefaultJobs();

// Calls fn(i) for i in [0, n) on up to `jobs` threads (0 means DefaultJobs()).
// Indices are claimed in increasing order. Claiming stops once `keep_going`
// (if set) returns false or any call throws; the first exception is rethrown
// after all threads have joined.
void ParallelFor(std::size_t n, std::size_t jobs,
                 const std::function<void(std::size_t)>& fn,
                 const std::function<bool()>& keep_going = {});

}  // namespace mdlfuzz

#endif  // MDLFUZZ_PARALLEL_H_
