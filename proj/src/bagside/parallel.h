// Copyright 2026 The BagSide Authors.
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

#ifndef BAGSIDE_PARALLEL_H_
#define BAGSIDE_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace bagside {

// Resolves a requested worker count: 0 means "auto" (hardware concurrency),
// and the result is never larger than `work_items` or smaller than 1.
size_t ResolveThreads(size_t requested, size_t work_items);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; callers write results into per-index slots so the
// reduction order stays deterministic. The first exception thrown by any
// worker is rethrown on the calling thread.
void ParallelFor(size_t n, size_t threads, const std::function<void(size_t)> &fn);

}  // namespace bagside

#endif  // BAGSIDE_PARALLEL_H_
