/*
 * stackselect : motion assessment and reference stack selection
 *
 * Copyright 2026 the stackselect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>

namespace stackselect {

/// Worker count used by data-parallel loops. STACKSELECT_THREADS caps it;
/// 0 or unset means hardware concurrency.
int worker_count();

/// Runs fn(begin, end) over disjoint ranges covering [0, n). Callers must
/// write disjoint outputs; per-element results may not depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Sum of chunk_sum over fixed-size chunks of [0, n), combined in chunk
/// order. The result is identical for any worker count.
double deterministic_sum(std::size_t n,
                         const std::function<double(std::size_t, std::size_t)>& chunk_sum);

}  // namespace stackselect
