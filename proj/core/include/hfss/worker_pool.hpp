/*
 * Copyright 2026 The HFSS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HFSS_WORKER_POOL_HPP_
#define HFSS_WORKER_POOL_HPP_

#include <cstddef>
#include <functional>

namespace hfss {

// Runs task(i) for every i in [0, count) on up to `workers` threads.
// Tasks must write their results to slot i only; the first exception
// thrown by any task is rethrown after all threads have joined.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

}  // namespace hfss

#endif  // HFSS_WORKER_POOL_HPP_
