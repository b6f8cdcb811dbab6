#pragma once

#include <cstddef>
#include <functional>

namespace isotherm {

/// Worker count, capped by ISOTHERM_THREADS when set.
int thread_count();

/// Runs body(begin, end) over a fixed partition of [0, n). The partition
/// depends only on n and thread_count(), so results are reproducible as
/// long as body does not reduce across chunks.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace isotherm
