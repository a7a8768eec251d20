#pragma once

namespace rtdense {

/// Thread budget shared by all data-parallel loops. Outputs are bit-identical
/// for any budget; this only bounds how many OpenMP threads a region may use.
int thread_count();

/// 0 restores the hardware default.
void set_thread_count(int n);

}  // namespace rtdense
