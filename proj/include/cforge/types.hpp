#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cforge {

// Inference arithmetic runs in float32 by default. The 64-bit variant of the
// library (CFORGE_REAL_DOUBLE) exists for gradient-check and acceptance
// builds, where finite-difference tolerances need double precision.
#ifdef CFORGE_REAL_DOUBLE
using real = double;
#else
using real = float;
#endif

using i64 = std::int64_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

}  // namespace cforge
