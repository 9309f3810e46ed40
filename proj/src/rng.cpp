#include "stochsym/rng.hpp"

namespace stochsym {

Stream::Stream(std::uint64_t seed, std::uint32_t leg, std::uint64_t index)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      ctr_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), leg, 0} {}

}  // namespace stochsym
