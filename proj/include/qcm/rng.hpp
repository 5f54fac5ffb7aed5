#pragma once

#include <array>
#include <cstdint>

namespace qcm {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based stream: the output is a pure function of (masterSeed, streamIndex)
/// and the number of draws taken. Distinct stream indices never share a counter.
class RngStream {
  public:
    RngStream(std::uint64_t masterSeed, std::uint64_t streamIndex);

    std::uint64_t masterSeed() const { return seed_; }
    std::uint64_t streamIndex() const { return stream_; }

    std::uint32_t nextU32();
    std::uint64_t nextU64();
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal (Box-Muller).
    double normal();

  private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool hasSpare_ = false;
    double spare_ = 0.0;
};

}  // namespace qcm
