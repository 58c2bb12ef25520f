#pragma once

#include <cstdint>
#include <string>

namespace toolbench {

// Counter-mode hash stream. Output i is the big-endian read of the first
// 8 bytes of SHA-256(seed LE8 || 0x00 || label || 0x00 || counter LE8).
// Bit-exact on every platform, so any reimplementation replays the same
// episodes. Single-owner; copying forks an independent stream.
class SeededStream {
 public:
  SeededStream(uint64_t seed, std::string label)
      : seed_(seed), label_(std::move(label)), counter_(0) {}

  uint64_t next_u64();

  // next_u64() / 2^64, in [0, 1).
  double next_unit();

  // Uniform draw in [0, n). n must be positive. Modulo bias is negligible
  // for the pool sizes used here.
  uint64_t next_below(uint64_t n);

  uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t seed_;
  std::string label_;
  uint64_t counter_;
};

}  // namespace toolbench
