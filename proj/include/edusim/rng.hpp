#pragma once

#include <cstdint>
#include <random>

namespace edusim {

// Portable seeded generator used by every stochastic part of the toolkit.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// The conversions below are written out by hand because the standard library
// distributions are implementation-defined. The whole scheme is part of the
// output contract:
//
//   uniform01()      (next() >> 11) * 2^-53                     in [0, 1)
//   uniform(a, b)    a + (b - a) * uniform01()
//   sign()           top bit of next(): 1 -> +1, 0 -> -1
//   gaussian()       Box-Muller, cosine branch, one normal per two draws:
//                    u1 = 1 - uniform01(), u2 = uniform01(),
//                    sqrt(-2 ln u1) * cos(2 pi u2)
//   below(n)         rejection sampling on next() against the largest
//                    multiple of n, then modulo n
//
// Substreams: learner i of a cohort with seed s uses
//   Rng(substream_seed(s, i)),  substream_seed(s, i) = splitmix64(s ^ splitmix64(i))
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi);
  double sign();
  double gaussian();
  std::uint64_t below(std::uint64_t n);
  std::uint64_t in_range(std::uint64_t lo, std::uint64_t hi);  // inclusive

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace edusim
