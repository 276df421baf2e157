#pragma once

#include <cstdint>
#include <random>

namespace ffnav
{

// splitmix64 step; used to turn (seed, stream) pairs into well-mixed
// engine seeds so that per-frame generators are independent.
inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
  return splitmix64(splitmix64(seed) ^ stream);
}

// Small deterministic RNG facade. A fresh instance is created per frame /
// per use-site from a mixed seed, which keeps every consumer reproducible
// independently of what the others drew.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return uniform_(engine_); }

  double gaussian() { return gaussian_(engine_); }

  std::mt19937_64 & engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> gaussian_{0.0, 1.0};
};

}  // namespace ffnav
