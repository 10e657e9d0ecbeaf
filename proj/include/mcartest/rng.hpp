#ifndef MCARTEST_RNG_HPP
#define MCARTEST_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace mcar {

std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a, used to fold strings (scenario serializations) into stream labels.
std::uint64_t hash_bytes(std::string_view bytes);

// Deterministic random stream keyed by (master seed, labels). The engine is
// mt19937_64, whose output sequence is fixed by the standard; the variate
// transforms below are implemented here rather than taken from <random> so that
// the draws are identical across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> labels);
  RngStream(std::uint64_t master_seed, std::span<const std::uint64_t> labels);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // open interval (0, 1)
  double normal();
  double exponential();
  double gamma(double shape);  // scale 1
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mcar

#endif
