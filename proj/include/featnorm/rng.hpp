#ifndef FEATNORM_RNG_HPP
#define FEATNORM_RNG_HPP

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace featnorm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Counter-based generator. Draw i of a stream is a pure function of
// (key, i), and substream keys are derived by mixing labels/indices into
// the key, so independent consumers can be given non-overlapping streams
// up front and parallel execution cannot change any result.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x5bf0263ad6b12f8dULL)) {}

  Rng stream(std::string_view label) const {
    return Rng(key_ ^ fnv1a64(label), tag{});
  }
  Rng stream(std::uint64_t index) const {
    return Rng(key_ ^ splitmix64(index + 0x9e3779b97f4a7c15ULL), tag{});
  }

  std::uint64_t next_u64() {
    return splitmix64(key_ ^ splitmix64(counter_++ ^ 0xd1342543de82ef95ULL));
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  struct tag {};
  Rng(std::uint64_t raw_key, tag) : key_(raw_key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace featnorm

#endif
