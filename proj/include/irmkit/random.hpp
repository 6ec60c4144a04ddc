#ifndef IRMKIT_RANDOM_HPP
#define IRMKIT_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "irmkit/special.hpp"

namespace irmkit {

// SplitMix64 finalizer. Used only to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream derivation rule: seed(master, k) = splitmix64(master ^ splitmix64(k)).
// Chains use k = chain index; auxiliary streams (holdout, replicates) use
// tagged k values so that they never collide with chain streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master ^ splitmix64(stream));
}

// Stream tags for non-chain randomness.
namespace stream {
inline constexpr std::uint64_t kHoldout = 0x686F6C646F7574ULL;
inline constexpr std::uint64_t kReplicate = 0x7265706C6963ULL;
inline constexpr std::uint64_t kSimulate = 0x73696D756CULL;
}  // namespace stream

// Seeded generator: std::mt19937_64 underneath, Boost.Random distributions
// on top (their algorithms are fixed in the headers, so draws are
// reproducible for a given seed).
class Rng {
 public:
  using Engine = std::mt19937_64;
  using result_type = Engine::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return Engine::min(); }
  static constexpr result_type max() { return Engine::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) {
    boost::random::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Gamma with the given shape and rate (not scale).
  double gamma(double shape, double rate) {
    boost::random::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(engine_);
  }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  std::int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    boost::random::poisson_distribution<std::int64_t, double> dist(mean);
    return dist(engine_);
  }

  // Number of failures before the next success of a Bernoulli(p) sequence.
  std::uint64_t geometric_gap(double p) {
    const double u = 1.0 - uniform();  // (0, 1]
    const double gap = std::floor(std::log(u) / std::log1p(-p));
    if (!(gap < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(gap);
  }

  // Calls fn(t) for each t in [0, count) independently with probability p,
  // in increasing order, using geometric skips (cost proportional to hits).
  template <class Fn>
  void bernoulli_subset(std::uint64_t count, double p, Fn&& fn) {
    if (p <= 0.0 || count == 0) return;
    if (p >= 1.0) {
      for (std::uint64_t t = 0; t < count; ++t) fn(t);
      return;
    }
    std::uint64_t t = geometric_gap(p);
    while (t < count) {
      fn(t);
      const std::uint64_t gap = geometric_gap(p);
      if (gap >= count - t) break;
      t += gap + 1;
    }
  }

  // Inverse-CDF draw from unnormalized log weights.
  std::size_t categorical_log(std::span<const double> log_weights) {
    const double norm = log_sum_exp(log_weights);
    const double u = uniform();
    double cdf = 0.0;
    for (std::size_t k = 0; k < log_weights.size(); ++k) {
      cdf += std::exp(log_weights[k] - norm);
      if (u < cdf) return k;
    }
    // Round-off can leave cdf slightly below 1; fall back to the last
    // category with nonzero mass.
    for (std::size_t k = log_weights.size(); k-- > 0;) {
      if (std::isfinite(log_weights[k])) return k;
    }
    return log_weights.size() - 1;
  }

  // Fisher-Yates shuffle driven by index().
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  Engine engine_;
};

}  // namespace irmkit

#endif  // IRMKIT_RANDOM_HPP
