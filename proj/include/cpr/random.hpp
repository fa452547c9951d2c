#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cpr {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s);

// Counter-mode generator: every value is a pure function of (seed, tag, a, b, c),
// so layers can be regenerated in any order without storing them.
class SeededStream {
 public:
  SeededStream() = default;
  SeededStream(std::uint64_t seed, std::string_view tag);

  SeededStream child(std::string_view tag) const;
  SeededStream child(std::uint64_t index) const;

  std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t h = mix64(key_ ^ (a * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (b + 0x8cb92ba72f3d8dd7ULL));
    return mix64(h ^ (c + 0x632be59bd9b4e019ULL));
  }
  // open interval (0, 1)
  double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return (static_cast<double>(bits(a, b, c) >> 11) + 0.5) * 0x1.0p-53;
  }
  double gaussian(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;
  bool bernoulli(double q, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return uniform(a, b, c) < q;
  }
  int sign(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return (bits(a, b, c) >> 63) ? -1 : 1;
  }
  std::uint64_t below(std::uint64_t bound, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits(a, b, c)) * bound) >> 64);
  }
  std::uint64_t key() const { return key_; }

 private:
  explicit SeededStream(std::uint64_t key) : key_(key) {}
  std::uint64_t key_ = 0;
};

// Bernoulli(q) column of length rows, enumerated by geometric skipping.
// Success j of column col is driven by uniform(col, j).
template <class F>
void for_each_bernoulli(const SeededStream& s, std::uint64_t col, std::uint64_t rows, double q, F&& f) {
  if (q <= 0.0 || rows == 0) return;
  if (q >= 1.0) {
    for (std::uint64_t r = 0; r < rows; ++r) f(r);
    return;
  }
  const double lq = std::log1p(-q);
  double pos = -1.0;
  for (std::uint64_t j = 0;; ++j) {
    pos += 1.0 + std::floor(std::log(s.uniform(col, j)) / lq);
    if (pos >= static_cast<double>(rows)) return;
    f(static_cast<std::uint64_t>(pos));
  }
}

std::vector<std::uint64_t> bernoulli_column(const SeededStream& s, std::uint64_t col, std::uint64_t rows, double q);
// Answers a single entry by walking the same column sequence.
bool bernoulli_entry(const SeededStream& s, std::uint64_t row, std::uint64_t col, std::uint64_t rows, double q);

inline constexpr std::uint64_t kMersenne61 = (1ULL << 61) - 1;

// h(i) = (sum_j c_j i^j mod p) mod B, t coefficients => t-wise independent.
class HashFamily {
 public:
  HashFamily() = default;
  HashFamily(const SeededStream& s, std::uint64_t index, std::size_t t, std::uint64_t buckets,
             std::uint64_t prime = kMersenne61);
  HashFamily(std::vector<std::uint64_t> coeffs, std::uint64_t prime, std::uint64_t buckets);

  std::uint64_t raw(std::uint64_t i) const;
  std::uint64_t operator()(std::uint64_t i) const { return raw(i) % buckets_; }
  std::size_t independence() const { return coeffs_.size(); }
  std::uint64_t buckets() const { return buckets_; }
  std::uint64_t prime() const { return prime_; }

 private:
  std::vector<std::uint64_t> coeffs_;
  std::uint64_t prime_ = kMersenne61;
  std::uint64_t buckets_ = 1;
};

// independence for "O(k)-wise" families
std::size_t kwise_degree(double alpha, std::size_t k);

std::vector<std::uint64_t> sample_without_replacement(const SeededStream& s, std::uint64_t n, std::uint64_t k);
std::vector<std::uint64_t> random_permutation(const SeededStream& s, std::uint64_t n);

}  // namespace cpr
