#include "cpr/random.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace cpr {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SeededStream::SeededStream(std::uint64_t seed, std::string_view tag) : key_(mix64(mix64(seed) ^ fnv1a(tag))) {}

SeededStream SeededStream::child(std::string_view tag) const { return SeededStream(mix64(key_ ^ fnv1a(tag))); }

SeededStream SeededStream::child(std::uint64_t index) const {
  return SeededStream(mix64(key_ + mix64(index ^ 0x5851f42d4c957f2dULL)));
}

double SeededStream::gaussian(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  std::uint64_t h = bits(a, b, c);
  double u1 = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
  double u2 = (static_cast<double>(mix64(h) >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::uint64_t> bernoulli_column(const SeededStream& s, std::uint64_t col, std::uint64_t rows, double q) {
  std::vector<std::uint64_t> out;
  for_each_bernoulli(s, col, rows, q, [&](std::uint64_t r) { out.push_back(r); });
  return out;
}

bool bernoulli_entry(const SeededStream& s, std::uint64_t row, std::uint64_t col, std::uint64_t rows, double q) {
  if (row >= rows) throw std::out_of_range("bernoulli_entry: row out of range");
  if (q <= 0.0) return false;
  if (q >= 1.0) return true;
  const double lq = std::log1p(-q);
  double pos = -1.0;
  for (std::uint64_t j = 0;; ++j) {
    pos += 1.0 + std::floor(std::log(s.uniform(col, j)) / lq);
    if (pos >= static_cast<double>(row)) return pos == static_cast<double>(row);
  }
}

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
  if (p == kMersenne61) {
    std::uint64_t lo = static_cast<std::uint64_t>(z & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(z >> 61);
    std::uint64_t r = lo + hi;
    return r >= kMersenne61 ? r - kMersenne61 : r;
  }
  return static_cast<std::uint64_t>(z % p);
}

}  // namespace

HashFamily::HashFamily(const SeededStream& s, std::uint64_t index, std::size_t t, std::uint64_t buckets,
                       std::uint64_t prime)
    : prime_(prime), buckets_(buckets) {
  if (t == 0 || buckets == 0 || prime < 2) throw std::invalid_argument("HashFamily: bad parameters");
  coeffs_.resize(t);
  for (std::size_t j = 0; j < t; ++j) coeffs_[j] = s.below(prime, index, j, 0x4a5b);
  if (t > 1 && coeffs_[t - 1] == 0) coeffs_[t - 1] = 1;
}

HashFamily::HashFamily(std::vector<std::uint64_t> coeffs, std::uint64_t prime, std::uint64_t buckets)
    : coeffs_(std::move(coeffs)), prime_(prime), buckets_(buckets) {
  if (coeffs_.empty() || buckets == 0 || prime < 2) throw std::invalid_argument("HashFamily: bad parameters");
  for (auto& c : coeffs_) c %= prime_;
}

std::uint64_t HashFamily::raw(std::uint64_t i) const {
  std::uint64_t x = i % prime_;
  std::uint64_t acc = 0;
  for (std::size_t j = coeffs_.size(); j-- > 0;) {
    acc = mulmod(acc, x, prime_) + coeffs_[j];
    if (acc >= prime_) acc -= prime_;
  }
  return acc;
}

std::size_t kwise_degree(double alpha, std::size_t k) {
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(k))));
}

std::vector<std::uint64_t> sample_without_replacement(const SeededStream& s, std::uint64_t n, std::uint64_t k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  // Floyd's algorithm
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::uint64_t> out;
  out.reserve(k);
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uint64_t t = s.below(j + 1, j, 0x51);
    std::uint64_t pick = chosen.count(t) ? j : t;
    chosen.insert(pick);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> random_permutation(const SeededStream& s, std::uint64_t n) {
  std::vector<std::uint64_t> p(n);
  for (std::uint64_t i = 0; i < n; ++i) p[i] = i;
  for (std::uint64_t i = n; i > 1; --i) std::swap(p[i - 1], p[s.below(i, i, 0x77)]);
  return p;
}

}  // namespace cpr
