#include "swimopt/lowdisc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace swimopt {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0xd1b54a32d192ed03ULL);
  return splitmix64(s);
}

std::vector<int> first_primes(int n) {
  std::vector<int> p;
  for (int c = 2; static_cast<int>(p.size()) < n; ++c) {
    bool prime = true;
    for (int q : p) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) p.push_back(c);
  }
  return p;
}

ScrambledHalton::ScrambledHalton(int dim, std::uint64_t seed) : dim_(dim) {
  if (dim < 1) throw ParameterError("Halton dimension must be positive");
  base_ = first_primes(dim);
  std::mt19937_64 rng(seed);
  perm_.resize(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    const int b = base_[static_cast<std::size_t>(k)];
    // enough digits to exhaust double precision
    const int digits = static_cast<int>(std::ceil(53 * std::log(2.0) / std::log(static_cast<double>(b))));
    auto& pk = perm_[static_cast<std::size_t>(k)];
    pk.resize(static_cast<std::size_t>(digits));
    for (auto& p : pk) {
      p.resize(static_cast<std::size_t>(b));
      std::iota(p.begin(), p.end(), 0);
      // Fisher-Yates with explicit draws so the permutation does not depend on the library's shuffle
      for (int i = b - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
      }
    }
  }
}

Eigen::MatrixXd ScrambledHalton::draw(int n) {
  Eigen::MatrixXd out(n, dim_);
  for (int r = 0; r < n; ++r, ++index_) {
    for (int k = 0; k < dim_; ++k) {
      const auto b = static_cast<std::uint64_t>(base_[static_cast<std::size_t>(k)]);
      const auto& pk = perm_[static_cast<std::size_t>(k)];
      std::uint64_t i = index_;
      double f = 1.0 / static_cast<double>(b), x = 0;
      for (std::size_t digit = 0; digit < pk.size(); ++digit) {
        x += f * pk[digit][static_cast<std::size_t>(i % b)];
        i /= b;
        f /= static_cast<double>(b);
      }
      out(r, k) = std::min(x, std::nextafter(1.0, 0.0));
    }
  }
  return out;
}

}  // namespace swimopt
