#pragma once

#include "swimopt/core.hpp"

#include <cstdint>
#include <vector>

namespace swimopt {

/// splitmix64 step; used to derive independent seed streams from one run seed.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Halton sequence in [0, 1)^d with random digit permutations per dimension and
/// digit position. Deterministic given the seed.
class ScrambledHalton {
 public:
  ScrambledHalton(int dim, std::uint64_t seed);
  /// Points index, index+1, ... as rows.
  Eigen::MatrixXd draw(int n);
  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint64_t index_ = 0;
  std::vector<int> base_;
  std::vector<std::vector<std::vector<int>>> perm_;  // [dim][digit][value]
};

/// First n primes.
std::vector<int> first_primes(int n);

}  // namespace swimopt
