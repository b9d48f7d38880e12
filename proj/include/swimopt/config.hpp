#pragma once

#include "swimopt/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swimopt {

/// Hierarchical plain-text configuration.
///
///     # comment
///     seed = 7
///     head {
///       shape = ellipsoid
///       radii = 0.874 0.874 1.311
///     }
///     flagellum { wavelength = 1.0 }
///     flagellum { wavelength = 1.5 }
///
/// Values are kept as strings and converted on access. Blocks may repeat; a
/// dotted path such as "head.radii" addresses the first block of that name.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<input>");
  static Config parse_string(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& path) const;
  std::optional<std::string> find(const std::string& path) const;
  std::string get_string(const std::string& path, const std::string& fallback) const;
  double get_double(const std::string& path, double fallback) const;
  long long get_int(const std::string& path, long long fallback) const;
  bool get_bool(const std::string& path, bool fallback) const;
  std::vector<double> get_doubles(const std::string& path) const;

  /// Set a value, creating intermediate blocks as needed.
  void set(const std::string& path, const std::string& value);
  Config& add_block(const std::string& name);

  const Config* block(const std::string& name) const;
  std::vector<const Config*> blocks(const std::string& name) const;
  const std::vector<std::pair<std::string, std::string>>& values() const { return values_; }
  const std::vector<std::pair<std::string, std::shared_ptr<Config>>>& children() const { return blocks_; }
  /// Replace every block called `name` by a copy of `block`.
  void replace_blocks(const std::string& name, const Config& block);

  /// Apply overrides from environment variables PREFIX + PATH where PATH
  /// components are separated by a double underscore, e.g.
  /// SWIMOPT_MESH__N_AXIAL=60 sets mesh.n_axial. Returns the applied paths.
  std::vector<std::string> apply_env(const std::string& prefix = "SWIMOPT_");

  /// Canonical text form; parse(dump()) reproduces the same tree.
  std::string dump(int indent = 0) const;

 private:
  const Config* resolve(const std::string& path, std::string& leaf) const;
  std::vector<std::pair<std::string, std::string>> values_;
  std::vector<std::pair<std::string, std::shared_ptr<Config>>> blocks_;
};

/// FNV-1a 64-bit hash, used for the config digest in run manifests.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace swimopt
