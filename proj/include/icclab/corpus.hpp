#pragma once

// Named tensor collections shared by the acceptance suite and the CLI.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icclab/construct.hpp"
#include "icclab/curvature.hpp"

namespace icclab {

struct CorpusEntry {
  std::string name;
  Curvature tensor;
};

/// Fifty coordinate-aligned model tensors in dimensions 4..8: spheres,
/// cylinders, S^k x R^{n-k}, S^a x S^b, perturbed cylinders, the identity with
/// one coordinate plane removed, and zero tensors.
std::vector<CorpusEntry> regression_corpus();

/// `count` seeded samples of one random class, cycling through `dims`.
std::vector<CorpusEntry> random_corpus(RandomClass cls, int count, std::span<const int> dims, std::uint64_t seed);

/// sphere, cylinder, perturbed_cylinder, identity_minus_plane, zero or a
/// random class name; `param` is the curvature constant, eps or seed.
Curvature named_tensor(const std::string& kind, int n, double param);

}  // namespace icclab
