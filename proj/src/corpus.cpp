#include "icclab/corpus.hpp"

#include <cstdio>

#include "icclab/stiefel.hpp"

namespace icclab {

namespace {

std::string label(const char* fmt, double a, double b, double c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

Curvature identity_minus_plane(int n) {
  Eigen::MatrixXd m = identity_operator<double>(n).operator_matrix();
  m(pair_index(0, 1, n), pair_index(0, 1, n)) = 0.0;
  return Curvature::from_operator(n, m, BianchiPolicy::Trust);
}

}  // namespace

std::vector<CorpusEntry> regression_corpus() {
  std::vector<CorpusEntry> out;
  for (int n = 4; n <= 8; ++n)
    for (double c : {1.0, 0.5}) out.push_back({label("sphere(n=%g,c=%g)", n, c, 0), sphere_tensor(n, c)});
  for (int n = 4; n <= 8; ++n) out.push_back({label("cylinder(n=%g,c=%g)", n, 1, 0), cylinder_tensor(n, 1.0)});
  for (int n = 5; n <= 8; ++n) out.push_back({label("cylinder(n=%g,c=%g)", n, 2, 0), cylinder_tensor(n, 2.0)});
  for (int n = 5; n <= 8; ++n)
    for (int flat : {2, 3}) {
      const int k = n - flat;
      out.push_back({label("sphere(%g)xR^%g", k, flat, 0), direct_sum(sphere_tensor(k, 1.0), Curvature(flat))});
    }
  for (auto [a, b] : {std::pair{2, 3}, {3, 3}, {2, 4}, {3, 4}, {4, 4}})
    out.push_back({label("sphere(%g)xsphere(%g),c2=%g", a, b, 1), direct_sum(sphere_tensor(a, 1.0), sphere_tensor(b, 1.0))});
  for (auto [a, b] : {std::pair{3, 3}, {2, 4}, {3, 4}})
    out.push_back(
        {label("sphere(%g)xsphere(%g),c2=%g", a, b, 0.5), direct_sum(sphere_tensor(a, 1.0), sphere_tensor(b, 0.5))});
  for (int n = 5; n <= 8; ++n)
    for (double eps : {0.02, 0.1})
      out.push_back({label("perturbed_cylinder(n=%g,eps=%g)", n, eps, 0), perturbed_cylinder_tensor(n, eps)});
  for (int n = 4; n <= 8; ++n) out.push_back({label("identity_minus_plane(n=%g)", n, 0, 0), identity_minus_plane(n)});
  for (int n : {5, 6}) out.push_back({label("zero(n=%g)", n, 0, 0), Curvature(n)});
  return out;
}

std::vector<CorpusEntry> random_corpus(RandomClass cls, int count, std::span<const int> dims, std::uint64_t seed) {
  if (dims.empty()) throw Error(ErrorCode::InvalidArgument, "corpus needs at least one dimension");
  std::vector<CorpusEntry> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int n = dims[static_cast<std::size_t>(i) % dims.size()];
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    out.push_back({std::string(to_string(cls)) + "#" + std::to_string(i) + "(n=" + std::to_string(n) + ")",
                   random_tensor<double>(n, s, cls)});
  }
  return out;
}

Curvature named_tensor(const std::string& kind, int n, double param) {
  if (kind == "sphere") return sphere_tensor(n, param);
  if (kind == "cylinder") return cylinder_tensor(n, param);
  if (kind == "perturbed_cylinder") return perturbed_cylinder_tensor(n, param);
  if (kind == "identity_minus_plane") return identity_minus_plane(n);
  if (kind == "zero") return Curvature(n);
  return random_tensor<double>(n, static_cast<std::uint64_t>(param), random_class_from_string(kind));
}

}  // namespace icclab
