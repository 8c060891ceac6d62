#include "icclab/stiefel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace icclab {

Eigen::MatrixXd orthonormalize_rows(const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd gram = y * y.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * y;
}

double orthonormality_defect(const Eigen::MatrixXd& frame) {
  const auto k = frame.rows();
  return (frame * frame.transpose() - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd random_frame(int k, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(k, n);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = gauss(rng);
  for (int r = 0; r < k; ++r) {
    for (int s = 0; s < r; ++s) g.row(r) -= g.row(r).dot(g.row(s)) * g.row(s);
    g.row(r).normalize();
  }
  return g;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

struct Iterate {
  StiefelPoint x;
  double f = 0.0;
  Eigen::MatrixXd gf;  // Riemannian gradient, frame part
  Eigen::VectorXd gp;  // Euclidean gradient, box part
};

Eigen::MatrixXd tangent_project(const Eigen::MatrixXd& frame, const Eigen::MatrixXd& g) {
  const Eigen::MatrixXd a = g * frame.transpose();
  return g - 0.5 * (a + a.transpose()) * frame;
}

Iterate evaluate(const StiefelObjective& f, StiefelPoint x) {
  Iterate it;
  Eigen::MatrixXd gf(x.frame.rows(), x.frame.cols());
  Eigen::VectorXd gp(x.params.size());
  it.f = f(x.frame, x.params, &gf, &gp);
  it.gf = tangent_project(x.frame, gf);
  it.gp = gp;
  it.x = std::move(x);
  return it;
}

StiefelPoint step(const Iterate& it, double t, const Box& box) {
  return {orthonormalize_rows(it.x.frame - t * it.gf), box.clamp(it.x.params - t * it.gp)};
}

double projected_gradient_norm(const Iterate& it, const Box& box) {
  const Eigen::VectorXd dp = box.clamp(it.x.params - it.gp) - it.x.params;
  return std::sqrt(it.gf.squaredNorm() + dp.squaredNorm());
}

// Orthogonal n x n matrix whose first k rows are the frame.
Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& frame) {
  const auto k = frame.rows(), n = frame.cols();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(frame.transpose()).householderQ();
  Eigen::MatrixXd basis(n, n);
  basis.topRows(k) = frame;
  basis.bottomRows(n - k) = q.rightCols(n - k).transpose();
  return basis;
}

Eigen::MatrixXd cayley(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  return (id - 0.5 * x).partialPivLu().solve(id + 0.5 * x);
}

// Chart coordinates x_ab (a < k, a < b) of a skew matrix acting on the completed basis.
struct Chart {
  int k = 0;
  int n = 0;
  std::vector<std::pair<int, int>> pairs;

  Chart(int k_, int n_) : k(k_), n(n_) {
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  int size() const { return static_cast<int>(pairs.size()); }

  Eigen::MatrixXd skew(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < size(); ++t) {
      s(pairs[t].first, pairs[t].second) = x(t);
      s(pairs[t].second, pairs[t].first) = -x(t);
    }
    return s;
  }

  Eigen::VectorXd gradient(const Eigen::MatrixXd& gf, const Eigen::MatrixXd& basis) const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a.topRows(k) = gf * basis.transpose();
    Eigen::VectorXd g(size());
    for (int t = 0; t < size(); ++t) g(t) = a(pairs[t].first, pairs[t].second) - a(pairs[t].second, pairs[t].first);
    return g;
  }
};

}  // namespace

double stiefel_gradient_norm(const StiefelObjective& f, const StiefelPoint& x, const Box& box) {
  return projected_gradient_norm(evaluate(f, x), box);
}

DescentResult stiefel_newton_polish(const StiefelObjective& f, StiefelPoint start, const Box& box,
                                    const PolishOptions& opts) {
  const int k = static_cast<int>(start.frame.rows()), n = static_cast<int>(start.frame.cols());
  const Chart chart(k, n);
  const int nf = chart.size();
  const int np = static_cast<int>(box.size());
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  start.frame = orthonormalize_rows(start.frame);
  start.params = box.clamp(start.params);
  Iterate cur = evaluate(f, std::move(start));
  Eigen::MatrixXd basis = complete_basis(cur.x.frame);

  DescentResult res;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter + 1;
    const double pg = projected_gradient_norm(cur, box);
    if (!std::isfinite(cur.f)) break;
    if (pg <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    // free coordinates: all frame directions plus parameters not held at an active bound
    std::vector<int> free_params;
    for (int i = 0; i < np; ++i) {
      const bool at_lo = cur.x.params(i) <= box.lo(i) && cur.gp(i) > 0.0;
      const bool at_hi = cur.x.params(i) >= box.hi(i) && cur.gp(i) < 0.0;
      if (!at_lo && !at_hi) free_params.push_back(i);
    }
    const int d = nf + static_cast<int>(free_params.size());
    Eigen::VectorXd g(d);
    g.head(nf) = chart.gradient(cur.gf, basis);
    for (std::size_t i = 0; i < free_params.size(); ++i) g(nf + i) = cur.gp(free_params[i]);

    auto gradient_at = [&](const Eigen::VectorXd& dx) {
      Eigen::VectorXd full_p = cur.x.params;
      for (std::size_t i = 0; i < free_params.size(); ++i) full_p(free_params[i]) += dx(nf + i);
      const Eigen::MatrixXd rot = cayley(chart.skew(dx.head(nf)));
      const Eigen::MatrixXd moved = rot * basis;
      const Iterate it = evaluate(f, {moved.topRows(k), full_p});
      Eigen::VectorXd out(d);
      out.head(nf) = chart.gradient(it.gf, moved);
      for (std::size_t i = 0; i < free_params.size(); ++i) out(nf + i) = it.gp(free_params[i]);
      return out;
    };

    Eigen::MatrixXd h(d, d);
    for (int c = 0; c < d; ++c) {
      double up = opts.fd_step, down = opts.fd_step;
      if (c >= nf) {
        const int pi = free_params[c - nf];
        up = std::min(up, box.hi(pi) - cur.x.params(pi));
        down = std::min(down, cur.x.params(pi) - box.lo(pi));
      }
      Eigen::VectorXd e_up = Eigen::VectorXd::Zero(d), e_down = Eigen::VectorXd::Zero(d);
      e_up(c) = up;
      e_down(c) = -down;
      const Eigen::VectorXd g_up = up > 0.0 ? gradient_at(e_up) : g;
      const Eigen::VectorXd g_down = down > 0.0 ? gradient_at(e_down) : g;
      h.col(c) = (g_up - g_down) / (up + down);
    }
    h = 0.5 * (h + h.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    const double floor = std::max(1e-10 * ev.maxCoeff(), 1e-14);
    const Eigen::VectorXd dir =
        -es.eigenvectors() * ((es.eigenvectors().transpose() * g).array() / ev.cwiseMax(floor).array()).matrix();
    const double slope = g.dot(dir);

    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      const Eigen::VectorXd dx = t * dir;
      Eigen::VectorXd p = cur.x.params;
      for (std::size_t i = 0; i < free_params.size(); ++i) p(free_params[i]) += dx(nf + i);
      const Eigen::MatrixXd moved = cayley(chart.skew(dx.head(nf))) * basis;
      StiefelPoint trial{orthonormalize_rows(moved.topRows(k)), box.clamp(p)};
      const double ft = f(trial.frame, trial.params, nullptr, nullptr);
      if (!std::isfinite(ft)) continue;
      const double noise = 8.0 * kEps * (1.0 + std::abs(cur.f));
      const bool armijo = ft <= cur.f + 1e-4 * t * slope;
      if (!armijo && !(ft <= cur.f + noise)) continue;
      Iterate next = evaluate(f, std::move(trial));
      if (!armijo && !(projected_gradient_norm(next, box) < pg)) continue;
      cur = std::move(next);
      basis = complete_basis(cur.x.frame);
      accepted = true;
      break;
    }
    if (!accepted) {
      res.converged = pg <= opts.grad_tol;
      break;
    }
  }
  if (!res.converged) res.converged = projected_gradient_norm(cur, box) <= opts.grad_tol;
  res.value = cur.f;
  res.point = std::move(cur.x);
  return res;
}

DescentResult stiefel_descent(const StiefelObjective& f, StiefelPoint start, const Box& box,
                              const DescentOptions& opts) {
  start.frame = orthonormalize_rows(start.frame);
  start.params = box.clamp(start.params);
  Iterate cur = evaluate(f, std::move(start));

  DescentResult res;
  double t = 1e-1;
  const Iterate* prev = nullptr;
  Iterate prev_store;
  int stall = 0;
  // best configuration probed anywhere, rejected line-search trials included
  StiefelPoint best_trial;
  double best_trial_f = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter + 1;
    if (!std::isfinite(cur.f)) break;
    if (projected_gradient_norm(cur, box) <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    if (prev != nullptr) {
      const double ss = (cur.x.frame - prev->x.frame).squaredNorm() + (cur.x.params - prev->x.params).squaredNorm();
      const double sy = (cur.x.frame - prev->x.frame).cwiseProduct(cur.gf - prev->gf).sum() +
                        (cur.x.params - prev->x.params).dot(cur.gp - prev->gp);
      t = sy > 0.0 ? ss / sy : 2.0 * t;
      t = std::clamp(t, 1e-12, 1e6);
    }

    bool accepted = false;
    Iterate next;
    for (int bt = 0; bt < 60; ++bt) {
      StiefelPoint trial = step(cur, t, box);
      const double disp = (trial.frame - cur.x.frame).squaredNorm() + (trial.params - cur.x.params).squaredNorm();
      const double ft = f(trial.frame, trial.params, nullptr, nullptr);
      if (ft < best_trial_f) {
        best_trial_f = ft;
        best_trial = trial;
      }
      if (std::isfinite(ft) && ft <= cur.f - opts.armijo * disp / t) {
        next = evaluate(f, std::move(trial));
        accepted = true;
        break;
      }
      t *= 0.5;
      if (disp == 0.0) break;
    }
    if (!accepted) {
      // no decrease available at working precision
      res.converged = true;
      break;
    }

    const double decrease = cur.f - next.f;
    stall = decrease <= 1e-15 * (1.0 + std::abs(cur.f)) ? stall + 1 : 0;
    prev_store = std::move(cur);
    prev = &prev_store;
    cur = std::move(next);
    if (stall >= 20) {
      res.converged = true;
      break;
    }
  }

  if (best_trial_f < cur.f) {
    res.point = std::move(best_trial);
    res.value = best_trial_f;
  } else {
    res.point = std::move(cur.x);
    res.value = cur.f;
  }
  return res;
}

MultiStartResult multistart_minimize(const StiefelObjective& f, int k, int n, const Box& box,
                                     const MultiStartOptions& opts, std::span<const StiefelPoint> warm_starts) {
  MultiStartResult out;
  std::vector<DescentResult> found;
  auto run = [&](StiefelPoint p) {
    DescentResult r = stiefel_descent(f, std::move(p), box, opts.descent);
    out.restarts_used += 1;
    out.total_iterations += r.iterations;
    found.push_back(std::move(r));
  };
  for (const auto& w : warm_starts) run(w);
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    StiefelPoint p;
    p.frame = random_frame(k, n, rng);
    p.params.resize(box.size());
    for (Eigen::Index i = 0; i < box.size(); ++i) p.params(i) = box.lo(i) + unit(rng) * (box.hi(i) - box.lo(i));
    run(std::move(p));
  }
  out.value = std::numeric_limits<double>::infinity();
  if (found.empty()) return out;

  // stable order keeps the earliest start first among ties
  std::vector<std::size_t> order(found.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return found[a].value < found[b].value; });

  std::vector<double> polished_values;
  for (std::size_t idx : order) {
    if (static_cast<int>(polished_values.size()) >= opts.polish_candidates) break;
    const double v = found[idx].value;
    const double dup_tol = 1e-12 * (1.0 + std::abs(v));
    bool duplicate = false;
    for (double pv : polished_values) duplicate = duplicate || std::abs(pv - v) <= dup_tol;
    if (duplicate) continue;
    polished_values.push_back(v);
    DescentResult p = stiefel_newton_polish(f, found[idx].point, box, opts.polish);
    out.total_iterations += p.iterations;
    if (p.value < out.value) {
      out.value = p.value;
      out.best = std::move(p.point);
      out.converged = p.converged;
    }
  }
  return out;
}

}  // namespace icclab
