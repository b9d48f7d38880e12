#include "swimopt/scbo.hpp"

#include "swimopt/lowdisc.hpp"

#include <chrono>
#include <limits>
#include <random>

namespace swimopt {

double Observation::violation() const {
  if (failed) return 1.0;
  double s = 0;
  for (double v : c) s += std::max(v, 0.0);
  return s;
}

int select_center(const std::vector<Observation>& obs) { return select_center(obs, 0); }

int select_center(const std::vector<Observation>& obs, std::size_t first) {
  int best = -1;
  for (std::size_t i = first; i < obs.size(); ++i) {
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    // strict comparison keeps the earliest index on ties
    if (better_than(obs[i], obs[static_cast<std::size_t>(best)])) best = static_cast<int>(i);
  }
  return best;
}

bool better_than(const Observation& a, const Observation& b) {
  if (b.feasible) return a.feasible && a.J < b.J;
  if (a.feasible) return true;
  return a.violation() < b.violation();
}

int default_candidates(int d) { return std::min(5000, std::max(2000, 200 * d)); }

Eigen::MatrixXd generate_candidates(const Eigen::VectorXd& center, double length, int r, std::uint64_t seed,
                                    double perturb) {
  const auto d = static_cast<int>(center.size());
  if (d < 1 || r < 1) throw ParameterError("candidate generation needs a positive dimension and count");
  if (perturb < 0) perturb = std::min(1.0, 20.0 / d);
  const Eigen::ArrayXd lb = (center.array() - length / 2).max(0.0);
  const Eigen::ArrayXd ub = (center.array() + length / 2).min(1.0);
  ScrambledHalton halton(d, seed);
  const Eigen::MatrixXd base = halton.draw(r);
  std::mt19937_64 rng(derive_seed(seed, 1));
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  Eigen::MatrixXd out(r, d);
  for (int i = 0; i < r; ++i) {
    out.row(i) = center.transpose();
    int changed = 0;
    for (int k = 0; k < d; ++k)
      if (uniform() < perturb) {
        out(i, k) = lb(k) + (ub(k) - lb(k)) * base(i, k);
        ++changed;
      }
    if (changed == 0) {
      const auto k = static_cast<int>(rng() % static_cast<std::uint64_t>(d));
      out(i, k) = lb(k) + (ub(k) - lb(k)) * base(i, k);
    }
  }
  return out;
}

std::vector<int> select_batch(const GaussianProcess& objective, const std::vector<GaussianProcess>& constraints,
                              const Eigen::MatrixXd& candidates, int q, std::uint64_t seed) {
  if (candidates.rows() < 1 || q < 1) throw ParameterError("batch selection needs candidates and q >= 1");
  const Eigen::MatrixXd fj = objective.sample(candidates, q, derive_seed(seed, 0));
  std::vector<Eigen::MatrixXd> fc;
  for (std::size_t k = 0; k < constraints.size(); ++k)
    fc.push_back(constraints[k].sample(candidates, q, derive_seed(seed, k + 1)));
  std::vector<int> picks;
  for (int j = 0; j < q; ++j) {
    int best_feasible = -1, best_violation = -1;
    double fbest = std::numeric_limits<double>::infinity(), vbest = fbest;
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
      double v = 0;
      for (const auto& c : fc) v += std::max(c(i, j), 0.0);
      if (v <= 0) {
        if (fj(i, j) < fbest) fbest = fj(i, j), best_feasible = static_cast<int>(i);
      } else if (v < vbest) {
        vbest = v, best_violation = static_cast<int>(i);
      }
    }
    picks.push_back(best_feasible >= 0 ? best_feasible : best_violation);
  }
  return picks;
}

bool update_trust_region(TrustRegionState& s, const std::vector<Observation>& obs, std::size_t session_start,
                         std::size_t batch_start) {
  if (s.center_index < 0) throw ParameterError("trust region has no center");
  const Observation& center = obs[static_cast<std::size_t>(s.center_index)];
  bool success = false;
  for (std::size_t i = batch_start; i < obs.size(); ++i) success = success || better_than(obs[i], center);
  if (success) {
    ++s.successes;
    s.failures = 0;
  } else {
    ++s.failures;
    s.successes = 0;
  }
  if (s.successes >= s.tau_success) {
    s.length = std::min(2 * s.length, s.length_max);
    s.successes = 0;
  }
  if (s.failures >= s.tau_failure) {
    s.length /= 2;
    s.failures = 0;
  }
  s.center_index = select_center(obs, session_start);
  s.center = obs[static_cast<std::size_t>(s.center_index)].x;
  return success;
}

std::vector<double> best_feasible_trace(const std::vector<Observation>& history) {
  std::vector<double> out;
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& o : history) {
    if (o.feasible && (std::isnan(best) || o.J < best)) best = o.J;
    out.push_back(best);
  }
  return out;
}

ScboResult scbo_run(const Evaluator& f, int d, const ScboOptions& opt) {
  if (d < 1) throw ParameterError("SCBO needs a positive dimension");
  const int q = opt.batch;
  const int n_init = opt.n_init > 0 ? opt.n_init : 3 * d;
  const int r = opt.candidates > 0 ? opt.candidates : default_candidates(d);
  const int tau_f = opt.tau_failure > 0 ? opt.tau_failure : std::max((d + q - 1) / q, 2);
  if (q < 1) throw ParameterError("batch size must be positive");
  if (opt.budget < n_init) throw ParameterError("budget must cover the initial design of " + std::to_string(n_init));

  const auto t0 = std::chrono::steady_clock::now();
  ScboResult res;
  auto& obs = res.history;
  int m = -1;  // number of constraints, fixed by the first successful evaluation

  auto evaluate = [&](const Eigen::VectorXd& x, int batch, double length, int center) {
    Observation o;
    o.x = x;
    o.index = static_cast<int>(obs.size());
    o.batch = batch;
    o.length = length;
    o.center = center;
    try {
      Evaluation e = f(x);
      if (!std::isfinite(e.J)) throw EvaluationError("non-finite objective");
      for (double v : e.c)
        if (std::isnan(v)) throw EvaluationError("NaN constraint");
      if (m < 0) m = static_cast<int>(e.c.size());
      if (static_cast<int>(e.c.size()) != m) throw EvaluationError("constraint count changed during the run");
      o.J = e.J;
      o.c = std::move(e.c);
      o.feasible = true;
      for (double v : o.c) o.feasible = o.feasible && v <= 0;
    } catch (const std::exception& e) {
      o.failed = true;
      o.error = e.what();
      o.J = std::numeric_limits<double>::quiet_NaN();
      o.c.assign(static_cast<std::size_t>(std::max(m, 0)), 1.0);
    }
    o.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    obs.push_back(std::move(o));
    if (opt.on_evaluation) opt.on_evaluation(obs.back());
  };

  TrustRegionState state;
  state.tau_success = opt.tau_success;
  state.tau_failure = tau_f;
  state.length_min = opt.length_min;
  state.length_max = opt.length_max;
  state.length_init = opt.length_init;

  int batch = 0;
  std::size_t session = 0;
  auto initial_design = [&](int restart) {
    session = obs.size();
    state.length = state.length_init;
    state.successes = state.failures = 0;
    int n = n_init;
    if (restart == 0) {
      for (const auto& x : opt.warm_start) {
        if (x.size() != d) throw ParameterError("warm-start point has the wrong dimension");
        if (static_cast<int>(obs.size()) >= opt.budget) break;
        evaluate(x, batch, state.length, -1);
        --n;
      }
    }
    ScrambledHalton halton(d, derive_seed(opt.seed, 100 + static_cast<std::uint64_t>(restart)));
    const Eigen::MatrixXd X = halton.draw(std::max(n, 0));
    for (Eigen::Index i = 0; i < X.rows() && static_cast<int>(obs.size()) < opt.budget; ++i)
      evaluate(X.row(i).transpose(), batch, state.length, -1);
    ++batch;
    state.center_index = select_center(obs, session);
    state.center = obs[static_cast<std::size_t>(state.center_index)].x;
  };
  initial_design(0);
  if (m < 0) m = 1;
  for (auto& o : obs)
    if (o.failed) o.c.assign(static_cast<std::size_t>(m), 1.0);

  while (static_cast<int>(obs.size()) < opt.budget) {
    // surrogates on the current session only
    const std::size_t n = obs.size() - session;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), d);
    Eigen::VectorXd yJ(static_cast<Eigen::Index>(n));
    std::vector<Eigen::VectorXd> yc(static_cast<std::size_t>(m), Eigen::VectorXd(static_cast<Eigen::Index>(n)));
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = session; i < obs.size(); ++i)
      if (!obs[i].failed) worst = std::max(worst, obs[i].J);
    if (!std::isfinite(worst)) worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Observation& o = obs[session + i];
      if (o.c.size() != static_cast<std::size_t>(m)) throw EvaluationError("observation constraint count mismatch");
      X.row(static_cast<Eigen::Index>(i)) = o.x.transpose();
      // failed evaluations take the worst objective seen in the session
      yJ(static_cast<Eigen::Index>(i)) = o.failed ? worst : o.J;
      for (int k = 0; k < m; ++k) yc[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(i)) = o.c[static_cast<std::size_t>(k)];
    }
    const auto b = static_cast<std::uint64_t>(batch);
    const GaussianProcess gJ = GaussianProcess::fit(X, yJ, opt.gp, derive_seed(opt.seed, 2000 + 64 * b));
    std::vector<GaussianProcess> gc;
    for (int k = 0; k < m; ++k)
      gc.push_back(GaussianProcess::fit(X, yc[static_cast<std::size_t>(k)], opt.gp,
                                        derive_seed(opt.seed, 2000 + 64 * b + 1 + static_cast<std::uint64_t>(k))));
    const Eigen::MatrixXd cand =
        generate_candidates(state.center, state.length, r, derive_seed(opt.seed, 3000 + b), opt.perturb);
    const int q_eff = std::min(q, opt.budget - static_cast<int>(obs.size()));
    const std::vector<int> picks = select_batch(gJ, gc, cand, q_eff, derive_seed(opt.seed, 4000 + b));
    const std::size_t batch_start = obs.size();
    for (int p : picks) evaluate(cand.row(p).transpose(), batch, state.length, state.center_index);
    ++batch;
    update_trust_region(state, obs, session, batch_start);
    if (state.restart_needed()) {
      if (res.restarts >= opt.max_restarts) break;
      ++res.restarts;
      initial_design(res.restarts);
    }
  }

  res.n_constraints = m;
  res.best = select_center(obs);
  res.feasible = obs[static_cast<std::size_t>(res.best)].feasible;
  return res;
}

}  // namespace swimopt
