#pragma once

#include "swimopt/gp.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace swimopt {

struct Observation {
  Eigen::VectorXd x;
  double J = 0;
  std::vector<double> c;
  bool feasible = false;
  bool failed = false;  // evaluator threw; J is NaN and every constraint is 1
  std::string error;    // what() of the exception when failed
  int index = 0;
  int batch = 0;
  double length = 0;    // trust-region length when the point was proposed
  int center = -1;      // index of the center at proposal time (-1 for initial designs)
  double elapsed = 0;   // seconds since the start of the run

  double violation() const;
};

/// Index of the feasible observation with minimal J, or of minimal total
/// violation if none is feasible; earliest index wins ties.
int select_center(const std::vector<Observation>& obs);
int select_center(const std::vector<Observation>& obs, std::size_t first);

/// True if `candidate` improves on `center`: smaller violation when the center
/// is infeasible, feasible with lower J when it is feasible.
bool better_than(const Observation& candidate, const Observation& center);

struct TrustRegionState {
  Eigen::VectorXd center;
  int center_index = -1;
  double length = 0.8;
  int successes = 0, failures = 0;
  int tau_success = 3, tau_failure = 2;
  double length_min = 0.0078125;  // 0.5^7
  double length_max = 1.6;
  double length_init = 0.8;

  bool restart_needed() const { return length < length_min; }
};

/// Number of candidates min(5000, max(2000, 200 d)).
int default_candidates(int d);

/// `r` candidates in the box [center - L/2, center + L/2] clipped to [0, 1]^d.
/// Each candidate replaces only a random subset of coordinates of the center
/// (each with probability `perturb`, at least one) by a scrambled Halton point.
Eigen::MatrixXd generate_candidates(const Eigen::VectorXd& center, double length, int r, std::uint64_t seed,
                                    double perturb = -1);

/// Thompson selection of q candidates (rows of `candidates`) from joint
/// posterior draws of the objective and every constraint model.
std::vector<int> select_batch(const GaussianProcess& objective, const std::vector<GaussianProcess>& constraints,
                              const Eigen::MatrixXd& candidates, int q, std::uint64_t seed);

/// Counter and length update after a batch; returns whether the batch succeeded.
bool update_trust_region(TrustRegionState& state, const std::vector<Observation>& obs, std::size_t session_start,
                         std::size_t batch_start);

struct Evaluation {
  double J = 0;
  std::vector<double> c;
};
using Evaluator = std::function<Evaluation(const Eigen::VectorXd&)>;

struct ScboOptions {
  int budget = 150;
  int batch = 15;
  int n_init = -1;          // -1: 3 d
  int candidates = -1;      // -1: min(5000, max(2000, 200 d))
  double perturb = -1;      // -1: min(1, 20 / d)
  int tau_success = 3;
  int tau_failure = -1;     // -1: max(ceil(d / q), 2)
  double length_init = 0.8, length_min = 0.0078125, length_max = 1.6;
  int max_restarts = 3;
  std::uint64_t seed = 0;
  GPOptions gp;
  /// Points evaluated before the scrambled initial design (they count toward n_init).
  std::vector<Eigen::VectorXd> warm_start;
  /// Called after every evaluation.
  std::function<void(const Observation&)> on_evaluation;
};

struct ScboResult {
  std::vector<Observation> history;
  int best = -1;         // best feasible, or least violating if none is feasible
  bool feasible = false;
  int restarts = 0;
  int n_constraints = 0;
};

ScboResult scbo_run(const Evaluator& f, int d, const ScboOptions& opt);

/// Best feasible J after each evaluation (NaN before the first feasible point).
std::vector<double> best_feasible_trace(const std::vector<Observation>& history);

}  // namespace swimopt
