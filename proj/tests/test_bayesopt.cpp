#include "swimopt/lowdisc.hpp"
#include "swimopt/scbo.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace swimopt;

namespace {

Observation obs(double J, std::vector<double> c, int index) {
  Observation o;
  o.x = Eigen::VectorXd::Constant(1, 0.1 * index);
  o.J = J;
  o.c = std::move(c);
  o.feasible = std::all_of(o.c.begin(), o.c.end(), [](double v) { return v <= 0; });
  o.index = index;
  return o;
}

Evaluation toy(const Eigen::VectorXd& x) { return {x(0) + x(1), {0.5 - x.squaredNorm()}}; }

// Matern-5/2 prior draw on [0, 1] at n random inputs, lengthscale ell.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> prior_draw(int n, double ell, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = u(rng);
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = matern52(std::abs(X(i, 0) - X(j, 0)) / ell);
  K.diagonal().array() += 1e-8;
  Eigen::VectorXd z(n);
  for (auto& v : z) v = g(rng);
  return {X, Eigen::LLT<Eigen::MatrixXd>(K).matrixL() * z};
}

GaussianProcess toy_gp() {
  Eigen::MatrixXd X(4, 1);
  X << 0.1, 0.35, 0.6, 0.9;
  Eigen::VectorXd y(4);
  y << 0.3, -0.2, 0.1, 0.5;
  GPHyper h;
  h.lengthscale = Eigen::VectorXd::Constant(1, 0.3);
  h.noise = 1e-6;
  return GaussianProcess::condition(X, y, h);
}

}  // namespace

TEST_CASE("gaussian process fit") {
  SUBCASE("single point") {
    Eigen::MatrixXd X(1, 2);
    X << 0.3, 0.7;
    const GaussianProcess gp = GaussianProcess::fit(X, Eigen::VectorXd::Constant(1, 2.5));
    CHECK(gp.mean(X)(0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(gp.variance(X)(0) <= gp.noise_variance() + 1e-8);
  }
  SUBCASE("constant outputs") {
    ScrambledHalton h(3, 1);
    const Eigen::MatrixXd X = h.draw(12);
    const GaussianProcess gp = GaussianProcess::fit(X, Eigen::VectorXd::Constant(12, 3.0));
    const Eigen::VectorXd m = gp.mean(ScrambledHalton(3, 2).draw(50));
    CHECK(m.cwiseAbs().maxCoeff() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m.minCoeff() == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("interpolation and variance at training data") {
    const auto [X, y] = prior_draw(25, 0.3, 5);
    const GaussianProcess gp = GaussianProcess::fit(X, y);
    const double noise_sd = std::sqrt(gp.noise_variance());
    CHECK((gp.mean(X) - y).cwiseAbs().maxCoeff() <= 3 * noise_sd + 1e-6);
    const Eigen::VectorXd v = gp.variance(X);
    CHECK(v.minCoeff() >= 0);
    CHECK(v.maxCoeff() <= gp.noise_variance() + 1e-8);
    CHECK(gp.variance(ScrambledHalton(1, 9).draw(100)).minCoeff() >= 0);
  }
  SUBCASE("exact at training data in the zero-noise limit") {
    const auto [X, y] = prior_draw(15, 0.3, 6);
    GPHyper h;
    h.lengthscale = Eigen::VectorXd::Constant(1, 0.3);
    h.noise = 1e-10;
    GPOptions opt;
    opt.noise_floor = 1e-10;
    const GaussianProcess gp = GaussianProcess::condition(X, y, h, opt);
    CHECK((gp.mean(X) - y).cwiseAbs().maxCoeff() <= 1e-5 * y.cwiseAbs().maxCoeff());
  }
  SUBCASE("lengthscale recovery") {
    const double ell = 0.2;
    std::vector<double> ratio;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto [X, y] = prior_draw(40, ell, 1000 + s);
      ratio.push_back(GaussianProcess::fit(X, y, {}, s).hyper().lengthscale(0) / ell);
    }
    std::nth_element(ratio.begin(), ratio.begin() + 10, ratio.end());
    CHECK(ratio[10] >= 0.5);
    CHECK(ratio[10] <= 2.0);
  }
  SUBCASE("errors") {
    Eigen::MatrixXd X(2, 1);
    X << 0.1, 0.2;
    CHECK_THROWS_AS(GaussianProcess::fit(X, Eigen::Vector2d(1, std::nan(""))), FitError);
    CHECK_THROWS_AS(GaussianProcess::fit(X, Eigen::VectorXd::Zero(3)), FitError);
  }
}

TEST_CASE("posterior sampling") {
  const GaussianProcess gp = toy_gp();
  SUBCASE("draws at training points reproduce the data") {
    Eigen::MatrixXd X(4, 1);
    X << 0.1, 0.35, 0.6, 0.9;
    const Eigen::MatrixXd S = gp.sample(X, 20, 3);
    Eigen::VectorXd y(4);
    y << 0.3, -0.2, 0.1, 0.5;
    for (int k = 0; k < 20; ++k) CHECK((S.col(k) - y).cwiseAbs().maxCoeff() <= 1e-2);
  }
  SUBCASE("same seed, same draw") {
    const Eigen::MatrixXd Q = ScrambledHalton(1, 4).draw(30);
    CHECK(gp.sample(Q, 3, 77) == gp.sample(Q, 3, 77));
    CHECK(gp.sample(Q, 1, 77) != gp.sample(Q, 1, 78));
  }
  SUBCASE("distant points are uncorrelated") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 0.01;
    GPHyper h;
    h.lengthscale = Eigen::VectorXd::Constant(1, 0.01);
    const GaussianProcess g = GaussianProcess::condition(X, Eigen::Vector2d(0.0, 1.0), h);
    Eigen::MatrixXd Q(2, 1);
    Q << 0.4, 0.9;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    const int n = 1000;
    for (int s = 0; s < n; ++s) {
      const Eigen::MatrixXd d = g.sample(Q, 1, static_cast<std::uint64_t>(s));
      sa += d(0, 0), sb += d(1, 0), saa += d(0, 0) * d(0, 0), sbb += d(1, 0) * d(1, 0), sab += d(0, 0) * d(1, 0);
    }
    const double cov = sab / n - sa * sb / n / n;
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(corr) <= 0.1);
  }
  SUBCASE("too many points") {
    CHECK_THROWS_AS(gp.sample(Eigen::MatrixXd::Zero(5001, 1), 1, 0), SamplingError);
  }
}

TEST_CASE("center selection") {
  SUBCASE("feasible beats infeasible with lower objective") {
    CHECK(select_center({obs(-5, {0.1}, 0), obs(2, {-1}, 1)}) == 1);
  }
  SUBCASE("no feasible point: least total violation") {
    CHECK(select_center({obs(1, {0.3, 0.2}, 0), obs(4, {0.2, -0.5}, 1)}) == 1);
  }
  SUBCASE("ties go to the earliest index") {
    CHECK(select_center({obs(3, {-1}, 0), obs(1, {-1}, 1), obs(1, {-2}, 2)}) == 1);
    CHECK(select_center({obs(3, {0.5}, 0), obs(1, {0.5}, 1)}) == 0);
  }
  SUBCASE("failed evaluations count as violation 1") {
    Observation f = obs(std::nan(""), {1.0}, 0);
    f.failed = true;
    f.c = {0.0};
    CHECK(f.violation() == 1.0);
    CHECK(select_center({f, obs(0, {0.9}, 1)}) == 1);
  }
  SUBCASE("invariant under positive rescaling of the objective") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 200; ++t) {
      std::vector<Observation> a, b;
      const double scale = std::exp(3 * u(rng));
      for (int i = 0; i < 12; ++i) {
        a.push_back(obs(u(rng), {u(rng), u(rng)}, i));
        b.push_back(a.back());
        b.back().J *= scale;
      }
      CHECK(select_center(a) == select_center(b));
    }
  }
}

TEST_CASE("candidate generation") {
  CHECK(default_candidates(48) == 5000);
  CHECK(default_candidates(5) == 2000);
  CHECK(default_candidates(15) == 3000);

  const Eigen::VectorXd c = Eigen::VectorXd::Constant(48, 0.9);
  const double L = 0.4;
  const Eigen::MatrixXd X = generate_candidates(c, L, 5000, 9);
  REQUIRE(X.rows() == 5000);
  CHECK(X.minCoeff() >= 0.7 - 1e-15);
  CHECK(X.maxCoeff() <= 1.0);
  long changed = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto n = ((X.row(i) - c.transpose()).array() != 0).count();
    CHECK(n >= 1);
    changed += n;
  }
  // each coordinate moves with probability 20 / 48
  CHECK(static_cast<double>(changed) / (5000.0 * 48) == doctest::Approx(20.0 / 48).epsilon(0.03));
  CHECK(generate_candidates(c, L, 10, 9) == generate_candidates(c, L, 10, 9));
  CHECK_THROWS_AS(generate_candidates(c, L, 0, 9), ParameterError);
}

TEST_CASE("batch selection") {
  const GaussianProcess gp = toy_gp();
  SUBCASE("a single candidate is picked every time") {
    const std::vector<int> p = select_batch(gp, {}, Eigen::MatrixXd::Constant(1, 1, 0.5), 15, 1);
    CHECK(p == std::vector<int>(15, 0));
  }
  SUBCASE("pick frequencies match the probability of being the minimum") {
    Eigen::MatrixXd C(3, 1);
    C << 0.2, 0.45, 0.75;
    std::array<double, 3> freq{};
    const int n = 10000;
    for (int s = 0; s < n; ++s) freq[static_cast<std::size_t>(select_batch(gp, {}, C, 1, static_cast<std::uint64_t>(s))[0])] += 1.0 / n;
    // oracle: direct Monte Carlo from the posterior mean and covariance
    const Eigen::VectorXd m = gp.mean(C);
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(gp.covariance(C)).matrixL();
    std::mt19937_64 rng(123);
    std::normal_distribution<double> g;
    std::array<double, 3> p{};
    const int m_oracle = 400000;
    for (int s = 0; s < m_oracle; ++s) {
      const Eigen::Vector3d z(g(rng), g(rng), g(rng));
      const Eigen::VectorXd f = m + L * z;
      Eigen::Index k;
      f.minCoeff(&k);
      p[static_cast<std::size_t>(k)] += 1.0 / m_oracle;
    }
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(freq[k] - p[k]) <= 0.02);
  }
  SUBCASE("constraints decide when no sampled candidate is feasible") {
    Eigen::MatrixXd X(3, 1);
    X << 0.1, 0.5, 0.9;
    GPHyper h;
    h.lengthscale = Eigen::VectorXd::Constant(1, 0.2);
    h.noise = 1e-6;
    const GaussianProcess c = GaussianProcess::condition(X, Eigen::Vector3d(5, 1, 3), h);
    const GaussianProcess j = GaussianProcess::condition(X, Eigen::Vector3d(-1, 2, -3), h);
    CHECK(select_batch(j, {c}, X, 4, 2) == std::vector<int>(4, 1));
  }
  SUBCASE("a feasible candidate with the lowest objective wins") {
    Eigen::MatrixXd X(3, 1);
    X << 0.1, 0.5, 0.9;
    GPHyper h;
    h.lengthscale = Eigen::VectorXd::Constant(1, 0.2);
    h.noise = 1e-6;
    const GaussianProcess c = GaussianProcess::condition(X, Eigen::Vector3d(-1, 1, -1), h);
    const GaussianProcess j = GaussianProcess::condition(X, Eigen::Vector3d(0, -5, -2), h);
    CHECK(select_batch(j, {c}, X, 4, 2) == std::vector<int>(4, 2));
  }
}

TEST_CASE("trust-region update") {
  auto state_with = [](double L, int tau_s, int tau_f) {
    TrustRegionState s;
    s.length = L;
    s.tau_success = tau_s;
    s.tau_failure = tau_f;
    s.center_index = 0;
    return s;
  };
  std::vector<Observation> o{obs(1.0, {-1}, 0)};

  SUBCASE("success streak doubles up to the maximum") {
    TrustRegionState s = state_with(0.8, 1, 2);
    o.push_back(obs(0.5, {-1}, 1));
    CHECK(update_trust_region(s, o, 0, 1));
    CHECK(s.length == 1.6);
    CHECK(s.center_index == 1);
    CHECK(s.successes == 0);
    o.push_back(obs(0.2, {-1}, 2));
    update_trust_region(s, o, 0, 2);
    CHECK(s.length == 1.6);
  }
  SUBCASE("failure streak halves") {
    TrustRegionState s = state_with(0.8, 3, 2);
    o.push_back(obs(2.0, {-1}, 1));
    CHECK_FALSE(update_trust_region(s, o, 0, 1));
    CHECK(s.length == 0.8);
    CHECK(s.failures == 1);
    o.push_back(obs(0.7, {0.1}, 2));  // lower J but infeasible
    update_trust_region(s, o, 0, 2);
    CHECK(s.length == 0.4);
    CHECK(s.failures == 0);
    CHECK(s.center_index == 0);
  }
  SUBCASE("halving below the minimum requests a restart") {
    TrustRegionState s = state_with(std::pow(0.5, 7) * 1.5, 3, 1);
    CHECK_FALSE(s.restart_needed());
    o.push_back(obs(2.0, {-1}, 1));
    update_trust_region(s, o, 0, 1);
    CHECK(s.restart_needed());
  }
  SUBCASE("infeasible center: smaller violation is a success") {
    std::vector<Observation> v{obs(1.0, {0.5}, 0), obs(9.0, {0.2}, 1)};
    TrustRegionState s = state_with(0.8, 3, 2);
    CHECK(update_trust_region(s, v, 0, 1));
    CHECK(s.center_index == 1);
  }
  SUBCASE("length stays in {L/2, L, 2L capped}") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    TrustRegionState s = state_with(0.8, 2, 2);
    std::vector<Observation> h{obs(0, {-1}, 0)};
    for (int t = 1; t < 300 && !s.restart_needed(); ++t) {
      const double before = s.length;
      h.push_back(obs(u(rng), {u(rng)}, t));
      update_trust_region(s, h, 0, h.size() - 1);
      const bool ok = s.length == before || s.length == before / 2 || s.length == std::min(2 * before, s.length_max);
      CHECK(ok);
    }
  }
}

TEST_CASE("scbo loop") {
  ScboOptions opt;
  opt.batch = 5;
  SUBCASE("budget equal to the initial design") {
    opt.budget = 6;
    const ScboResult r = scbo_run(toy, 2, opt);
    REQUIRE(r.history.size() == 6);
    for (const auto& o : r.history) CHECK(o.center == -1);
    CHECK(r.best == select_center(r.history));
    CHECK(r.n_constraints == 1);
  }
  SUBCASE("budget below the initial design") {
    opt.budget = 5;
    CHECK_THROWS_AS(scbo_run(toy, 2, opt), ParameterError);
  }
  SUBCASE("fixed seed gives an identical history") {
    opt.budget = 30;
    opt.seed = 5;
    const ScboResult a = scbo_run(toy, 2, opt), b = scbo_run(toy, 2, opt);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].x == b.history[i].x);
      CHECK(a.history[i].J == b.history[i].J);
    }
    opt.seed = 6;
    CHECK(scbo_run(toy, 2, opt).history.back().x != a.history.back().x);
  }
  SUBCASE("evaluator failures are recorded, not fatal") {
    opt.budget = 20;
    int calls = 0;
    const ScboResult r = scbo_run(
        [&](const Eigen::VectorXd& x) {
          if (++calls % 3 == 0) throw GeometryError("broken");
          return toy(x);
        },
        2, opt);
    CHECK(r.history.size() == 20);
    int failed = 0;
    for (const auto& o : r.history)
      if (o.failed) {
        ++failed;
        CHECK(o.violation() == 1.0);
        CHECK_FALSE(o.feasible);
        CHECK(o.error == "broken");
      }
    CHECK(failed == 6);
  }
  SUBCASE("warm start is evaluated first") {
    opt.budget = 10;
    opt.warm_start = {Eigen::Vector2d(0.8, 0.8)};
    const ScboResult r = scbo_run(toy, 2, opt);
    CHECK(r.history.front().x == Eigen::Vector2d(0.8, 0.8));
  }
  SUBCASE("constrained toy problem and a non-increasing best trace") {
    opt.budget = 100;
    opt.batch = 10;
    opt.seed = 1;
    const ScboResult r = scbo_run(toy, 2, opt);
    REQUIRE(r.feasible);
    const std::vector<double> t = best_feasible_trace(r.history);
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!std::isnan(t[i - 1])) CHECK(t[i] <= t[i - 1]);
    // the feasible minimum is 1 / sqrt(2) at (0.7071, 0) and (0, 0.7071)
    CHECK(r.history[static_cast<std::size_t>(r.best)].J == doctest::Approx(std::sqrt(0.5)).epsilon(0.05));
    for (const auto& o : r.history) CHECK(o.feasible == (o.c[0] <= 0));
  }
}
