#include "swimopt/constraints.hpp"

#include <random>

namespace swimopt {

const char* slot_name(FlagellumSlot s) {
  switch (s) {
    case FlagellumSlot::Wavelength: return "wavelength";
    case FlagellumSlot::Amplitude: return "amplitude";
    case FlagellumSlot::Alpha: return "alpha";
    case FlagellumSlot::Beta: return "beta";
    case FlagellumSlot::Gamma: return "gamma";
    case FlagellumSlot::Delta: return "delta";
  }
  return "?";
}

std::vector<FlagellumSlot> ParameterEncoding::all_slots() {
  return {FlagellumSlot::Wavelength, FlagellumSlot::Amplitude, FlagellumSlot::Alpha,
          FlagellumSlot::Beta,       FlagellumSlot::Gamma,     FlagellumSlot::Delta};
}

namespace {

std::pair<double, double> slot_bounds(FlagellumSlot s) {
  switch (s) {
    case FlagellumSlot::Wavelength: return {0.3, 4.0};
    case FlagellumSlot::Amplitude: return {0.1, 1.0};
    default: return {-kPi / 2, kPi / 2};
  }
}

double& slot_ref(FlagellumParams& p, FlagellumSlot s) {
  switch (s) {
    case FlagellumSlot::Wavelength: return p.wavelength;
    case FlagellumSlot::Amplitude: return p.amplitude;
    case FlagellumSlot::Alpha: return p.alpha;
    case FlagellumSlot::Beta: return p.beta;
    case FlagellumSlot::Gamma: return p.gamma;
    case FlagellumSlot::Delta: return p.delta;
  }
  throw EncodingError("unknown flagellum slot");
}

}  // namespace

ParameterEncoding::ParameterEncoding(SwimmerSpec base, std::vector<FlagellumSlot> slots, bool head)
    : base_(std::move(base)), slots_(std::move(slots)), head_(head) {
  base_.validate();
  const int nh = head_ ? FFDLattice::kFreeDim : 0;
  const int d = nh + static_cast<int>(slots_.size());
  if (d == 0) throw EncodingError("empty parameter encoding");
  lower_.resize(d);
  upper_.resize(d);
  const double r = FFDLattice::bound();
  static const char* axis = "xyz";
  for (int n = 0; n < nh; ++n) {
    lower_(n) = -r;
    upper_(n) = r;
    labels_.push_back("head" + std::to_string(n / 3) + "_" + axis[n % 3]);
  }
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const auto [lo, hi] = slot_bounds(slots_[s]);
    lower_(nh + static_cast<int>(s)) = lo;
    upper_(nh + static_cast<int>(s)) = hi;
    labels_.emplace_back(slot_name(slots_[s]));
  }
}

Eigen::VectorXd ParameterEncoding::to_physical(const Eigen::VectorXd& x) const {
  if (x.size() != dim())
    throw EncodingError("expected " + std::to_string(dim()) + " coordinates, got " + std::to_string(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x(i) >= 0 && x(i) <= 1)) throw EncodingError("coordinate " + std::to_string(i) + " outside [0, 1]");
  return lower_ + x.cwiseProduct(upper_ - lower_);
}

Eigen::VectorXd ParameterEncoding::to_unit(const Eigen::VectorXd& v) const {
  if (v.size() != dim())
    throw EncodingError("expected " + std::to_string(dim()) + " values, got " + std::to_string(v.size()));
  return (v - lower_).cwiseQuotient(upper_ - lower_);
}

SwimmerSpec ParameterEncoding::decode(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd v = to_physical(x);
  SwimmerSpec s = base_;
  const int nh = head_ ? FFDLattice::kFreeDim : 0;
  if (head_) s.head_free = v.head(nh).cwiseMax(lower_.head(nh)).cwiseMin(upper_.head(nh));
  FlagellumParams& f = s.flagella.front();
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    slot_ref(f, slots_[k]) = v(nh + static_cast<int>(k));
    if (slots_[k] == FlagellumSlot::Wavelength) f.shrink = FlagellumParams::shrink_for(f.wavelength);
  }
  return s;
}

Eigen::VectorXd ParameterEncoding::encode(const SwimmerSpec& spec) const {
  Eigen::VectorXd v(dim());
  const int nh = head_ ? FFDLattice::kFreeDim : 0;
  if (head_) v.head(nh) = spec.head_free.size() ? spec.head_free : Eigen::VectorXd::Zero(nh);
  FlagellumParams f = spec.flagella.front();
  for (std::size_t k = 0; k < slots_.size(); ++k) v(nh + static_cast<int>(k)) = slot_ref(f, slots_[k]);
  Eigen::VectorXd x = to_unit(v);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < -1e-12 || x(i) > 1 + 1e-12) throw EncodingError(labels_[static_cast<std::size_t>(i)] + " lies outside the design box");
    x(i) = std::clamp(x(i), 0.0, 1.0);
  }
  return x;
}

const std::array<const char*, ConstraintVector::kSize>& ConstraintVector::labels() {
  static const std::array<const char*, kSize> l{"volume", "drift_u2", "drift_u3", "collision"};
  return l;
}

bool ConstraintVector::feasible() const {
  for (double v : values)
    if (!(v <= 0)) return false;
  return true;
}

double ConstraintVector::violation() const {
  double s = 0;
  for (double v : values) s += std::isnan(v) ? 1.0 : std::max(v, 0.0);
  return s;
}

double volume_constraint(double head_volume, double reference_volume, double tolerance) {
  return std::abs(head_volume - reference_volume) - tolerance;
}

std::array<double, 2> trajectory_constraint(const StrokeAverages& avg, double tolerance) {
  return {std::abs(avg.U(1)) - tolerance, std::abs(avg.U(2)) - tolerance};
}

double collision_fraction(const std::vector<ConvexHull>& hulls, long long samples, std::uint64_t seed) {
  if (hulls.size() < 2) throw ParameterError("collision check needs at least two bodies");
  if (samples < 1) throw ParameterError("collision check needs a positive sample count");
  Vec3 lo = hulls.front().lo, hi = hulls.front().hi;
  for (const auto& h : hulls) {
    lo = lo.cwiseMin(h.lo);
    hi = hi.cwiseMax(h.hi);
  }
  const Vec3 ext = hi - lo;
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  long long inside = 0;
  for (long long k = 0; k < samples; ++k) {
    const double a = unit(), b = unit(), c = unit();
    const Vec3 p = lo + Vec3(a * ext(0), b * ext(1), c * ext(2));
    int count = 0;
    for (const auto& h : hulls)
      if (h.contains(p) && ++count == 2) break;
    if (count >= 2) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(samples);
}

double collision_constraint(const SwimmerSpec& spec, const MeshResolution& res, const ConstraintOptions& opt) {
  if (opt.sweep_phases < 1) throw ParameterError("collision sweep needs at least one phase");
  std::vector<Vec3> head;
  std::vector<std::vector<Vec3>> flagella(static_cast<std::size_t>(spec.num_flagella()));
  for (int t = 0; t < opt.sweep_phases; ++t) {
    const SwimmerGeometry g = build_swimmer(spec, res, 2 * kPi * t / opt.sweep_phases);
    if (t == 0)
      for (Eigen::Index v = 0; v < g.head.vertices.rows(); ++v) head.emplace_back(g.head.vertices.row(v).transpose());
    for (std::size_t i = 0; i < g.flagella.size(); ++i)
      for (Eigen::Index v = 0; v < g.flagella[i].vertices.rows(); ++v)
        flagella[i].emplace_back(g.flagella[i].vertices.row(v).transpose());
  }
  std::vector<ConvexHull> hulls{convex_hull(head)};
  for (const auto& f : flagella) hulls.push_back(convex_hull(f));
  return collision_fraction(hulls, opt.mc_samples, opt.seed);
}

ConstraintVector evaluate_all(const SwimmerSpec& spec, const StrokeAverages& avg, const MeshResolution& res,
                              const ConstraintOptions& opt) {
  ConstraintVector c;
  c.values[0] = volume_constraint(avg.head_volume, avg.reference_head_volume, opt.volume_tolerance);
  const auto tr = trajectory_constraint(avg, opt.trajectory_tolerance);
  c.values[1] = tr[0];
  c.values[2] = tr[1];
  try {
    c.values[3] = collision_constraint(spec, res, opt);
  } catch (const GeometryError&) {
    c.values[3] = 1.0;
  }
  return c;
}

}  // namespace swimopt
