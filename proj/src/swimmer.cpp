#include "swimopt/swimmer.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

namespace swimopt {

MeshResolution MeshResolution::level(int n) {
  switch (n) {
    case 0: return {1, 40, 6};
    case 1: return {1, 60, 8};
    case 2: return {2, 90, 10};
    case 3: return {3, 120, 12};
    case 4: return {4, 160, 16};
    default: throw ParameterError("mesh level must be in 0.." + std::to_string(kMaxLevel));
  }
}

void SwimmerSpec::validate() const {
  if (flagella.empty() || flagella.size() > 2) throw ParameterError("swimmer needs one or two flagella");
  if (mirror && flagella.size() != 1)
    throw ParameterError("mirror biflagellate stores exactly one flagellum; the second is derived");
  if (!(head.radii.minCoeff() > 0)) throw ParameterError("head radii must be positive");
  if (head_free.size() != 0 && head_free.size() != FFDLattice::kFreeDim)
    throw ParameterError("head lattice needs " + std::to_string(FFDLattice::kFreeDim) + " free values");
  if (!std::isfinite(omega)) throw ParameterError("omega must be finite");
  for (const auto& f : flagella) f.validate();
}

std::vector<SurfaceMesh> SwimmerGeometry::bodies() const {
  std::vector<SurfaceMesh> out{head};
  out.insert(out.end(), flagella.begin(), flagella.end());
  return out;
}

SurfaceMesh reference_head(const SwimmerSpec& spec, const MeshResolution& res) {
  return head_mesh(spec.head, res.head_refine);
}

FFDLattice head_lattice(const SwimmerSpec& spec, const MeshResolution& res) {
  FFDLattice lat = FFDLattice::around(reference_head(spec, res));
  if (spec.head_free.size() > 0) lat.displacement = expand_symmetry(spec.head_free);
  return lat;
}

SwimmerGeometry build_swimmer(const SwimmerSpec& spec, const MeshResolution& res, double stroke_phase) {
  spec.validate();
  SwimmerGeometry g;
  const SurfaceMesh ref = reference_head(spec, res);
  g.reference_head_volume = mesh_volume(ref);
  if (spec.deformed()) {
    FFDLattice lat = FFDLattice::around(ref);
    lat.displacement = expand_symmetry(spec.head_free);
    g.head = ffd_deform(lat, ref);
  } else {
    g.head = ref;
  }
  check_mesh(g.head);
  g.head_volume = mesh_volume(g.head);
  g.head_center = mesh_centroid(g.head);

  for (std::size_t i = 0; i < spec.flagella.size(); ++i) {
    FlagellumParams p = spec.flagella[i];
    p.phase += stroke_phase;
    const FlagellumPlacement place = attach_flagellum(g.head, g.head_center, p);
    SurfaceMesh tube = tube_mesh(p, res.n_axial, res.n_circ);
    tube = transformed(tube, place.transform.rotation, place.transform.translation);
    tube.tag = {BodyKind::Flagellum, static_cast<int>(i)};
    g.flagella.push_back(std::move(tube));
    g.placements.push_back(place);
  }
  if (spec.mirror) {
    const RigidTransform m = mirror_e1();
    const FlagellumPlacement& first = g.placements.front();
    FlagellumPlacement second;
    second.transform = first.transform.then(m);
    second.junction = m.apply(first.junction);
    second.normal = m.rotation * first.normal;
    SurfaceMesh tube = transformed(g.flagella.front(), m.rotation, m.translation);
    tube.tag = {BodyKind::Flagellum, 1};
    g.flagella.push_back(std::move(tube));
    g.placements.push_back(second);
  }
  for (const auto& f : g.flagella) check_mesh(f);
  return g;
}

namespace presets {

SwimmerSpec reference() { return SwimmerSpec{}; }

SwimmerSpec slender_mono(double length, double n_waves) {
  if (!(length > 0) || !(n_waves > 0)) throw ParameterError("slender_mono: length and n_waves must be positive");
  // with R^t = lambda/2pi and k_E = 2pi/lambda the centerline scales linearly
  // with lambda, so the arc length of n_waves wavelengths is lambda * arc(1)
  FlagellumParams unit;
  unit.wavelength = 1;
  unit.amplitude = 1 / (2 * kPi);
  unit.shrink = 2 * kPi;
  const double lambda = length / helix_arc_length(unit, n_waves);
  SwimmerSpec s;
  FlagellumParams& f = s.flagella.front();
  f.wavelength = lambda;
  f.amplitude = lambda / (2 * kPi);
  f.shrink = 2 * kPi / lambda;
  f.radius = 0.02;
  f.gap = 0.04;
  f.length = length;
  return s;
}

SwimmerSpec ellipsoid_bi(double alpha, bool biflagellate) {
  SwimmerSpec s;
  s.head = HeadShape::ellipsoid(0.874, 0.874, 1.5 * 0.874);
  s.flagella.front().alpha = alpha;
  s.mirror = biflagellate;
  return s;
}

SwimmerSpec ellipsoid_mono() {
  SwimmerSpec s;
  const double r1 = std::pow(0.7 * 0.3, -1.0 / 3.0);
  s.head = HeadShape::ellipsoid(r1, 0.3 * r1, 0.7 * r1);
  FlagellumParams& f = s.flagella.front();
  f.length = 10;
  f.radius = 0.05;
  f.gap = 2 * f.radius;
  f.wavelength = 4.7863;
  f.amplitude = f.wavelength / (2 * kPi);
  f.shrink = 2 * kPi / f.wavelength;
  return s;
}

std::vector<std::string> names() { return {"reference", "slender-mono", "ellipsoid-bi", "ellipsoid-mono"}; }

SwimmerSpec by_name(const std::string& name) {
  if (name == "reference" || name == "S0") return reference();
  if (name == "slender-mono") return slender_mono(5, 2);
  if (name == "ellipsoid-bi") return ellipsoid_bi(0.4 * kPi);
  if (name == "ellipsoid-mono") return ellipsoid_mono();
  throw ConfigError("unknown swimmer preset '" + name + "'");
}

}  // namespace presets

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

FlagellumParams flagellum_from(const Config& c, FlagellumParams p) {
  p.wavelength = c.get_double("wavelength", p.wavelength);
  p.amplitude = c.get_double("amplitude", p.amplitude);
  p.radius = c.get_double("radius", p.radius);
  p.length = c.get_double("length", p.length);
  if (c.has("shrink")) {
    p.shrink = c.get_double("shrink", p.shrink);
  } else if (c.has("wavelength")) {
    p.shrink = FlagellumParams::shrink_for(p.wavelength);
  }
  p.alpha = c.get_double("alpha", p.alpha);
  p.beta = c.get_double("beta", p.beta);
  p.gamma = c.get_double("gamma", p.gamma);
  p.delta = c.get_double("delta", p.delta);
  p.gap = c.get_double("gap", p.gap);
  p.phase = c.get_double("phase", p.phase);
  return p;
}

}  // namespace

SwimmerSpec spec_from_config(const Config& cfg) {
  SwimmerSpec s = cfg.has("preset") ? presets::by_name(cfg.get_string("preset", "")) : presets::reference();
  if (const Config* h = cfg.block("head")) {
    const std::string shape = h->get_string("shape", s.head.kind == HeadShape::Kind::Sphere ? "sphere" : "ellipsoid");
    if (shape == "sphere") {
      s.head = HeadShape::sphere(h->get_double("radius", s.head.radii.x()));
    } else if (shape == "ellipsoid") {
      const auto r = h->get_doubles("radii");
      if (r.size() == 3) {
        s.head = HeadShape::ellipsoid(r[0], r[1], r[2]);
      } else if (!r.empty()) {
        throw ConfigError("head.radii needs three values");
      } else {
        s.head.kind = HeadShape::Kind::Ellipsoid;
      }
    } else {
      throw ConfigError("head.shape must be sphere or ellipsoid, got '" + shape + "'");
    }
    if (const Config* lat = h->block("lattice")) {
      const auto v = lat->get_doubles("free");
      if (!v.empty()) {
        if (v.size() != static_cast<std::size_t>(FFDLattice::kFreeDim))
          throw ConfigError("head.lattice.free needs " + std::to_string(FFDLattice::kFreeDim) + " values");
        s.head_free = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
    }
  }
  const auto fl = cfg.blocks("flagellum");
  if (!fl.empty()) {
    std::vector<FlagellumParams> out;
    for (std::size_t i = 0; i < fl.size(); ++i)
      out.push_back(flagellum_from(*fl[i], i < s.flagella.size() ? s.flagella[i] : s.flagella.front()));
    s.flagella = out;
  }
  s.mirror = cfg.get_bool("mirror", s.mirror);
  s.omega = cfg.get_double("omega", s.omega);
  s.validate();
  return s;
}

Config spec_to_config(const SwimmerSpec& s) {
  Config c;
  Config& h = c.add_block("head");
  if (s.head.kind == HeadShape::Kind::Sphere) {
    h.set("shape", "sphere");
    h.set("radius", num(s.head.radii.x()));
  } else {
    h.set("shape", "ellipsoid");
    h.set("radii", num(s.head.radii.x()) + " " + num(s.head.radii.y()) + " " + num(s.head.radii.z()));
  }
  if (s.head_free.size() > 0) {
    std::string v;
    for (Eigen::Index i = 0; i < s.head_free.size(); ++i) v += (i ? " " : "") + num(s.head_free(i));
    h.add_block("lattice").set("free", v);
  }
  for (const auto& p : s.flagella) {
    Config& f = c.add_block("flagellum");
    f.set("wavelength", num(p.wavelength));
    f.set("amplitude", num(p.amplitude));
    f.set("radius", num(p.radius));
    f.set("length", num(p.length));
    f.set("shrink", num(p.shrink));
    f.set("alpha", num(p.alpha));
    f.set("beta", num(p.beta));
    f.set("gamma", num(p.gamma));
    f.set("delta", num(p.delta));
    f.set("gap", num(p.gap));
    f.set("phase", num(p.phase));
  }
  c.set("mirror", s.mirror ? "true" : "false");
  c.set("omega", num(s.omega));
  return c;
}

void write_spec(std::ostream& os, const SwimmerSpec& spec) { os << spec_to_config(spec).dump(); }

}  // namespace swimopt
