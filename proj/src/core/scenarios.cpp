// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/scenarios.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "core/elastic_model.hpp"
#include "core/error.hpp"
#include "core/frames.hpp"
#include "core/mesh_io.hpp"

namespace dernet {

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::vibration: return "vibration";
    case ScenarioKind::contact_drop: return "contact-drop";
    case ScenarioKind::fold: return "fold";
    case ScenarioKind::shoot: return "shoot";
    case ScenarioKind::close: return "close";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view text) {
  for (auto k : {ScenarioKind::vibration, ScenarioKind::contact_drop, ScenarioKind::fold,
                 ScenarioKind::shoot, ScenarioKind::close}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidConfigError(fmt::format("unknown scenario '{}'", text));
}

ScenarioConfig ScenarioConfig::defaults(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  switch (kind) {
    case ScenarioKind::vibration:
      c.gravity = Vec3(0, 0, -1000.0);
      c.duration = 1.0;
      break;
    case ScenarioKind::contact_drop:
      c.gravity = Vec3(0, 0, -10.0);
      c.duration = 8.0;
      break;
    case ScenarioKind::fold:
      c.gravity = Vec3(0, 0, -10.0);
      c.duration = 10.5;
      break;
    case ScenarioKind::shoot:
      c.gravity = Vec3::Zero();
      c.duration = 1.0;
      break;
    case ScenarioKind::close:
      c.gravity = Vec3::Zero();
      c.duration = 2.5;
      break;
  }
  return c;
}

MaterialParams ScenarioConfig::material() const {
  return MaterialParams::make(young_modulus, rod_radius, density);
}

IntegratorConfig ScenarioConfig::integrator() const {
  IntegratorConfig c;
  c.time_step = time_step;
  c.scheme = scheme;
  c.beta = beta;
  c.newton_tolerance = tolerance;
  c.damping = damping;
  c.gravity = gravity;
  return c;
}

void ScenarioConfig::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidConfigError(fmt::format("{} must be positive (got {})", key, v));
    }
  };
  positive(young_modulus, "young_modulus");
  positive(rod_radius, "rod_radius");
  positive(density, "density");
  positive(duration, "duration");
  positive(time_step, "h");
  positive(tolerance, "tolerance");
  positive(metric_interval, "metric_interval");
  if (mesh_path.empty()) {
    positive(side_length, "side_length");
    positive(grid_interval, "grid_interval");
    if (subdivisions < 0) throw InvalidConfigError("subdivisions must be >= 0");
  }
  if (!(damping >= 0.0)) throw InvalidConfigError("mu must be >= 0");
  if (!gravity.allFinite()) throw InvalidConfigError("gravity must be finite");
  if (max_contact_passes < 1) throw InvalidConfigError("max_contact_passes must be >= 1");
  switch (kind) {
    case ScenarioKind::vibration:
      break;
    case ScenarioKind::contact_drop:
      if (!std::isfinite(start_height)) throw InvalidConfigError("start_height must be finite");
      break;
    case ScenarioKind::fold:
      positive(fold_speed, "fold_speed");
      positive(target_scale, "target_scale");
      if (target_scale > 1.0) throw InvalidConfigError("target_scale must be <= 1");
      break;
    case ScenarioKind::close:
      positive(sphere_radius, "sphere_radius");
      positive(standoff, "standoff");
      positive(close_speed, "close_speed");
      if (!destination.allFinite()) throw InvalidConfigError("destination must be finite");
      if (!(trigger_time >= 0.0)) throw InvalidConfigError("trigger_time must be >= 0");
      [[fallthrough]];
    case ScenarioKind::shoot:
      positive(fold_speed, "fold_speed");
      positive(target_scale, "target_scale");
      positive(corner_mass, "corner_mass");
      positive(shoot_speed, "shoot_speed");
      if (!(shoot_angle > 0.0 && shoot_angle < 90.0)) {
        throw InvalidConfigError(fmt::format("shoot_angle must lie in (0, 90) degrees (got {})", shoot_angle));
      }
      break;
  }
}

// ---- Prescribed motion ----------------------------------------------------

Vec3 PrescribedMotion::position(double t) const {
  const Vec3 d = target - start;
  const double dist = d.norm();
  if (t <= start_time || dist == 0.0) return t <= start_time ? start : target;
  const double travelled = speed * (t - start_time);
  if (travelled >= dist) return target;
  return start + (travelled / dist) * d;
}

double PrescribedMotion::arrival_time() const { return start_time + (target - start).norm() / speed; }

// ---- Metrics --------------------------------------------------------------

StressField stress_field(const NetMesh& mesh, const MaterialParams& params, const Eigen::VectorXd& q,
                         CurvatureModel curvature) {
  StressField s;
  const auto x = [&](int i) -> Vec3 { return q.segment<3>(3 * i); };
  s.stretch.reserve(mesh.stretch.size());
  std::map<std::pair<int, int>, int> edge_id;
  for (std::size_t e = 0; e < mesh.stretch.size(); ++e) {
    const auto& st = mesh.stretch[e];
    const EdgeGeometry g = EdgeGeometry::between(x(st.i), x(st.j));
    s.stretch.push_back(params.young_modulus * stretch_strain(g, st.rest_length));
    edge_id[{std::min(st.i, st.j), std::max(st.i, st.j)}] = static_cast<int>(e);
  }
  std::vector<double> bend_sum(mesh.stretch.size(), 0.0);
  std::vector<int> bend_count(mesh.stretch.size(), 0);
  s.bend.reserve(mesh.bend.size());
  for (const auto& b : mesh.bend) {
    double sigma = 0.0;
    if (b.active) {
      const EdgeGeometry e1 = EdgeGeometry::between(x(b.i), x(b.j));
      const EdgeGeometry e2 = EdgeGeometry::between(x(b.j), x(b.k));
      const double kappa = bend_curvature(e1.tangent, e2.tangent, curvature);
      sigma = params.young_modulus * kappa / b.voronoi_length * params.rod_radius;
    }
    s.bend.push_back(sigma);
    for (auto [a, c] : {std::pair{b.i, b.j}, std::pair{b.j, b.k}}) {
      const auto it = edge_id.find({std::min(a, c), std::max(a, c)});
      if (it == edge_id.end()) continue;
      bend_sum[it->second] += sigma;
      ++bend_count[it->second];
    }
  }
  s.edge_total.resize(mesh.stretch.size());
  for (std::size_t e = 0; e < mesh.stretch.size(); ++e) {
    s.edge_total[e] = s.stretch[e] + (bend_count[e] > 0 ? bend_sum[e] / bend_count[e] : 0.0);
  }
  return s;
}

double spread_area(const Eigen::VectorXd& q, const std::vector<int>& corners, const Vec3& axis) {
  if (corners.size() < 3) return 0.0;
  const Vec3 n = axis.normalized();
  // Orthonormal in-plane basis.
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (helper - helper.dot(n) * n).normalized();
  const Vec3 w = n.cross(u);
  double twice = 0.0;
  for (std::size_t a = 0; a < corners.size(); ++a) {
    const Vec3 p = q.segment<3>(3 * corners[a]);
    const Vec3 r = q.segment<3>(3 * corners[(a + 1) % corners.size()]);
    twice += p.dot(u) * r.dot(w) - r.dot(u) * p.dot(w);
  }
  return 0.5 * std::abs(twice);
}

NetMesh scenario_mesh(const ScenarioConfig& config) {
  const MaterialParams p = config.material();
  if (!config.mesh_path.empty()) return load_mesh(config.mesh_path, p);
  return generate_hexagonal_web(config.side_length, config.grid_interval, config.subdivisions,
                                WebLayout::rings_and_radials, p);
}

// ---- Scenario -------------------------------------------------------------

namespace {

void require_corners(const NetMesh& mesh, ScenarioKind kind) {
  if (mesh.corner_nodes.size() != 6) {
    throw InvalidConfigError(fmt::format("scenario '{}' needs a mesh with 6 corner nodes", to_string(kind)));
  }
}

}  // namespace

Eigen::VectorXd fold_positions(const ScenarioConfig& config, const NetMesh& mesh) {
  ScenarioConfig c = ScenarioConfig::defaults(ScenarioKind::fold);
  c.mesh_path = config.mesh_path;
  c.young_modulus = config.young_modulus;
  c.rod_radius = config.rod_radius;
  c.density = config.density;
  c.time_step = config.time_step;
  c.tolerance = config.tolerance;
  c.curvature = config.curvature;
  c.fold_speed = config.fold_speed;
  c.target_scale = config.target_scale;
  c.fold_settle = config.fold_settle;
  c.damping = config.kind == ScenarioKind::fold ? config.damping : 0.1;
  Scenario fold(c, mesh);
  double last = 0.0;
  for (const auto& m : fold.motions()) last = std::max(last, m.arrival_time());
  c.duration = last + c.fold_settle;
  spdlog::info("folding {} junctions, {:.3g} s", fold.motions().size(), c.duration);
  const int steps = static_cast<int>(std::lround(c.duration / c.time_step));
  for (int k = 0; k < steps; ++k) fold.step();
  return fold.simulator().state().q;
}

Scenario::Scenario(const ScenarioConfig& config, NetMesh mesh) : config_(config) {
  config_.validate();
  validate_mesh(mesh, config_.material());
  initial_q_ = mesh.reference_positions();
  center_ = center_node(mesh);
  switch (config_.kind) {
    case ScenarioKind::vibration:
      require_corners(mesh, config_.kind);
      sim_ = std::make_unique<Simulator>(std::move(mesh), config_.material(), config_.integrator(),
                                         config_.curvature);
      setup_vibration();
      break;
    case ScenarioKind::contact_drop:
      for (auto& x : mesh.nodes) x.z() += config_.start_height;
      initial_q_ = mesh.reference_positions();
      sim_ = std::make_unique<Simulator>(std::move(mesh), config_.material(), config_.integrator(),
                                         config_.curvature);
      setup_drop();
      break;
    case ScenarioKind::fold:
      if (mesh.junction_nodes.empty()) throw InvalidConfigError("fold needs a mesh with junction nodes");
      sim_ = std::make_unique<Simulator>(std::move(mesh), config_.material(), config_.integrator(),
                                         config_.curvature);
      setup_fold();
      break;
    case ScenarioKind::shoot:
    case ScenarioKind::close: {
      require_corners(mesh, config_.kind);
      Eigen::VectorXd folded;
      if (!config_.initial_state.empty()) {
        folded = load_frame(config_.initial_state).q;
        if (folded.size() != 3 * mesh.node_count()) {
          throw InvalidConfigError(fmt::format("initial_state '{}' has {} nodes, mesh has {}",
                                               config_.initial_state, folded.size() / 3,
                                               mesh.node_count()));
        }
      } else {
        folded = fold_positions(config_, mesh);
      }
      for (int c : mesh.corner_nodes) mesh.extra_point_mass[c] = config_.corner_mass;
      compute_lumped_masses(mesh, config_.material());
      for (auto& b : mesh.bend) b.active = false;
      sim_ = std::make_unique<Simulator>(std::move(mesh), config_.material(), config_.integrator(),
                                         config_.curvature);
      setup_flight(folded);
      break;
    }
  }
  sim_->contact_options().max_passes = config_.max_contact_passes;
  sim_->contact_options().velocity_reset = config_.velocity_reset;
}

Scenario::~Scenario() = default;

void Scenario::setup_vibration() {
  for (int c : sim_->mesh().corner_nodes) sim_->constraints().fix_node(c);
}

void Scenario::setup_drop() { sim_->set_surface(make_surface(config_.surface)); }

void Scenario::prescribe(const PrescribedMotion& motion) {
  motions_.push_back(motion);
  sim_->constraints().prescribe(motion.node, [motion](double t) { return motion.position(t); });
}

void Scenario::setup_fold() {
  const NetMesh& m = sim_->mesh();
  // Scale about the corner centroid (the origin for generated webs).
  Vec3 c = Vec3::Zero();
  if (!m.corner_nodes.empty()) {
    for (int k : m.corner_nodes) c += m.nodes[k];
    c /= static_cast<double>(m.corner_nodes.size());
  }
  for (int j : m.junction_nodes) {
    const Vec3 x = m.nodes[j];
    Vec3 target = c + config_.target_scale * (x - c);
    target.z() = 0.0;
    prescribe({j, x, target, config_.fold_speed, 0.0});
  }
}

void Scenario::setup_flight(const Eigen::VectorXd& folded) {
  NetMesh& m = sim_->mesh();
  State& s = sim_->state();
  if (config_.kind == ScenarioKind::close) {
    bag_z_ = config_.sphere_radius + config_.standoff;
    axis_sign_ = -1.0;
    sim_->set_surface(std::make_unique<HemisphereSurface>(config_.sphere_radius, Vec3::Zero()));
  }
  s.q = folded;
  for (int i = 0; i < m.node_count(); ++i) s.q[3 * i + 2] = bag_z_ + axis_sign_ * folded[3 * i + 2];
  s.v.setZero();
  initial_q_ = s.q;
  const double theta = config_.shoot_angle * M_PI / 180.0;
  Vec3 c = Vec3::Zero();
  for (int k : m.corner_nodes) c += m.nodes[k];
  c /= 6.0;
  for (int k : m.corner_nodes) {
    Vec3 radial = m.nodes[k] - c;
    radial.z() = 0.0;
    radial.normalize();
    s.v.segment<3>(3 * k) =
        config_.shoot_speed * (std::sin(theta) * radial + axis_sign_ * std::cos(theta) * Vec3::UnitZ());
  }
  ever_active_.assign(m.bend.size(), 0);
}

int Scenario::active_bends() const {
  int n = 0;
  for (const auto& b : sim_->mesh().bend) n += b.active ? 1 : 0;
  return n;
}

void Scenario::before_step() {
  const ScenarioKind kind = config_.kind;
  if (kind != ScenarioKind::shoot && kind != ScenarioKind::close) return;
  NetMesh& m = sim_->mesh();
  const Eigen::VectorXd& q = sim_->state().q;
  auto out = [&](int i) { return axis_sign_ * (q[3 * i + 2] - bag_z_) > 0.0; };
  for (std::size_t e = 0; e < m.bend.size(); ++e) {
    if (ever_active_[e]) continue;
    const auto& b = m.bend[e];
    const bool ready = config_.activation == ActivationRule::all_nodes
                           ? out(b.i) && out(b.j) && out(b.k)
                           : out(b.i) || out(b.j) || out(b.k);
    if (ready) {
      ever_active_[e] = 1;
      m.bend[e].active = true;
    }
  }
  if (kind == ScenarioKind::close && config_.trigger_enabled && !triggered_ &&
      time() >= config_.trigger_time - 1e-9 * config_.time_step) {
    triggered_ = true;
    for (int k : m.corner_nodes) {
      prescribe({k, sim_->state().position(k), config_.destination, config_.close_speed, time()});
    }
    spdlog::info("close triggered at t = {:.4g} s", time());
  }
}

void Scenario::after_step() {
  if (!first_contact_ && !sim_->contacts().empty()) first_contact_ = time();
}

StepReport Scenario::step() {
  before_step();
  try {
    const StepReport r = sim_->step();
    after_step();
    return r;
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(fmt::format("{} scenario at t = {:.6g} s: {}", to_string(config_.kind),
                                          time(), e.what()),
                              e.iterations(), e.residual_norm());
  }
}

std::vector<std::pair<std::string, double>> Scenario::metrics() const {
  std::vector<std::pair<std::string, double>> out;
  const State& s = sim_->state();
  const NetMesh& m = sim_->mesh();
  auto min_gap = [&]() {
    const ContactSurface* surf = sim_->surface();
    double gap = INFINITY;
    for (int i = 0; i < m.node_count(); ++i) {
      const Vec3 x = s.position(i);
      if (surf->in_footprint(x.x(), x.y())) gap = std::min(gap, x.z() - surf->height(x.x(), x.y()));
    }
    return gap;
  };
  switch (config_.kind) {
    case ScenarioKind::vibration:
      out.emplace_back("midpoint_deflection", s.q[3 * center_ + 2] - initial_q_[3 * center_ + 2]);
      break;
    case ScenarioKind::contact_drop:
      out.emplace_back("contacts", static_cast<double>(sim_->contacts().size()));
      out.emplace_back("min_gap", min_gap());
      break;
    case ScenarioKind::fold: {
      double offset = 0.0;
      for (const auto& mo : motions_) offset = std::max(offset, (s.position(mo.node) - mo.position(s.t)).norm());
      double lowest = 0.0, highest = -INFINITY;
      for (int i = 0; i < m.node_count(); ++i) {
        lowest = std::min(lowest, s.q[3 * i + 2]);
        if (!sim_->constraints().touches(i)) highest = std::max(highest, s.q[3 * i + 2]);
      }
      double corner = 0.0;
      for (int k : m.corner_nodes) corner = std::max(corner, (s.position(k) - initial_q_.segment<3>(3 * k)).norm());
      out.emplace_back("junction_offset", offset);
      out.emplace_back("corner_displacement", corner);
      out.emplace_back("lowest_z", lowest);
      out.emplace_back("highest_free_z", highest);
      break;
    }
    case ScenarioKind::close: {
      double far = 0.0;
      for (int k : m.corner_nodes) far = std::max(far, (s.position(k) - config_.destination).norm());
      out.emplace_back("contacts", static_cast<double>(sim_->contacts().size()));
      out.emplace_back("min_gap", min_gap());
      out.emplace_back("corner_distance", far);
      [[fallthrough]];
    }
    case ScenarioKind::shoot:
      out.emplace_back("spread_area", spread_area(s.q, m.corner_nodes));
      out.emplace_back("active_bends", static_cast<double>(active_bends()));
      break;
  }
  out.emplace_back("kinetic_energy", sim_->kinetic_energy());
  out.emplace_back("elastic_energy", sim_->elastic_energy());
  return out;
}

void Scenario::run(const ScenarioObserver& observer, double frame_interval) {
  const double h = config_.time_step;
  const int steps = static_cast<int>(std::lround(config_.duration / h));
  const int metric_every = std::max(1, static_cast<int>(std::lround(config_.metric_interval / h)));
  const int frame_every = frame_interval > 0.0 ? std::max(1, static_cast<int>(std::lround(frame_interval / h))) : 0;
  auto emit = [&](int k) {
    const double t = k * h;
    if (observer.metric && k % metric_every == 0) {
      for (const auto& [name, value] : metrics()) observer.metric(t, name, value);
    }
    if (observer.frame && frame_every > 0 && k % frame_every == 0) observer.frame(t, sim_->state());
  };
  emit(0);
  for (int k = 1; k <= steps; ++k) {
    const StepReport r = step();
    if (observer.step) observer.step(k, sim_->state(), r);
    emit(k);
  }
}

}  // namespace dernet
