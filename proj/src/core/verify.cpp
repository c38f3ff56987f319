#include "core/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <map>
#include <set>

#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "core/error.hpp"
#include "core/log.hpp"
#include "core/operators.hpp"

namespace michell {

MemberSection MemberSection::circular(double radius) {
  if (!(radius > 0))
    fail(ErrorCode::Config, "member radius must be positive");
  const double r2 = radius * radius;
  MemberSection s;
  s.area = std::numbers::pi * r2;
  s.inertia = std::numbers::pi * r2 * r2 / 4.0;
  s.polar = std::numbers::pi * r2 * r2 / 2.0;
  s.fiber = radius;
  return s;
}

TrussModel TrussModel::from_graph(TrussGraph graph, const RadiusPolicy& radii,
                                  const Material& material) {
  radii.validate();
  TrussModel m;
  m.material = material;
  for (const auto& el : graph.elements)
    m.sections.push_back(MemberSection::circular(radii.radius(el.family)));
  m.pinned.assign(graph.elements.size(), false);
  m.graph = std::move(graph);
  return m;
}

void TrussModel::validate() const {
  material.validate();
  graph.validate();
  const std::size_t ne = graph.elements.size();
  if (sections.size() != ne || pinned.size() != ne)
    fail(ErrorCode::InvalidArgument, "one section and pinned flag per element is required");
  for (const auto& s : sections)
    if (!(s.area > 0 && s.inertia > 0 && s.polar > 0 && s.fiber > 0))
      fail(ErrorCode::Config, "member sections must be positive");
  const int nn = static_cast<int>(graph.nodes.size());
  int fixed = 0;
  for (const auto& s : supports) {
    if (s.node < 0 || s.node >= nn)
      fail(ErrorCode::Config, "support references a missing node");
    fixed += static_cast<int>(std::count(s.fixed.begin(), s.fixed.end(), true));
  }
  if (fixed < 6)
    fail(ErrorCode::Config, "truss model needs at least 6 constrained dofs, got " +
                                std::to_string(fixed));
  for (const auto& l : loads)
    if (l.node < 0 || l.node >= nn)
      fail(ErrorCode::Config, "load references a missing node");
}

namespace {

std::vector<int> nearest_nodes(const TrussGraph& g, const std::vector<Vec3>& targets) {
  std::vector<int> out;
  for (const Vec3& p : targets) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
      const double d = (g.nodes[v].position - p).squaredNorm();
      if (best < 0 || d < best_d) {
        best = static_cast<int>(v);
        best_d = d;
      }
    }
    if (best >= 0)
      out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> map_selector(const TrussGraph& g, const TetMesh& mesh, const Selector& sel) {
  std::vector<int> nodes;
  if (sel.is_region())
    for (std::size_t v = 0; v < g.nodes.size(); ++v)
      if (sel.contains(g.nodes[v].position))
        nodes.push_back(static_cast<int>(v));
  if (nodes.empty()) {
    std::vector<Vec3> targets;
    for (int v : select_vertices(mesh, sel))
      targets.push_back(mesh.vertices()[v]);
    if (targets.empty() && sel.is_region())
      targets.push_back(sel.region_center());
    nodes = nearest_nodes(g, targets);
  }
  return nodes;
}

} // namespace

TrussModel build_truss_model(const TrussGraph& graph, const TetMesh& mesh,
                             const Material& material, const BoundaryConditions& bcs,
                             const RadiusPolicy& radii) {
  if (graph.nodes.empty())
    fail(ErrorCode::Numerical, "truss graph is empty");
  TrussModel model = TrussModel::from_graph(graph, radii, material);
  std::map<int, NodeSupport> supports;
  for (const auto& dc : bcs.dirichlet) {
    const auto nodes = map_selector(graph, mesh, dc.selector);
    for (int v : nodes) {
      auto [it, inserted] = supports.emplace(v, NodeSupport{v, {false, false, false, false, false, false}, Vec3::Zero()});
      for (int a = 0; a < 3; ++a)
        if (dc.axes[a]) {
          it->second.fixed[a] = true;
          it->second.displacement[a] = dc.displacement[a];
        }
      if (nodes.size() == 1)
        for (int a = 3; a < 6; ++a)
          it->second.fixed[a] = true;
    }
  }
  for (auto& [v, s] : supports)
    model.supports.push_back(s);

  std::map<int, Vec3> loads;
  for (const auto& nc : bcs.neumann) {
    const auto nodes = map_selector(graph, mesh, nc.selector);
    if (nodes.empty())
      continue;
    for (int v : nodes)
      loads.try_emplace(v, Vec3::Zero()).first->second += nc.force / static_cast<double>(nodes.size());
  }
  if (bcs.gravity) {
    for (std::size_t e = 0; e < graph.elements.size(); ++e) {
      const double w = material.density * model.sections[e].area * graph.element_length(e);
      for (int v : graph.elements[e].nodes)
        loads.try_emplace(v, Vec3::Zero()).first->second += 0.5 * w * *bcs.gravity;
    }
  }
  for (const auto& [v, f] : loads)
    model.loads.push_back({v, f, Vec3::Zero()});
  return model;
}

Eigen::Matrix<double, 12, 12> frame_local_stiffness(double L, const MemberSection& s,
                                                    const Material& m, bool pinned) {
  Eigen::Matrix<double, 12, 12> K = Eigen::Matrix<double, 12, 12>::Zero();
  const double E = m.young_modulus, G = m.shear_modulus();
  const double ka = E * s.area / L;
  K(0, 0) = K(6, 6) = ka;
  K(0, 6) = K(6, 0) = -ka;
  if (pinned)
    return K;
  const double kt = G * s.polar / L;
  K(3, 3) = K(9, 9) = kt;
  K(3, 9) = K(9, 3) = -kt;
  const double k = E * s.inertia / (L * L * L);
  // Bending in the local xy plane (v, theta_z).
  K(1, 1) = K(7, 7) = 12 * k;
  K(1, 7) = -12 * k;
  K(1, 5) = K(1, 11) = 6 * L * k;
  K(5, 7) = K(7, 11) = -6 * L * k;
  K(5, 5) = K(11, 11) = 4 * L * L * k;
  K(5, 11) = 2 * L * L * k;
  // Bending in the local xz plane (w, theta_y).
  K(2, 2) = K(8, 8) = 12 * k;
  K(2, 8) = -12 * k;
  K(2, 4) = K(2, 10) = -6 * L * k;
  K(4, 8) = K(8, 10) = 6 * L * k;
  K(4, 4) = K(10, 10) = 4 * L * L * k;
  K(4, 10) = 2 * L * L * k;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j)
      K(j, i) = K(i, j);
  return K;
}

namespace {

// Rows are the member's local axes in global coordinates.
Mat3 member_axes(const Vec3& a, const Vec3& b) {
  const Vec3 ex = (b - a).normalized();
  const Vec3 ref = std::abs(ex.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitY();
  const Vec3 ey = ref.cross(ex).normalized();
  const Vec3 ez = ex.cross(ey);
  Mat3 R;
  R.row(0) = ex.transpose();
  R.row(1) = ey.transpose();
  R.row(2) = ez.transpose();
  return R;
}

Eigen::Matrix<double, 12, 12> transform(const Mat3& R) {
  Eigen::Matrix<double, 12, 12> T = Eigen::Matrix<double, 12, 12>::Zero();
  for (int b = 0; b < 4; ++b)
    T.block<3, 3>(3 * b, 3 * b) = R;
  return T;
}

// Component label per node (smallest node index in the component).
std::vector<int> components(const TrussGraph& g) {
  std::vector<int> parent(g.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& el : g.elements) {
    int a = find(el.nodes[0]), b = find(el.nodes[1]);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> label(g.nodes.size());
  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    label[v] = find(static_cast<int>(v));
  return label;
}

} // namespace

FrameResult frame_fem(const TrussModel& model) {
  model.validate();
  const auto& g = model.graph;
  const int nn = static_cast<int>(g.nodes.size());
  const int ndof = 6 * nn;

  std::vector<Eigen::Matrix<double, 12, 12>> kglobal(g.elements.size());
  std::vector<Eigen::Matrix<double, 12, 12>> klocal(g.elements.size());
  std::vector<Eigen::Matrix<double, 12, 12>> transforms(g.elements.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(144 * g.elements.size());
  for (std::size_t e = 0; e < g.elements.size(); ++e) {
    const auto& el = g.elements[e];
    const Vec3& a = g.nodes[el.nodes[0]].position;
    const Vec3& b = g.nodes[el.nodes[1]].position;
    const double L = (b - a).norm();
    if (!(L > 1e-12))
      fail(ErrorCode::Numerical, "element " + std::to_string(e) + " has zero length");
    klocal[e] = frame_local_stiffness(L, model.sections[e], model.material, model.pinned[e]);
    transforms[e] = transform(member_axes(a, b));
    kglobal[e] = transforms[e].transpose() * klocal[e] * transforms[e];
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        if (kglobal[e](i, j) != 0.0)
          trip.emplace_back(6 * el.nodes[i / 6] + i % 6, 6 * el.nodes[j / 6] + j % 6,
                            kglobal[e](i, j));
  }
  SparseMatrix K(ndof, ndof);
  K.setFromTriplets(trip.begin(), trip.end());

  FrameResult res;
  std::vector<char> fixed(ndof, 0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof), f = Eigen::VectorXd::Zero(ndof);
  std::set<int> supported_components;
  const auto label = components(g);
  for (const auto& s : model.supports) {
    for (int a = 0; a < 6; ++a)
      if (s.fixed[a]) {
        fixed[6 * s.node + a] = 1;
        u[6 * s.node + a] = a < 3 ? s.displacement[a] : 0.0;
      }
    supported_components.insert(label[s.node]);
  }
  for (int v = 0; v < nn; ++v)
    if (!supported_components.count(label[v])) {
      ++res.floating_nodes;
      for (int a = 0; a < 6; ++a)
        fixed[6 * v + a] = 1;
    }
  int dropped_loads = 0;
  for (const auto& l : model.loads) {
    if (!supported_components.count(label[l.node])) {
      ++dropped_loads;
      continue;
    }
    f.segment<3>(6 * l.node) += l.force;
    f.segment<3>(6 * l.node + 3) += l.moment;
  }
  if (res.floating_nodes > 0)
    logger()->warn("verify: {} node(s) in unsupported components excluded ({} load(s) dropped)",
                   res.floating_nodes, dropped_loads);
  const Eigen::VectorXd diag = K.diagonal();
  for (int d = 0; d < ndof; ++d)
    if (!fixed[d] && d % 6 >= 3 && diag[d] == 0.0) {
      fixed[d] = 1;
      ++res.auto_fixed_dofs;
    }

  std::vector<int> free_index(ndof, -1), free_dofs;
  for (int d = 0; d < ndof; ++d)
    if (!fixed[d]) {
      free_index[d] = static_cast<int>(free_dofs.size());
      free_dofs.push_back(d);
    }
  const int nf = static_cast<int>(free_dofs.size());
  if (nf > 0) {
    std::vector<Eigen::Triplet<double>> tff;
    Eigen::VectorXd rhs(nf);
    for (int i = 0; i < nf; ++i)
      rhs[i] = f[free_dofs[i]];
    for (int col = 0; col < K.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
        const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
        if (free_index[r] < 0)
          continue;
        if (free_index[c] >= 0)
          tff.emplace_back(free_index[r], free_index[c], it.value());
        else
          rhs[free_index[r]] -= it.value() * u[c];
      }
    SparseMatrix Kff(nf, nf);
    Kff.setFromTriplets(tff.begin(), tff.end());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kff);
    const double scale = Kff.diagonal().cwiseAbs().maxCoeff();
    auto mechanism = [&]() {
      std::set<int> nodes;
      if (ldlt.info() == Eigen::Success) {
        const auto D = ldlt.vectorD();
        const auto& pinv = ldlt.permutationPinv().indices();
        for (int i = 0; i < nf; ++i)
          if (!(D[i] > 1e-12 * scale))
            nodes.insert(free_dofs[pinv[i]] / 6);
      }
      std::string list;
      int shown = 0;
      for (int v : nodes) {
        if (shown++ == 20) {
          list += " ...";
          break;
        }
        list += (list.empty() ? "" : " ") + std::to_string(v);
      }
      fail(ErrorCode::Numerical, "truss is a mechanism (zero-energy mode at nodes: " + list + ")");
    };
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * scale))
      mechanism();
    Eigen::VectorXd x = ldlt.solve(rhs);
    const double rhs_norm = rhs.norm();
    for (int pass = 0; pass < 3; ++pass) {
      const Eigen::VectorXd r = rhs - Kff * x;
      res.relative_residual = rhs_norm > 0 ? r.norm() / rhs_norm : r.norm();
      if (res.relative_residual <= 1e-12)
        break;
      x += ldlt.solve(r);
    }
    res.relative_residual =
        rhs_norm > 0 ? (rhs - Kff * x).norm() / rhs_norm : (rhs - Kff * x).norm();
    if (!(res.relative_residual <= 1e-8))
      fail(ErrorCode::Numerical,
           "frame solve residual " + std::to_string(res.relative_residual) + " exceeds 1e-8");
    for (int i = 0; i < nf; ++i)
      u[free_dofs[i]] = x[i];
  }

  const Eigen::VectorXd r = K * u - f;
  res.displacement.resize(nn);
  res.reaction.resize(nn);
  Vec3 force_sum = Vec3::Zero();
  double load_scale = 0.0;
  for (int v = 0; v < nn; ++v) {
    res.displacement[v] = u.segment<6>(6 * v);
    Vector6d rv = Vector6d::Zero();
    for (int a = 0; a < 6; ++a)
      if (fixed[6 * v + a])
        rv[a] = r[6 * v + a];
    res.reaction[v] = rv;
    force_sum += rv.head<3>() + f.segment<3>(6 * v);
    load_scale += f.segment<3>(6 * v).norm() + rv.head<3>().norm();
  }
  res.equilibrium_error = load_scale > 0 ? force_sum.norm() / load_scale : 0.0;

  const std::size_t ne = g.elements.size();
  res.axial_force.resize(ne);
  res.axial_stress.resize(ne);
  res.bending_stress.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& el = g.elements[e];
    Eigen::Matrix<double, 12, 1> ue;
    ue << u.segment<6>(6 * el.nodes[0]), u.segment<6>(6 * el.nodes[1]);
    const Eigen::Matrix<double, 12, 1> fl = klocal[e] * (transforms[e] * ue);
    const auto& s = model.sections[e];
    res.axial_force[e] = fl[6];
    res.axial_stress[e] = fl[6] / s.area;
    const double m0 = std::hypot(fl[4], fl[5]), m1 = std::hypot(fl[10], fl[11]);
    res.bending_stress[e] = std::max(m0, m1) * s.fiber / s.inertia;
  }
  return res;
}

CapacityResult capacity(const TrussModel& model) { return capacity(model, model.loads); }

CapacityResult capacity(const TrussModel& model, std::span<const NodeLoad> load_template) {
  TrussModel scaled = model;
  scaled.loads.assign(load_template.begin(), load_template.end());
  CapacityResult out;
  out.frame = frame_fem(scaled);
  for (std::size_t e = 0; e < model.graph.elements.size(); ++e) {
    const double s = out.frame.combined_stress(e);
    if (s > out.max_template_stress) {
      out.max_template_stress = s;
      out.critical_element = static_cast<int>(e);
    }
  }
  if (!(out.max_template_stress > 0))
    fail(ErrorCode::Numerical, "load does not stress structure");
  out.load_factor = model.material.yield_strength / out.max_template_stress;
  return out;
}

void write_verify_report(const std::filesystem::path& path, const TrussModel& model,
                         const CapacityResult& result) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["load_factor"] = result.load_factor;
  j["critical_element"] = result.critical_element;
  j["max_combined_stress"] = result.max_template_stress;
  j["yield_strength"] = model.material.yield_strength;
  j["relative_residual"] = result.frame.relative_residual;
  j["equilibrium_error"] = result.frame.equilibrium_error;
  j["supported_nodes"] = model.supports.size();
  j["loaded_nodes"] = model.loads.size();
  j["floating_nodes"] = result.frame.floating_nodes;
  j["auto_fixed_rotations"] = result.frame.auto_fixed_dofs;
  ordered_json elements = ordered_json::array();
  const auto& g = model.graph;
  for (std::size_t e = 0; e < g.elements.size(); ++e) {
    ordered_json el;
    el["id"] = e;
    el["nodes"] = {g.elements[e].nodes[0], g.elements[e].nodes[1]};
    el["family"] = to_string(g.elements[e].family);
    el["axial_force"] = result.frame.axial_force[e];
    el["axial_stress"] = result.frame.axial_stress[e];
    el["bending_stress"] = result.frame.bending_stress[e];
    el["utilization"] = result.frame.combined_stress(e) / model.material.yield_strength;
    elements.push_back(std::move(el));
  }
  j["elements"] = std::move(elements);
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out)
    fail(ErrorCode::Io, "failed writing " + path.string());
}

} // namespace michell
