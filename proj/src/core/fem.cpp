#include "core/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "core/error.hpp"
#include "core/log.hpp"
#include "core/operators.hpp"

namespace michell {

void Material::validate() const {
  if (!(young_modulus > 0))
    fail(ErrorCode::Config, "young_modulus must be positive");
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
    fail(ErrorCode::Config, "poisson_ratio must lie in (-1, 0.5)");
  if (!(yield_strength > 0))
    fail(ErrorCode::Config, "yield_strength must be positive");
  if (!(density >= 0))
    fail(ErrorCode::Config, "density must be non-negative");
}

double Material::lame_lambda() const {
  return young_modulus * poisson_ratio / ((1 + poisson_ratio) * (1 - 2 * poisson_ratio));
}

double Material::shear_modulus() const { return young_modulus / (2 * (1 + poisson_ratio)); }

Selector Selector::box(const Vec3& lo, const Vec3& hi) {
  Selector s;
  s.kind = Kind::Box;
  s.min = lo;
  s.max = hi;
  return s;
}

Selector Selector::sphere(const Vec3& c, double r) {
  Selector s;
  s.kind = Kind::Sphere;
  s.center = c;
  s.radius = r;
  return s;
}

Selector Selector::vertices(std::vector<int> ids) {
  Selector s;
  s.kind = Kind::Vertices;
  s.indices = std::move(ids);
  return s;
}

Selector Selector::faces(std::vector<int> ids) {
  Selector s;
  s.kind = Kind::Faces;
  s.indices = std::move(ids);
  return s;
}

bool Selector::contains(const Vec3& p) const {
  switch (kind) {
  case Kind::Box:
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  case Kind::Sphere:
    return (p - center).squaredNorm() <= radius * radius;
  default:
    return false;
  }
}

Vec3 Selector::region_center() const { return kind == Kind::Box ? Vec3(0.5 * (min + max)) : center; }

std::vector<int> select_vertices(const TetMesh& mesh, const Selector& sel) {
  std::vector<int> out;
  const int nv = static_cast<int>(mesh.num_vertices());
  switch (sel.kind) {
  case Selector::Kind::Box:
  case Selector::Kind::Sphere:
    for (int v = 0; v < nv; ++v)
      if (sel.contains(mesh.vertices()[v]))
        out.push_back(v);
    break;
  case Selector::Kind::Vertices:
    for (int v : sel.indices) {
      if (v < 0 || v >= nv)
        fail(ErrorCode::Config, "vertex selector index " + std::to_string(v) + " out of range");
      out.push_back(v);
    }
    break;
  case Selector::Kind::Faces:
    for (int f : select_faces(mesh, sel))
      for (int v : mesh.boundary().triangles[f])
        out.push_back(v);
    break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> select_faces(const TetMesh& mesh, const Selector& sel) {
  const auto& surface = mesh.boundary();
  const int nf = static_cast<int>(surface.triangles.size());
  std::vector<int> out;
  switch (sel.kind) {
  case Selector::Kind::Box:
  case Selector::Kind::Sphere:
    for (int f = 0; f < nf; ++f) {
      const Tri& t = surface.triangles[f];
      Vec3 c = (mesh.vertices()[t[0]] + mesh.vertices()[t[1]] + mesh.vertices()[t[2]]) / 3.0;
      if (sel.contains(c))
        out.push_back(f);
    }
    break;
  case Selector::Kind::Faces:
    for (int f : sel.indices) {
      if (f < 0 || f >= nf)
        fail(ErrorCode::Config, "face selector index " + std::to_string(f) + " out of range");
      out.push_back(f);
    }
    break;
  case Selector::Kind::Vertices: {
    std::vector<int> ids = sel.indices;
    std::sort(ids.begin(), ids.end());
    for (int f = 0; f < nf; ++f) {
      const Tri& t = surface.triangles[f];
      if (std::all_of(t.begin(), t.end(),
                      [&](int v) { return std::binary_search(ids.begin(), ids.end(), v); }))
        out.push_back(f);
    }
    break;
  }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Eigen::Matrix<double, 12, 12> element_stiffness(const std::array<Vec3, 4>& g, double volume,
                                                const Material& material) {
  // Voigt order xx, yy, zz, yz, xz, xy with engineering shear strains.
  Eigen::Matrix<double, 6, 12> B = Eigen::Matrix<double, 6, 12>::Zero();
  for (int k = 0; k < 4; ++k) {
    const int c = 3 * k;
    B(0, c + 0) = g[k].x();
    B(1, c + 1) = g[k].y();
    B(2, c + 2) = g[k].z();
    B(3, c + 1) = g[k].z();
    B(3, c + 2) = g[k].y();
    B(4, c + 0) = g[k].z();
    B(4, c + 2) = g[k].x();
    B(5, c + 0) = g[k].y();
    B(5, c + 1) = g[k].x();
  }
  const double lam = material.lame_lambda();
  const double mu = material.shear_modulus();
  Eigen::Matrix<double, 6, 6> D = Eigen::Matrix<double, 6, 6>::Zero();
  D.topLeftCorner<3, 3>().setConstant(lam);
  D.topLeftCorner<3, 3>().diagonal().array() += 2 * mu;
  D.bottomRightCorner<3, 3>().diagonal().setConstant(mu);
  return volume * B.transpose() * D * B;
}

namespace {

const char* kRigidModeNames[6] = {"translation x", "translation y", "translation z",
                                  "rotation about x", "rotation about y", "rotation about z"};

// Checks that the constrained dofs remove all six rigid-body modes.
void check_rigid_modes(const TetMesh& mesh, const std::vector<std::array<bool, 3>>& fixed) {
  const auto& x = mesh.vertices();
  Vec3 lo = x[0], hi = x[0];
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : x) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    c += p;
  }
  c /= static_cast<double>(x.size());
  const double scale = std::max((hi - lo).norm(), 1e-300);

  Eigen::Matrix<double, 6, 6> gram = Eigen::Matrix<double, 6, 6>::Zero();
  for (std::size_t v = 0; v < x.size(); ++v) {
    const Vec3 r = (x[v] - c) / scale;
    for (int a = 0; a < 3; ++a) {
      if (!fixed[v][a])
        continue;
      Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
      m[a] = 1.0;
      // Rotation about axis k: (e_k x r)_a
      for (int k = 0; k < 3; ++k)
        m[3 + k] = Vec3::Unit(k).cross(r)[a];
      gram += m * m.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(gram);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 1.0);
  for (int i = 0; i < 6; ++i) {
    if (eig.eigenvalues()[i] > 1e-10 * top)
      continue;
    Eigen::Index mode;
    eig.eigenvectors().col(i).cwiseAbs().maxCoeff(&mode);
    fail(ErrorCode::Config,
         std::string("singular system: boundary conditions leave rigid mode '") +
             kRigidModeNames[mode] + "' unconstrained");
  }
}

} // namespace

StaticSolution solve_static(const TetMesh& mesh, const Material& material,
                            const BoundaryConditions& bcs) {
  material.validate();
  const int nv = static_cast<int>(mesh.num_vertices());
  const int ndof = 3 * nv;
  const auto ops = build_operators(mesh);

  StaticSolution sol;
  sol.constrained.assign(nv, {false, false, false});
  Eigen::VectorXd prescribed = Eigen::VectorXd::Zero(ndof);
  for (std::size_t i = 0; i < bcs.dirichlet.size(); ++i) {
    const auto& bc = bcs.dirichlet[i];
    auto verts = select_vertices(mesh, bc.selector);
    if (verts.empty())
      fail(ErrorCode::Config, "dirichlet condition " + std::to_string(i) + " selects no vertices");
    for (int v : verts)
      for (int a = 0; a < 3; ++a) {
        if (!bc.axes[a])
          continue;
        if (sol.constrained[v][a] && prescribed[3 * v + a] != bc.displacement[a])
          fail(ErrorCode::Config, "conflicting dirichlet values at vertex " + std::to_string(v));
        sol.constrained[v][a] = true;
        prescribed[3 * v + a] = bc.displacement[a];
      }
  }
  for (const auto& c : sol.constrained)
    sol.constrained_dofs += c[0] + c[1] + c[2];
  if (sol.constrained_dofs < 6)
    fail(ErrorCode::Config, "at least 6 constrained dofs are required, got " +
                                std::to_string(sol.constrained_dofs));
  check_rigid_modes(mesh, sol.constrained);

  Eigen::VectorXd f = Eigen::VectorXd::Zero(ndof);
  const auto& surface = mesh.boundary();
  for (std::size_t i = 0; i < bcs.neumann.size(); ++i) {
    const auto& bc = bcs.neumann[i];
    auto faces = select_faces(mesh, bc.selector);
    if (faces.empty())
      fail(ErrorCode::Config, "neumann condition " + std::to_string(i) + " selects no faces");
    double area = 0.0;
    for (int fi : faces)
      area += surface.areas[fi];
    for (int fi : faces) {
      const Vec3 share = bc.force * (surface.areas[fi] / area / 3.0);
      for (int v : surface.triangles[fi])
        f.segment<3>(3 * v) += share;
    }
  }
  if (bcs.gravity) {
    for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
      const Vec3 w = *bcs.gravity * (material.density * mesh.volumes()[t] / 4.0);
      for (int v : mesh.tets()[t])
        f.segment<3>(3 * v) += w;
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(144 * mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& tet = mesh.tets()[t];
    auto ke = element_stiffness(ops.hat_gradients[t], mesh.volumes()[t], material);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            trip.emplace_back(3 * tet[a] + i, 3 * tet[b] + j, ke(3 * a + i, 3 * b + j));
  }
  SparseMatrix K(ndof, ndof);
  K.setFromTriplets(trip.begin(), trip.end());

  std::vector<int> free_index(ndof, -1);
  int nfree = 0;
  for (int d = 0; d < ndof; ++d)
    if (!sol.constrained[d / 3][d % 3])
      free_index[d] = nfree++;

  Eigen::VectorXd u = prescribed;
  if (nfree > 0) {
    std::vector<Eigen::Triplet<double>> tff;
    Eigen::VectorXd rhs(nfree);
    for (int d = 0; d < ndof; ++d)
      if (free_index[d] >= 0)
        rhs[free_index[d]] = f[d];
    for (int col = 0; col < K.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
        const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
        if (free_index[r] < 0)
          continue;
        if (free_index[c] >= 0)
          tff.emplace_back(free_index[r], free_index[c], it.value());
        else
          rhs[free_index[r]] -= it.value() * prescribed[c];
      }
    SparseMatrix Kff(nfree, nfree);
    Kff.setFromTriplets(tff.begin(), tff.end());

    Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kff);
    if (ldlt.info() != Eigen::Success)
      fail(ErrorCode::Numerical, "stiffness factorization failed");
    const auto& D = ldlt.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    if (D.minCoeff() <= 1e-13 * dmax)
      fail(ErrorCode::Numerical, "stiffness matrix is singular or indefinite");

    Eigen::VectorXd uf = ldlt.solve(rhs);
    const double rhs_norm = std::max(rhs.norm(), 1e-300);
    double rel = (Kff * uf - rhs).norm() / rhs_norm;
    for (int it = 0; it < 3 && rel > 1e-10; ++it) {
      uf += ldlt.solve(rhs - Kff * uf);
      rel = (Kff * uf - rhs).norm() / rhs_norm;
    }
    if (rhs.norm() == 0.0)
      rel = (Kff * uf).norm();
    if (!(rel <= 1e-8))
      fail(ErrorCode::Numerical, "static solve residual " + std::to_string(rel) + " exceeds 1e-8");
    sol.relative_residual = rel;
    for (int d = 0; d < ndof; ++d)
      if (free_index[d] >= 0)
        u[d] = uf[free_index[d]];
  }

  const Eigen::VectorXd internal = K * u;
  sol.displacement.resize(nv);
  sol.applied.resize(nv);
  sol.reactions.assign(nv, Vec3::Zero());
  for (int v = 0; v < nv; ++v) {
    sol.displacement[v] = u.segment<3>(3 * v);
    sol.applied[v] = f.segment<3>(3 * v);
    for (int a = 0; a < 3; ++a)
      if (sol.constrained[v][a])
        sol.reactions[v][a] = internal[3 * v + a] - f[3 * v + a];
  }
  logger()->debug("fea: {} dofs, {} constrained, residual {:.3e}", ndof, sol.constrained_dofs,
                  sol.relative_residual);
  return sol;
}

namespace {

void decompose(StressField& field) {
  const std::size_t n = field.sigma.size();
  field.eigenvalues.resize(n);
  field.eigenvectors.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(field.sigma[t]);
    // Ascending from Eigen; store decreasing.
    for (int k = 0; k < 3; ++k) {
      field.eigenvalues[t][k] = eig.eigenvalues()[2 - k];
      field.eigenvectors[t].col(k) = eig.eigenvectors().col(2 - k);
    }
  }
}

} // namespace

StressField stress_from_tensors(std::vector<Mat3> sigma) {
  StressField field;
  field.sigma = std::move(sigma);
  for (auto& s : field.sigma)
    s = 0.5 * (s + s.transpose()).eval();
  decompose(field);
  return field;
}

StressField cauchy_stress(const TetMesh& mesh, const Material& material,
                          const std::vector<Vec3>& displacement) {
  if (displacement.size() != mesh.num_vertices())
    fail(ErrorCode::InvalidArgument, "displacement field size does not match the mesh");
  const auto ops = build_operators(mesh);
  const double lam = material.lame_lambda();
  const double mu = material.shear_modulus();
  std::vector<Mat3> sigma(mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    Mat3 H = Mat3::Zero();
    for (int k = 0; k < 4; ++k)
      H += displacement[mesh.tets()[t][k]] * ops.hat_gradients[t][k].transpose();
    const Mat3 eps = 0.5 * (H + H.transpose());
    sigma[t] = lam * eps.trace() * Mat3::Identity() + 2 * mu * eps;
  }
  StressField field;
  field.sigma = std::move(sigma);
  decompose(field);
  return field;
}

StressField stress_spd(StressField field, double low, double high) {
  if (field.eigenvalues.size() != field.sigma.size())
    decompose(field);
  if (field.sigma.empty())
    fail(ErrorCode::InvalidArgument, "empty stress field");
  double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
  for (const Vec3& ev : field.eigenvalues)
    for (int k = 0; k < 3; ++k) {
      amin = std::min(amin, std::abs(ev[k]));
      amax = std::max(amax, std::abs(ev[k]));
    }
  if (!(amax > 0.0))
    fail(ErrorCode::Numerical, "null stress field");
  field.abs_min = amin;
  field.abs_max = amax;

  const bool degenerate = amax - amin < 1e-12 * amax;
  const double mid = 0.5 * (low + high);
  const std::size_t n = field.sigma.size();
  field.sigma_plus.resize(n);
  field.spd_eigenvalues.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    Vec3 mapped;
    for (int k = 0; k < 3; ++k) {
      const double a = std::abs(field.eigenvalues[t][k]);
      mapped[k] = degenerate ? mid : low + (high - low) * ((a - amin) / (amax - amin));
    }
    const Mat3& Q = field.eigenvectors[t];
    Mat3 s = Q * mapped.asDiagonal() * Q.transpose();
    field.sigma_plus[t] = 0.5 * (s + s.transpose());
    field.spd_eigenvalues[t] = mapped;
  }
  return field;
}

} // namespace michell
