#include "core/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

#include "core/error.hpp"

namespace fs = std::filesystem;

namespace michell {

std::optional<MeshFormat> parse_mesh_format(const std::string& name) {
  if (name == "medit_mesh" || name == "medit" || name == "mesh")
    return MeshFormat::MeditMesh;
  if (name == "tetgen_pair" || name == "tetgen")
    return MeshFormat::TetgenPair;
  return std::nullopt;
}

const char* to_string(MeshFormat format) {
  return format == MeshFormat::MeditMesh ? "medit_mesh" : "tetgen_pair";
}

MeshFormat detect_mesh_format(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".mesh")
    return MeshFormat::MeditMesh;
  if (ext == ".node" || ext == ".ele")
    return MeshFormat::TetgenPair;
  if (fs::exists(fs::path(path.string() + ".node")))
    return MeshFormat::TetgenPair;
  fail(ErrorCode::Parse, "cannot infer mesh format from '" + path.string() + "'");
}

namespace {

// Whitespace tokenizer that drops '#' comments.
class Tokens {
public:
  explicit Tokens(const fs::path& path) : path_(path) {
    std::ifstream in(path);
    if (!in)
      fail(ErrorCode::Io, "cannot open mesh file '" + path.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos)
        line.resize(hash);
      lines_.push_back(line);
    }
  }

  // Next non-empty line split into tokens.
  bool next_line(std::vector<std::string>& out) {
    while (line_ < lines_.size()) {
      std::istringstream ss(lines_[line_++]);
      out.clear();
      std::string tok;
      while (ss >> tok)
        out.push_back(tok);
      if (!out.empty())
        return true;
    }
    return false;
  }

  bool next(std::string& tok) {
    while (pending_.empty()) {
      std::vector<std::string> line;
      if (!next_line(line))
        return false;
      pending_.assign(line.rbegin(), line.rend());
    }
    tok = pending_.back();
    pending_.pop_back();
    return true;
  }

  std::string expect(const char* what) {
    std::string tok;
    if (!next(tok))
      error(std::string("unexpected end of file while reading ") + what);
    return tok;
  }

  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorCode::Parse, path_.string() + ":" + std::to_string(line_) + ": " + msg);
  }

  double number(const char* what) {
    std::string tok = expect(what);
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size())
        error("malformed number '" + tok + "' in " + what);
      return v;
    } catch (const std::logic_error&) {
      error("malformed number '" + tok + "' in " + what);
    }
  }

  long integer(const char* what) {
    std::string tok = expect(what);
    try {
      std::size_t used = 0;
      long v = std::stol(tok, &used);
      if (used != tok.size())
        error("malformed integer '" + tok + "' in " + what);
      return v;
    } catch (const std::logic_error&) {
      error("malformed integer '" + tok + "' in " + what);
    }
  }

private:
  fs::path path_;
  std::vector<std::string> lines_;
  std::size_t line_ = 0;
  std::vector<std::string> pending_;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

TetMesh load_medit(const fs::path& path) {
  // Record widths of the sections we skip.
  static const std::map<std::string, int> kSkipped = {
      {"edges", 3},      {"triangles", 4},        {"quadrilaterals", 5},
      {"hexahedra", 9},  {"corners", 1},          {"ridges", 1},
      {"requiredvertices", 1}, {"requirededges", 1}, {"requiredtriangles", 1},
      {"normals", 3},    {"tangents", 3},         {"normalatvertices", 2},
      {"tangentatedges", 2}, {"prisms", 7},       {"identifier", 1},
  };

  Tokens tok(path);
  std::vector<Vec3> vertices;
  std::vector<Tet> tets;
  bool have_vertices = false;
  std::string word;
  while (tok.next(word)) {
    std::string key = lower(word);
    if (key == "meshversionformatted") {
      tok.integer("MeshVersionFormatted");
    } else if (key == "dimension") {
      if (tok.integer("Dimension") != 3)
        tok.error("only 3D meshes are supported");
    } else if (key == "vertices") {
      long n = tok.integer("vertex count");
      if (n < 0)
        tok.error("negative vertex count");
      vertices.resize(n);
      for (long i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c)
          vertices[i][c] = tok.number("vertex coordinate");
        tok.integer("vertex reference");
      }
      have_vertices = true;
    } else if (key == "tetrahedra") {
      long n = tok.integer("tet count");
      if (n < 0)
        tok.error("negative tet count");
      tets.resize(n);
      for (long i = 0; i < n; ++i) {
        for (int c = 0; c < 4; ++c)
          tets[i][c] = static_cast<int>(tok.integer("tet vertex")) - 1;
        tok.integer("tet reference");
      }
    } else if (key == "end") {
      break;
    } else if (auto it = kSkipped.find(key); it != kSkipped.end()) {
      long n = tok.integer("record count");
      for (long i = 0; i < n * it->second; ++i)
        tok.expect("record");
    } else {
      tok.error("unknown MEDIT keyword '" + word + "'");
    }
  }
  if (!have_vertices)
    tok.error("missing Vertices section");
  if (tets.empty())
    tok.error("missing or empty Tetrahedra section");
  return TetMesh(std::move(vertices), std::move(tets));
}

TetMesh load_tetgen(const fs::path& path) {
  fs::path stem = path;
  auto ext = lower(path.extension().string());
  if (ext == ".node" || ext == ".ele")
    stem.replace_extension();
  const fs::path node_path = stem.string() + ".node";
  const fs::path ele_path = stem.string() + ".ele";

  Tokens node(node_path);
  long nv = node.integer("node count");
  long dim = node.integer("dimension");
  long nattr = node.integer("attribute count");
  long nmark = node.integer("boundary marker flag");
  if (dim != 3)
    node.error("only 3D .node files are supported");
  if (nv <= 0)
    node.error("node count must be positive");
  std::vector<Vec3> vertices(nv);
  long base = 0;
  for (long i = 0; i < nv; ++i) {
    long idx = node.integer("node index");
    if (i == 0) {
      if (idx != 0 && idx != 1)
        node.error("first node index must be 0 or 1");
      base = idx;
    }
    if (idx != i + base)
      node.error("node indices must be consecutive");
    for (int c = 0; c < 3; ++c)
      vertices[i][c] = node.number("node coordinate");
    for (long a = 0; a < nattr + (nmark ? 1 : 0); ++a)
      node.number("node attribute");
  }

  Tokens ele(ele_path);
  long nt = ele.integer("tet count");
  long per = ele.integer("nodes per tet");
  long tattr = ele.integer("tet attribute count");
  if (per != 4)
    ele.error("only linear (4-node) tets are supported");
  std::vector<Tet> tets(nt);
  for (long i = 0; i < nt; ++i) {
    ele.integer("tet index");
    for (int c = 0; c < 4; ++c)
      tets[i][c] = static_cast<int>(ele.integer("tet vertex") - base);
    for (long a = 0; a < tattr; ++a)
      ele.number("tet attribute");
  }
  return TetMesh(std::move(vertices), std::move(tets));
}

} // namespace

TetMesh load_tet_mesh(const fs::path& path, MeshFormat format) {
  return format == MeshFormat::MeditMesh ? load_medit(path) : load_tetgen(path);
}

void write_medit(const TetMesh& mesh, const fs::path& path) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  out << "MeshVersionFormatted 1\nDimension 3\n\nVertices\n" << mesh.num_vertices() << "\n";
  for (const Vec3& p : mesh.vertices())
    out << p.x() << " " << p.y() << " " << p.z() << " 0\n";
  out << "\nTetrahedra\n" << mesh.num_tets() << "\n";
  for (const Tet& t : mesh.tets())
    out << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << " " << t[3] + 1 << " 0\n";
  const auto& tris = mesh.boundary().triangles;
  out << "\nTriangles\n" << tris.size() << "\n";
  for (const Tri& t : tris)
    out << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << " 0\n";
  out << "\nEnd\n";
}

void write_tetgen(const TetMesh& mesh, const fs::path& stem) {
  std::ofstream node(stem.string() + ".node");
  std::ofstream ele(stem.string() + ".ele");
  if (!node || !ele)
    fail(ErrorCode::Io, "cannot write TetGen files for '" + stem.string() + "'");
  node << std::setprecision(17) << mesh.num_vertices() << " 3 0 0\n";
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3& p = mesh.vertices()[i];
    node << i << " " << p.x() << " " << p.y() << " " << p.z() << "\n";
  }
  ele << mesh.num_tets() << " 4 0\n";
  for (std::size_t i = 0; i < mesh.num_tets(); ++i) {
    const Tet& t = mesh.tets()[i];
    ele << i << " " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  }
}

} // namespace michell
