#include "core/artifacts.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace michell {

using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

void write_field(const std::filesystem::path& path, const std::string& kind, int version,
                 const RowMatrix& data, ordered_json extra) {
  ordered_json header;
  header["format"] = "michell-field";
  header["kind"] = kind;
  header["version"] = version;
  header["rows"] = data.rows();
  header["cols"] = data.cols();
  header["dtype"] = "f64le";
  for (auto it = extra.begin(); it != extra.end(); ++it)
    header[it.key()] = it.value();
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::Io, "cannot write " + path.string());
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(sizeof(double) * data.size()));
  out.close();
  if (!out)
    fail(ErrorCode::Io, "failed writing " + path.string());
}

FieldFile read_field(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  FieldFile f;
  try {
    f.header = ordered_json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": bad field header: " + e.what());
  }
  if (f.header.value("format", "") != "michell-field" || f.header.value("kind", "") != kind)
    fail(ErrorCode::Parse, path.string() + ": not a '" + kind + "' field file");
  const auto rows = f.header.value("rows", -1LL), cols = f.header.value("cols", -1LL);
  if (rows < 0 || cols < 0)
    fail(ErrorCode::Parse, path.string() + ": bad field dimensions");
  f.data.resize(rows, cols);
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(sizeof(double) * f.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * f.data.size()))
    fail(ErrorCode::Parse, path.string() + ": truncated field data");
  return f;
}

ordered_json graph_to_json(const TrussGraph& g) {
  ordered_json j;
  j["format"] = "michell-graph";
  j["version"] = 1;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : g.nodes)
    nodes.push_back({{"position", {n.position.x(), n.position.y(), n.position.z()}},
                     {"param", {n.param.x(), n.param.y(), n.param.z()}},
                     {"tag", to_string(n.tag)}});
  ordered_json elements = ordered_json::array();
  for (const auto& e : g.elements)
    elements.push_back(
        {{"nodes", {e.nodes[0], e.nodes[1]}}, {"family", to_string(e.family)}, {"source", e.source}});
  j["nodes"] = std::move(nodes);
  j["elements"] = std::move(elements);
  return j;
}

TrussGraph graph_from_json(const json& j) {
  try {
    if (j.at("format") != "michell-graph")
      fail(ErrorCode::Parse, "not a graph document");
    TrussGraph g;
    for (const auto& n : j.at("nodes")) {
      TrussNode node;
      for (int i = 0; i < 3; ++i) {
        node.position[i] = n.at("position").at(i).get<double>();
        node.param[i] = n.at("param").at(i).get<double>();
      }
      auto tag = parse_node_tag(n.at("tag").get<std::string>());
      if (!tag)
        fail(ErrorCode::Parse, "unknown node tag");
      node.tag = *tag;
      g.nodes.push_back(node);
    }
    for (const auto& e : j.at("elements")) {
      TrussElement el;
      el.nodes = {e.at("nodes").at(0).get<int>(), e.at("nodes").at(1).get<int>()};
      auto fam = parse_family(e.at("family").get<std::string>());
      if (!fam)
        fail(ErrorCode::Parse, "unknown element family");
      el.family = *fam;
      el.source = e.value("source", -1);
      g.elements.push_back(el);
    }
    g.validate();
    return g;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed graph: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::Parse, std::string("malformed graph: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out)
    fail(ErrorCode::Io, "failed writing " + path.string());
}

void write_graph(const std::filesystem::path& path, const TrussGraph& g) {
  write_text(path, graph_to_json(g).dump(1) + "\n");
}

TrussGraph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::Io, "cannot read " + path.string());
  try {
    return graph_from_json(json::parse(in));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

} // namespace michell
