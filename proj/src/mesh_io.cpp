#include "meshconv/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace meshconv {
namespace {

// Next non-empty, non-comment line; false on EOF.
bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

void check_face_indices(const Mesh& m, const Face& f, std::size_t line_no) {
  for (VertexId v : f) {
    if (v < 0 || v >= static_cast<VertexId>(m.vertices.size())) {
      throw ParseError("face index out of range", line_no);
    }
  }
}

Mesh load_off(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_content_line(in, line, line_no)) throw ParseError("empty OFF stream", line_no);

  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw ParseError("missing OFF header", line_no);

  // Counts may follow the magic on the same line.
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) {
    if (!next_content_line(in, line, line_no)) throw ParseError("missing OFF counts", line_no);
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) throw ParseError("malformed OFF counts", line_no);
    counts >> ne;
  } else if (!(header >> nf)) {
    throw ParseError("malformed OFF counts", line_no);
  }
  if (nv < 0 || nf < 0) throw ParseError("negative OFF counts", line_no);

  Mesh m;
  m.vertices.reserve(static_cast<std::size_t>(nv));
  m.faces.reserve(static_cast<std::size_t>(nf));
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line, line_no)) throw ParseError("unexpected end of vertex list", line_no);
    std::istringstream ls(line);
    Vec3 v;
    if (!(ls >> v.x >> v.y >> v.z)) throw ParseError("malformed vertex", line_no);
    m.vertices.push_back(v);
  }
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line, line_no)) throw ParseError("unexpected end of face list", line_no);
    std::istringstream ls(line);
    long n = 0;
    if (!(ls >> n)) throw ParseError("malformed face", line_no);
    if (n != 3) throw ParseError("non-triangle face", line_no);
    Face f;
    if (!(ls >> f[0] >> f[1] >> f[2])) throw ParseError("malformed face", line_no);
    check_face_indices(m, f, line_no);
    m.faces.push_back(f);
  }
  return m;
}

// "12", "12/3", "12//4", "12/3/4"; negative indices are relative to the end.
VertexId parse_obj_index(const std::string& token, std::size_t vertex_count, std::size_t line_no) {
  const std::string head = token.substr(0, token.find('/'));
  long idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stol(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw ParseError("malformed face index '" + token + "'", line_no);
  }
  if (idx < 0) idx = static_cast<long>(vertex_count) + idx + 1;
  if (idx < 1 || idx > static_cast<long>(vertex_count)) {
    throw ParseError("face index out of range", line_no);
  }
  return static_cast<VertexId>(idx - 1);
}

Mesh load_obj(std::istream& in) {
  Mesh m;
  std::string line;
  std::size_t line_no = 0;
  while (next_content_line(in, line, line_no)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) throw ParseError("malformed vertex", line_no);
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      for (std::string tok; ls >> tok;) tokens.push_back(tok);
      if (tokens.size() != 3) throw ParseError("non-triangle face", line_no);
      Face f;
      for (int i = 0; i < 3; ++i) f[i] = parse_obj_index(tokens[i], m.vertices.size(), line_no);
      m.faces.push_back(f);
    }
    // vt, vn, g, o, s, usemtl, mtllib: ignored
  }
  return m;
}

}  // namespace

Mesh load_mesh(std::istream& in, MeshFormat format) {
  return format == MeshFormat::kOff ? load_off(in) : load_obj(in);
}

MeshFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return MeshFormat::kOff;
  if (ext == ".obj") return MeshFormat::kObj;
  throw std::invalid_argument("unsupported mesh extension: " + path.string());
}

Mesh load_mesh_file(const std::filesystem::path& path) {
  const MeshFormat format = format_from_extension(path);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path.string());
  Mesh m = load_mesh(in, format);
  m.name = path.stem().string();
  return m;
}

void write_off(std::ostream& out, const Mesh& m) {
  out << "OFF\n" << m.vertices.size() << ' ' << m.faces.size() << " 0\n";
  out << std::setprecision(17);
  for (const Vec3& v : m.vertices) out << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const Face& f : m.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_off_file(const std::filesystem::path& path, const Mesh& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path.string());
  write_off(out, m);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace meshconv
