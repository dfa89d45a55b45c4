#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "meshconv/mesh.hpp"

namespace meshconv {

enum class MeshFormat { kOff, kObj };

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parse an ASCII OFF or OBJ stream. Only triangles are accepted; OBJ
/// texture/normal sub-indices are ignored and indices become 0-based.
Mesh load_mesh(std::istream& in, MeshFormat format);

/// Format picked from the extension (.off / .obj, case-insensitive).
Mesh load_mesh_file(const std::filesystem::path& path);

MeshFormat format_from_extension(const std::filesystem::path& path);

/// Writes with 17 significant digits so a reload reproduces every coordinate.
void write_off(std::ostream& out, const Mesh& m);
void write_off_file(const std::filesystem::path& path, const Mesh& m);

}  // namespace meshconv
