#include "meshconv/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace meshconv::shapes {

Mesh tetrahedron() {
  Mesh m;
  m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  m.name = "tetrahedron";
  return m;
}

Mesh icosahedron() {
  const double t = std::numbers::phi;
  Mesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : m.vertices) v = v / norm(v);
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},   {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  m.name = "icosahedron";
  return m;
}

Mesh icosphere(int frequency) {
  if (frequency < 1) throw std::invalid_argument("icosphere: frequency must be >= 1");
  const Mesh base = icosahedron();
  const int n = frequency;
  Mesh m;
  m.name = "icosphere";
  // A subdivision point is an integer combination of base vertices with
  // weights summing to n; the sorted (vertex, weight) list identifies it
  // across the faces that share an edge.
  std::map<std::vector<std::pair<VertexId, int>>, VertexId> ids;
  auto point = [&](const Face& f, int i, int j) {
    std::vector<std::pair<VertexId, int>> key;
    const int w[3] = {n - i - j, i, j};
    for (int k = 0; k < 3; ++k) {
      if (w[k] > 0) key.emplace_back(f[k], w[k]);
    }
    std::sort(key.begin(), key.end());
    auto [it, inserted] = ids.try_emplace(key, static_cast<VertexId>(m.vertices.size()));
    if (inserted) {
      Vec3 p;
      for (const auto& [v, wt] : key) p += static_cast<double>(wt) * base.vertices[v];
      m.vertices.push_back(p / norm(p));
    }
    return it->second;
  };
  for (const Face& f : base.faces) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i + j < n; ++i) {
        m.faces.push_back({point(f, i, j), point(f, i + 1, j), point(f, i, j + 1)});
        if (i + j + 1 < n) m.faces.push_back({point(f, i + 1, j), point(f, i + 1, j + 1), point(f, i, j + 1)});
      }
    }
  }
  return m;
}

Mesh box(int n, Vec3 half_extents) {
  if (n < 1) throw std::invalid_argument("box: grid resolution must be >= 1");
  Mesh m;
  m.name = "box";
  std::map<std::array<int, 3>, VertexId> ids;
  auto vertex = [&](std::array<int, 3> g) {
    auto [it, inserted] = ids.try_emplace(g, static_cast<VertexId>(m.vertices.size()));
    if (inserted) {
      Vec3 p;
      for (int k = 0; k < 3; ++k) p[k] = half_extents[k] * (2.0 * g[k] / n - 1.0);
      m.vertices.push_back(p);
    }
    return it->second;
  };
  for (int axis = 0; axis < 3; ++axis) {
    const int b = (axis + 1) % 3;
    const int c = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
          auto at = [&](int du, int dv) {
            std::array<int, 3> g{};
            g[axis] = side * n;
            g[b] = u + du;
            g[c] = v + dv;
            return vertex(g);
          };
          // e_b x e_c = e_axis, so (u,v) -> (u+1,v) -> (u+1,v+1) faces +axis.
          const VertexId q0 = at(0, 0), q1 = at(1, 0), q2 = at(1, 1), q3 = at(0, 1);
          if (side == 1) {
            m.faces.push_back({q0, q1, q2});
            m.faces.push_back({q0, q2, q3});
          } else {
            m.faces.push_back({q0, q2, q1});
            m.faces.push_back({q0, q3, q2});
          }
        }
      }
    }
  }
  return m;
}

Mesh torus(int major_segments, int minor_segments, double major_radius, double minor_radius) {
  if (major_segments < 3 || minor_segments < 3) throw std::invalid_argument("torus: need >= 3 segments each way");
  Mesh m;
  m.name = "torus";
  const int nu = major_segments;
  const int nv = minor_segments;
  for (int i = 0; i < nu; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / nv;
      const double ring = major_radius + minor_radius * std::cos(phi);
      m.vertices.push_back({ring * std::cos(theta), ring * std::sin(theta), minor_radius * std::sin(phi)});
    }
  }
  auto id = [&](int i, int j) { return static_cast<VertexId>(((i % nu) * nv) + (j % nv)); };
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const VertexId a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  }
  return m;
}

Mesh flat_grid(int n) {
  if (n < 1) throw std::invalid_argument("flat_grid: resolution must be >= 1");
  Mesh m;
  m.name = "grid";
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) m.vertices.push_back({static_cast<double>(i), static_cast<double>(j), 0.0});
  }
  auto id = [&](int i, int j) { return static_cast<VertexId>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

Mesh single_triangle() {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  m.name = "triangle";
  return m;
}

Rotation random_rotation(Rng& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double u3 = uniform01(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double tau = 2.0 * std::numbers::pi;
  const double w = a * std::sin(tau * u2);
  const double x = a * std::cos(tau * u2);
  const double y = b * std::sin(tau * u3);
  const double z = b * std::cos(tau * u3);
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

Vec3 rotate(const Rotation& r, Vec3 v) {
  return {r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z, r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
          r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z};
}

Mesh transformed(const Mesh& m, const Rotation& r, double scale, Vec3 translation) {
  Mesh out = m;
  for (Vec3& v : out.vertices) v = scale * rotate(r, v) + translation;
  return out;
}

Mesh permuted_axes(const Mesh& m, const std::array<int, 3>& perm) {
  Mesh out = m;
  for (Vec3& v : out.vertices) {
    const Vec3 src = v;
    for (int k = 0; k < 3; ++k) v[k] = src[perm[k]];
  }
  return out;
}

Mesh jittered(const Mesh& m, double amplitude, Rng& rng) {
  Mesh out = m;
  for (Vec3& v : out.vertices) {
    for (int k = 0; k < 3; ++k) v[k] += uniform(rng, -amplitude, amplitude);
  }
  return out;
}

}  // namespace meshconv::shapes
