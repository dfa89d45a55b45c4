#pragma once

#include <array>

#include "meshconv/mesh.hpp"
#include "meshconv/rng.hpp"

namespace meshconv::shapes {

/// Regular tetrahedron with all squared edge lengths exactly 8.
Mesh tetrahedron();

/// Icosahedron on the unit sphere, 12 vertices / 20 faces, outward winding.
Mesh icosahedron();

/// Geodesic sphere: every icosahedron face split into frequency^2 triangles
/// and projected to the unit sphere (20 * frequency^2 faces).
Mesh icosphere(int frequency);

/// Axis-aligned box with each side tiled by an n x n quad grid
/// (12 * n^2 faces). Half extents default to 1.
Mesh box(int n, Vec3 half_extents = {1.0, 1.0, 1.0});

/// Torus around the z axis with `major_segments` x `minor_segments` quads
/// (2 * major * minor faces).
Mesh torus(int major_segments, int minor_segments, double major_radius = 1.0, double minor_radius = 0.4);

/// Open square in the z = 0 plane tiled by n x n quads, winding towards +z.
Mesh flat_grid(int n);

Mesh single_triangle();

/// Row-major 3x3 rotation.
using Rotation = std::array<std::array<double, 3>, 3>;

/// Uniform random rotation from a uniform unit quaternion (Shoemake's method).
Rotation random_rotation(Rng& rng);

Vec3 rotate(const Rotation& r, Vec3 v);

/// v -> scale * R v + translation, applied to every vertex.
Mesh transformed(const Mesh& m, const Rotation& r, double scale, Vec3 translation);

/// Swap/permute coordinate axes: output component k = input component perm[k].
Mesh permuted_axes(const Mesh& m, const std::array<int, 3>& perm);

/// Offset each coordinate by uniform noise in [-amplitude, amplitude].
Mesh jittered(const Mesh& m, double amplitude, Rng& rng);

}  // namespace meshconv::shapes
