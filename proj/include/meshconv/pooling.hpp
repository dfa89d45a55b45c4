#pragma once

#include <array>
#include <vector>

#include "meshconv/adjacency.hpp"
#include "meshconv/features.hpp"
#include "meshconv/mesh.hpp"

namespace meshconv {

/// Which selected regions block a candidate.
enum class ConflictRule {
  /// A candidate is blocked when its center shares a vertex with a selected
  /// center, or its removed faces overlap a selected region's removed faces.
  /// Everything else is left to the sequential manifold check.
  kCenterDisjoint,
  /// A candidate is blocked when one of its removed faces touches a selected
  /// center's vertices, or one of its vertices touches a selected removed
  /// face. Ring faces may be shared between regions.
  kRemovedSet,
  /// A candidate is blocked when its vertex one-ring shares any face with a
  /// selected region's one-ring.
  kFullRegion,
};

/// Which removed faces a surviving ring face averages with.
enum class AveragingMode {
  kSharedVertex,  ///< removed faces of its region(s) sharing a vertex with it
  kWholeRegion,   ///< every removed face of its region(s)
};

struct PoolOptions {
  ConflictRule conflict = ConflictRule::kCenterDisjoint;
  AveragingMode averaging = AveragingMode::kSharedVertex;
  int threads = 1;
  /// Visit regions last-to-first in apply_pass; the result is identical.
  bool reverse_region_order = false;
};

/// Per-face saliency: sum over edge neighbors of the squared feature distance.
/// Neighbors are visited in ascending id and channels in order, so the value
/// is fixed bit for bit.
struct PoolWeights {
  std::vector<double> weights;
};

PoolWeights compute_face_weights(const FeatureMatrix& features, const AdjacencyMatrix& adj);

/// One face collapse. The center's three vertices merge at its centroid;
/// the center and its three edge neighbors disappear.
struct PoolRegion {
  FaceId center = kNone;
  std::array<FaceId, 4> removed{};          ///< center, then neighbors in slot order
  std::vector<FaceId> ring;                 ///< surviving faces sharing a vertex with the center, ascending
  std::array<VertexId, 3> old_vertices{};  ///< center face vertices
  Vec3 merged_vertex;
};

/// Which old faces feed each surviving face; the face's own old id first.
struct Provenance {
  std::size_t input_faces = 0;
  std::vector<std::vector<FaceId>> sources;

  std::size_t output_faces() const { return sources.size(); }
};

struct PoolPlan {
  std::vector<PoolRegion> regions;
  std::vector<FaceId> face_remap;      ///< old face -> new face, kNone when removed
  std::vector<VertexId> vertex_remap;  ///< old vertex -> new vertex
  std::size_t input_vertices = 0;
  std::size_t output_vertices = 0;
  Provenance provenance;

  std::size_t input_faces() const { return provenance.input_faces; }
  std::size_t output_faces() const { return provenance.output_faces(); }
  bool empty() const { return regions.empty(); }
};

/// Greedy selection: faces are visited in ascending (weight, id); a face is
/// selected when it is not blocked by an earlier selection and its collapse,
/// on top of the earlier ones, keeps the mesh a closed oriented manifold with
/// non-degenerate faces and at least 4 faces per component. Selection stops
/// once the projected face count is <= target.
/// Throws std::invalid_argument when target < 4 or the weights do not match.
PoolPlan plan_pass(const Mesh& m, const AdjacencyMatrix& adj, const PoolWeights& weights, std::size_t target,
                   const PoolOptions& options = {});

/// Identity plan (no regions) for a mesh.
PoolPlan identity_plan(const Mesh& m);

struct PooledMesh {
  Mesh mesh;
  AdjacencyMatrix adjacency;
  FeatureMatrix features;
  std::vector<PoolPlan> passes;
  bool stalled = false;

  std::size_t pass_count() const { return passes.size(); }
};

/// Collapse every region of the plan at once. The adjacency is updated
/// incrementally (only ring rows are recomputed); ring features become the
/// mean of their provenance rows. Throws std::invalid_argument when the plan
/// was built for a different mesh.
PooledMesh apply_pass(const Mesh& m, const AdjacencyMatrix& adj, const FeatureMatrix& features, const PoolPlan& plan,
                      const PoolOptions& options = {});

/// Repeat weights -> plan -> apply until the face count is <= target, or a
/// pass selects nothing (stalled = true).
PooledMesh pool_to_target(const Mesh& m, const AdjacencyMatrix& adj, const FeatureMatrix& features,
                          std::size_t target, const PoolOptions& options = {});

/// Re-run recorded passes on new features with the selection held fixed.
PooledMesh replay_passes(const Mesh& m, const AdjacencyMatrix& adj, const FeatureMatrix& features,
                         const std::vector<PoolPlan>& passes, const PoolOptions& options = {});

/// Adjoint of the averaging step. Throws std::invalid_argument on a shape
/// mismatch.
FeatureMatrix pooling_backward(const Provenance& provenance, const FeatureMatrix& grad_out);

/// Chains pooling_backward through passes in reverse.
FeatureMatrix pooling_backward(const std::vector<PoolPlan>& passes, const FeatureMatrix& grad_out);

}  // namespace meshconv
