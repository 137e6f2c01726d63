// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#ifndef NOCSPOSE_ERRORS_HPP
#define NOCSPOSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nocspose {

/// Base class for all nocspose failures.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Projection requested for a point at or behind the camera plane (z <= 0).
struct NonPositiveDepth : Error {
  explicit NonPositiveDepth(const std::string& what) : Error(what) {}
};

/// Mesh has no vertices (or no attribute data where required).
struct EmptyMesh : Error {
  explicit EmptyMesh(const std::string& what) : Error(what) {}
};

/// PnP input cannot determine a pose: too few points or a rank-deficient
/// linear system with no initial guess.
struct DegenerateConfiguration : Error {
  explicit DegenerateConfiguration(const std::string& what) : Error(what) {}
};

/// Best RANSAC hypothesis fell below the minimum inlier ratio.
struct InsufficientInliers : Error {
  explicit InsufficientInliers(const std::string& what) : Error(what) {}
};

/// Image or buffer dimensions do not agree.
struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& what) : Error(what) {}
};

/// Refinement initialization renders with zero coverage.
struct MeshNotVisible : Error {
  explicit MeshNotVisible(const std::string& what) : Error(what) {}
};

/// Expert selection called with no candidates.
struct EmptyCandidates : Error {
  explicit EmptyCandidates(const std::string& what) : Error(what) {}
};

/// Paired lists have different lengths.
struct LengthMismatch : Error {
  explicit LengthMismatch(const std::string& what) : Error(what) {}
};

/// First predicted translation has zero norm; scale normalization undefined.
struct ZeroFirstTranslation : Error {
  explicit ZeroFirstTranslation(const std::string& what) : Error(what) {}
};

/// Point cloud too small for registration.
struct TooFewPoints : Error {
  explicit TooFewPoints(const std::string& what) : Error(what) {}
};

/// Procedural scene specification is malformed.
struct InvalidSpec : Error {
  explicit InvalidSpec(const std::string& what) : Error(what) {}
};

/// File or stream could not be read or written.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace nocspose

#endif  // NOCSPOSE_ERRORS_HPP
