#pragma once

#include <vector>

#include "freeshell/verify.hpp"

namespace freeshell::reference
{

/// Brute force over every triangle, one point at a time.
DistanceResult distance_serial(const std::vector<Vec3>& points, const TargetMesh& mesh);

}  // namespace freeshell::reference
