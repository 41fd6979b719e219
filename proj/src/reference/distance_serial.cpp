#include "freeshell/reference/distance_serial.hpp"

#include <cmath>
#include <limits>

#include "freeshell/geometry.hpp"

namespace freeshell::reference
{

DistanceResult distance_serial(const std::vector<Vec3>& points, const TargetMesh& mesh)
{
    DistanceResult out;
    out.per_point.resize(points.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const Tri& t : mesh.triangles) {
            const ClosestPoint cp =
                closest_point_on_triangle(points[i], mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
            best = std::min(best, cp.sq_dist);
        }
        out.per_point[i] = std::sqrt(best);
        sum += out.per_point[i];
        out.max = std::max(out.max, out.per_point[i]);
    }
    out.avg = points.empty() ? 0.0 : sum / static_cast<double>(points.size());
    return out;
}

}  // namespace freeshell::reference
