#include "freeshell/reference/overlap_serial.hpp"

#include "freeshell/geometry.hpp"

namespace freeshell::reference
{

int overlap_pairs_serial(const Layout& layout)
{
    const int nt = layout.triangle_count();
    int count = 0;
    for (int a = 0; a < nt; ++a) {
        const std::array<Vec2, 3> ta{layout.corners[3 * a], layout.corners[3 * a + 1], layout.corners[3 * a + 2]};
        for (int b = a + 1; b < nt; ++b) {
            const std::array<Vec2, 3> tb{layout.corners[3 * b], layout.corners[3 * b + 1], layout.corners[3 * b + 2]};
            count += triangles_overlap_2d(ta, tb) ? 1 : 0;
        }
    }
    return count;
}

}  // namespace freeshell::reference
