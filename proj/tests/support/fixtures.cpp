#include "fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace freeshell::fixtures
{

namespace
{

/// Flip triangles whose normal points toward the origin.
void orient_outward(const std::vector<Vec3>& verts, std::vector<Tri>& tris)
{
    for (Tri& t : tris) {
        const Vec3 n = (verts[t[1]] - verts[t[0]]).cross(verts[t[2]] - verts[t[0]]);
        const Vec3 c = (verts[t[0]] + verts[t[1]] + verts[t[2]]) / 3.0;
        if (n.dot(c) < 0.0) {
            std::swap(t[1], t[2]);
        }
    }
}

}  // namespace

TargetMesh flat_square(double side)
{
    std::vector<Vec3> v{{0, 0, 0}, {side, 0, 0}, {side, side, 0}, {0, side, 0}};
    return make_target_mesh(std::move(v), {{0, 1, 2}, {0, 2, 3}});
}

TargetMesh cone_cap(double side)
{
    const double r = side / std::sqrt(3.0);
    const double h = side * std::sqrt(2.0 / 3.0);
    std::vector<Vec3> v{{0, 0, h}};
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0;
        v.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
    return make_target_mesh(std::move(v), {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}});
}

TargetMesh hemisphere(double radius)
{
    const std::vector<int> counts{6, 12, 18, 23, 25};
    std::vector<Vec3> verts{{0, 0, radius}};
    std::vector<std::vector<int>> rings;
    std::vector<std::vector<double>> angles;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double polar = (18.0 * (k + 1)) * std::numbers::pi / 180.0;
        const double phase = (k % 2) * std::numbers::pi / counts[k];
        std::vector<int> ring;
        std::vector<double> ang;
        for (int n = 0; n < counts[k]; ++n) {
            const double az = phase + 2.0 * std::numbers::pi * n / counts[k];
            ring.push_back(static_cast<int>(verts.size()));
            ang.push_back(az);
            verts.emplace_back(radius * std::sin(polar) * std::cos(az), radius * std::sin(polar) * std::sin(az),
                               radius * std::cos(polar));
        }
        rings.push_back(std::move(ring));
        angles.push_back(std::move(ang));
    }
    std::vector<Tri> tris;
    for (int n = 0; n < counts[0]; ++n) {
        tris.push_back({0, rings[0][n], rings[0][(n + 1) % counts[0]]});
    }
    // Zip neighbouring rings by always advancing the side with the smaller next angle.
    for (std::size_t k = 0; k + 1 < rings.size(); ++k) {
        const auto& up = rings[k];
        const auto& lo = rings[k + 1];
        const int nu = static_cast<int>(up.size());
        const int nl = static_cast<int>(lo.size());
        auto unwrap = [](const std::vector<double>& a, int idx) {
            const int n = static_cast<int>(a.size());
            return a[idx % n] + 2.0 * std::numbers::pi * (idx / n);
        };
        int iu = 0;
        int il = 0;
        while (iu < nu || il < nl) {
            const double next_u = iu < nu ? unwrap(angles[k], iu + 1) : 1e9;
            const double next_l = il < nl ? unwrap(angles[k + 1], il + 1) : 1e9;
            if (next_u <= next_l) {
                tris.push_back({up[iu % nu], lo[il % nl], up[(iu + 1) % nu]});
                ++iu;
            } else {
                tris.push_back({up[iu % nu], lo[il % nl], lo[(il + 1) % nl]});
                ++il;
            }
        }
    }
    orient_outward(verts, tris);
    return make_target_mesh(std::move(verts), std::move(tris));
}

TargetMesh square_grid(int nx, int ny, double spacing)
{
    std::vector<Vec3> v;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            v.emplace_back(i * spacing, j * spacing, 0.0);
        }
    }
    std::vector<Tri> t;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return make_target_mesh(std::move(v), std::move(t));
}

TargetMesh equilateral_grid(int nx, int ny, double spacing)
{
    const double h = spacing * std::sqrt(3.0) / 2.0;
    std::vector<Vec3> v;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            v.emplace_back(i * spacing + (j % 2) * 0.5 * spacing, j * h, 0.0);
        }
    }
    std::vector<Tri> t;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (j % 2 == 0) {
                t.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                t.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
                t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            }
        }
    }
    return make_target_mesh(std::move(v), std::move(t));
}

TargetMesh random_surface(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(2, 4);
    std::uniform_real_distribution<double> curv(-0.04, 0.04);
    std::uniform_real_distribution<double> jitter(-0.15, 0.15);
    const int nx = size(rng);
    const int ny = size(rng);
    const double spacing = 10.0;
    const double a = curv(rng);
    const double b = curv(rng);
    std::vector<Vec3> v;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const double x = (i + jitter(rng)) * spacing - 0.5 * nx * spacing;
            const double y = (j + jitter(rng)) * spacing - 0.5 * ny * spacing;
            v.emplace_back(x, y, a * x * x + b * y * y);
        }
    }
    std::vector<Tri> t;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if ((i + j) % 2 == 0) {
                t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                t.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                t.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    }
    return make_target_mesh(std::move(v), std::move(t));
}

Layout planar_layout(const TargetMesh& mesh)
{
    Param2D p;
    for (const Vec3& x : mesh.vertices) {
        p.uv.emplace_back(x.x(), x.y());
    }
    return explode_mesh(mesh, p);
}

}  // namespace freeshell::fixtures
