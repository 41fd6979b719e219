#include "freeshell/param.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "freeshell/error.hpp"

namespace freeshell
{

namespace
{

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

double loop_length(const TargetMesh& mesh, const std::vector<int>& loop)
{
    double len = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        len += (mesh.vertices[loop[(k + 1) % loop.size()]] - mesh.vertices[loop[k]]).norm();
    }
    return len;
}

Eigen::Matrix2d rotation_of(double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

// Best-fit rotation of the rest frame onto the current triangle.
Eigen::Matrix2d fit_rotation(const std::array<Vec2, 3>& frame, const std::array<double, 3>& w,
                             const std::array<Vec2, 3>& cur)
{
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    for (int c = 0; c < 3; ++c) {
        const int n = (c + 1) % 3;
        s += w[c] * (cur[c] - cur[n]) * (frame[c] - frame[n]).transpose();
    }
    return rotation_of(std::atan2(s(1, 0) - s(0, 1), s(0, 0) + s(1, 1)));
}

double triangle_energy(const std::array<Vec2, 3>& frame, const std::array<double, 3>& w,
                       const std::array<Vec2, 3>& cur, const Eigen::Matrix2d& r)
{
    double e = 0.0;
    for (int c = 0; c < 3; ++c) {
        const int n = (c + 1) % 3;
        e += w[c] * ((cur[c] - cur[n]) - r * (frame[c] - frame[n])).squaredNorm();
    }
    return e;
}

std::array<Vec2, 3> corners(const TargetMesh& mesh, const std::vector<Vec2>& uv, int t)
{
    const Tri& tri = mesh.triangles[t];
    return {uv[tri[0]], uv[tri[1]], uv[tri[2]]};
}

}  // namespace

std::vector<std::array<Vec2, 3>> rest_frames(const TargetMesh& mesh)
{
    std::vector<std::array<Vec2, 3>> frames(mesh.triangle_count());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        const Vec3 e01 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
        const Vec3 e02 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
        const double l01 = e01.norm();
        frames[t] = {Vec2(0.0, 0.0), Vec2(l01, 0.0), Vec2(e02.dot(e01) / l01, e01.cross(e02).norm() / l01)};
    }
    return frames;
}

std::vector<std::array<double, 3>> arap_weights(const std::vector<std::array<Vec2, 3>>& frames)
{
    std::vector<std::array<double, 3>> w(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& f = frames[t];
        for (int c = 0; c < 3; ++c) {
            const Vec2 a = f[c] - f[(c + 2) % 3];
            const Vec2 b = f[(c + 1) % 3] - f[(c + 2) % 3];
            const double cross = a.x() * b.y() - a.y() * b.x();
            const double cot = a.dot(b) / std::abs(cross);
            w[t][c] = std::max(0.5 * cot, 1e-6);
        }
    }
    return w;
}

Param2D tutte_embed(const TargetMesh& mesh)
{
    if (connected_components(mesh) != 1) {
        throw TopologyError("tutte_embed: mesh must be a single connected component");
    }
    const std::vector<std::vector<int>> loops = boundary_loops(mesh);
    if (loops.empty()) {
        throw TopologyError("tutte_embed: no boundary loop");
    }
    std::size_t outer = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < loops.size(); ++k) {
        const double len = loop_length(mesh, loops[k]);
        if (len > best) {
            best = len;
            outer = k;
        }
    }
    const std::vector<int>& loop = loops[outer];
    const double radius = best / (2.0 * std::numbers::pi);

    const int nv = static_cast<int>(mesh.vertex_count());
    Param2D param;
    param.uv.assign(nv, Vec2::Zero());
    param.frames = rest_frames(mesh);

    std::vector<int> fixed(nv, 0);
    double arc = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        const double angle = 2.0 * std::numbers::pi * arc / best;
        param.uv[loop[k]] = Vec2(radius * std::cos(angle), radius * std::sin(angle));
        fixed[loop[k]] = 1;
        arc += (mesh.vertices[loop[(k + 1) % loop.size()]] - mesh.vertices[loop[k]]).norm();
    }

    std::vector<int> free_index(nv, -1);
    int nfree = 0;
    for (int v = 0; v < nv; ++v) {
        if (!fixed[v]) {
            free_index[v] = nfree++;
        }
    }
    if (nfree == 0) {
        return param;
    }

    const EdgeAdjacency adj = build_edge_adjacency(mesh.triangles, mesh.vertex_count());
    std::vector<Triplet> trip;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nfree, 2);
    for (const MeshEdge& e : adj.edges) {
        for (const auto& [a, b] : {std::pair{e.v0, e.v1}, std::pair{e.v1, e.v0}}) {
            if (free_index[a] < 0) {
                continue;
            }
            trip.emplace_back(free_index[a], free_index[a], 1.0);
            if (free_index[b] >= 0) {
                trip.emplace_back(free_index[a], free_index[b], -1.0);
            } else {
                rhs.row(free_index[a]) += param.uv[b].transpose();
            }
        }
    }
    SpMat lap(nfree, nfree);
    lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat> solver(lap);
    if (solver.info() != Eigen::Success) {
        throw SolveError("tutte_embed: Laplacian factorization failed");
    }
    const Eigen::MatrixXd sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !sol.allFinite()) {
        throw SolveError("tutte_embed: Laplacian solve failed");
    }
    for (int v = 0; v < nv; ++v) {
        if (free_index[v] >= 0) {
            param.uv[v] = sol.row(free_index[v]).transpose();
        }
    }
    return param;
}

double arap_energy(const TargetMesh& mesh, const Param2D& param)
{
    const auto w = arap_weights(param.frames);
    double e = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto cur = corners(mesh, param.uv, static_cast<int>(t));
        e += triangle_energy(param.frames[t], w[t], cur, fit_rotation(param.frames[t], w[t], cur));
    }
    return e;
}

Param2D arap_parameterize(const TargetMesh& mesh, const Param2D& init, const ArapOptions& opts,
                          std::vector<double>* history)
{
    if (opts.max_iters < 1) {
        throw DomainError("arap_parameterize: max_iters must be at least 1");
    }
    if (init.uv.size() != mesh.vertex_count() || init.frames.size() != mesh.triangle_count()) {
        throw DomainError("arap_parameterize: init does not cover the mesh");
    }
    const int nv = static_cast<int>(mesh.vertex_count());
    const int nt = static_cast<int>(mesh.triangle_count());
    Param2D param = init;
    const auto w = arap_weights(param.frames);

    // Vertex 0 is pinned; the remaining vertices are unknowns 0..nv-2.
    auto unknown = [](int v) { return v - 1; };
    std::vector<Triplet> trip;
    for (int t = 0; t < nt; ++t) {
        const Tri& tri = mesh.triangles[t];
        for (int c = 0; c < 3; ++c) {
            const int a = tri[c];
            const int b = tri[(c + 1) % 3];
            for (const auto& [p, q] : {std::pair{a, b}, std::pair{b, a}}) {
                if (p == 0) {
                    continue;
                }
                trip.emplace_back(unknown(p), unknown(p), w[t][c]);
                if (q != 0) {
                    trip.emplace_back(unknown(p), unknown(q), -w[t][c]);
                }
            }
        }
    }
    if (nv == 1) {
        return param;
    }
    SpMat sys(nv - 1, nv - 1);
    sys.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat> solver(sys);
    if (solver.info() != Eigen::Success) {
        throw SolveError("arap_parameterize: factorization failed");
    }

    std::vector<Eigen::Matrix2d> rot(nt);
    auto local_step = [&]() {
        std::vector<double> per_tri(nt);
#pragma omp parallel for schedule(static)
        for (int t = 0; t < nt; ++t) {
            const auto cur = corners(mesh, param.uv, t);
            rot[t] = fit_rotation(param.frames[t], w[t], cur);
            per_tri[t] = triangle_energy(param.frames[t], w[t], cur, rot[t]);
        }
        double e = 0.0;
        for (double x : per_tri) {
            e += x;
        }
        if (!std::isfinite(e)) {
            throw NonFiniteError("arap_parameterize: energy is not finite");
        }
        return e;
    };

    double energy = local_step();
    if (history) {
        history->assign(1, energy);
    }
    for (int it = 0; it < opts.max_iters; ++it) {
        // Right-hand side in fixed triangle/corner order.
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv - 1, 2);
        for (int t = 0; t < nt; ++t) {
            const Tri& tri = mesh.triangles[t];
            for (int c = 0; c < 3; ++c) {
                const int n = (c + 1) % 3;
                const Vec2 re = w[t][c] * (rot[t] * (param.frames[t][c] - param.frames[t][n]));
                const int a = tri[c];
                const int b = tri[n];
                if (a != 0) {
                    rhs.row(unknown(a)) += re.transpose();
                    if (b == 0) {
                        rhs.row(unknown(a)) += w[t][c] * param.uv[0].transpose();
                    }
                }
                if (b != 0) {
                    rhs.row(unknown(b)) -= re.transpose();
                    if (a == 0) {
                        rhs.row(unknown(b)) += w[t][c] * param.uv[0].transpose();
                    }
                }
            }
        }
        const Eigen::MatrixXd sol = solver.solve(rhs);
        if (solver.info() != Eigen::Success) {
            throw SolveError("arap_parameterize: solve failed");
        }
        for (int v = 1; v < nv; ++v) {
            param.uv[v] = sol.row(unknown(v)).transpose();
        }
        const double next = local_step();
        if (history) {
            history->push_back(next);
        }
        const double decrease = energy - next;
        energy = next;
        if (energy <= 1e-300 || decrease <= opts.tol * std::max(energy + decrease, 1e-300)) {
            break;
        }
    }
    return param;
}

}  // namespace freeshell
