#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "freeshell/energy.hpp"
#include "freeshell/layout.hpp"
#include "freeshell/mesh.hpp"
#include "freeshell/plate.hpp"

namespace freeshell
{

inline constexpr int kGapHistogramBins = 20;

struct LayoutReport {
    double max_gap{0};
    double avg_gap{0};
    /// Retained gaps binned uniformly over [0, max_gap].
    std::array<int, kGapHistogramBins> gap_histogram{};
    double max_edge_distortion{0};
    /// Largest deviation of a retained linkage quad's interior angle from 90 degrees.
    double max_shear_deg{0};
    int overlap_pairs{0};
    int cut_count{0};
    int retained_count{0};
    bool connected{false};
};

LayoutReport layout_metrics(const Layout& layout, const EnergyParams& p);

/// Triangle pairs of the layout whose interiors overlap, found through a uniform grid.
int count_overlap_pairs(const Layout& layout);

/// Interior angles of the quad (i, j, k, m) in degrees; empty when a side has zero length.
std::vector<double> linkage_quad_angles(const Layout& layout, const Linkage& l);

struct DistanceResult {
    double avg{0};
    double max{0};
    std::vector<double> per_point;
};

/// Distance from every point to the nearest mesh triangle. Parallel over points; identical to the serial oracle.
DistanceResult point_to_mesh_distance(const std::vector<Vec3>& points, const TargetMesh& mesh);

/**
 * Points sampled uniformly on the folded tiles' mid-surface (each tile
 * mapped back to its 3D triangle), jittered along the face normal by a
 * Gaussian with standard deviation sigma.
 */
std::vector<Vec3> synthetic_scan(const FlatPlate& plate, const TargetMesh& mesh, int points_per_tile, double sigma,
                                 std::uint64_t seed);

std::vector<Vec3> read_xyz(const std::filesystem::path& path);
void write_xyz(const std::vector<Vec3>& points, const std::filesystem::path& path);

std::string report_text(const LayoutReport& report);
std::string report_text(const DistanceResult& result);
void write_report(const LayoutReport& report, const std::filesystem::path& path);
void write_report(const DistanceResult& result, const std::filesystem::path& path);

}  // namespace freeshell
