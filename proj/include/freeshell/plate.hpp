#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "freeshell/layout.hpp"
#include "freeshell/mesh.hpp"
#include "freeshell/mesh_io.hpp"

namespace freeshell
{

struct PrintRecipe {
    double connector_layer_h{0.06};
    double tile_layer_h{0.3};
    double connector_speed{100};
    double tile_speed{100};
    std::string activation{"water, 75-85 °C, >= 1 min"};
    std::string connector_fill{"concentric"};
};

struct PlateParams {
    double tile_thickness{2.4};
    double connector_thickness{0.96};
    /// <= 0 selects 0.3 * avg_edge.
    double connector_width{0};
    double clearance{0.36};
    /// Gap rate a / b above which a linkage is reported.
    double gap_rate_bound{0.14};
    PrintRecipe recipe;
};

/// Rigid map from the 3D rest triangle to its place in the plate.
struct TilePlacement {
    Vec3 origin3;
    /// Rows: in-plane axes and face normal of the 3D triangle.
    Eigen::Matrix3d frame;
    Eigen::Matrix2d rotation;
    Vec2 origin2;

    [[nodiscard]] Vec3 to_plate(const Vec3& world) const;
    [[nodiscard]] Vec3 to_world(const Vec3& plate) const;
};

/// Closed triangle mesh of one printed part.
struct Solid {
    std::string name;
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
};

/**
 * A lateral wall triangle, labelled by grid keys so the two tiles of a mesh
 * edge can be matched: key = (breakpoint index along the edge, level index).
 */
struct WallFace {
    int mesh_edge{-1};
    std::array<std::pair<int, int>, 3> keys;
    Tri vertices;
};

struct TileSolid {
    int triangle{-1};
    Solid solid;
    TilePlacement placement;
    std::vector<WallFace> walls;
    /// In-plane drift of the ruling lines across the notch band; clearance checks skip this much at each bar end.
    double notch_margin{0};
    /// Notches meet at the centroid, so the solid has genus max(0, notch_count - 1).
    int notch_count{0};
};

struct ConnectorSolid {
    int linkage{-1};
    Solid solid;
    Vec2 start;
    Vec2 end;
    double length{0};
    double width{0};
};

struct InterlockAnnotation {
    int linkage{-1};
    Vec2 midpoint;
};

struct FlatPlate {
    std::vector<TileSolid> tiles;
    std::vector<ConnectorSolid> connectors;
    std::vector<InterlockAnnotation> interlocks;
    /// Retained linkages whose gap rate exceeds gap_rate_bound.
    std::vector<int> gap_rate_violations;
    std::vector<std::string> warnings;
    PrintRecipe recipe;
    /// Ruling-line parameters bounding the notch band (0 = bottom, 1 = top).
    double s_lo{0};
    double s_hi{1};
};

/// Fill in derived defaults and validate. Throws DomainError.
PlateParams resolve_plate_params(const PlateParams& pp, double avg_edge);

/**
 * Beveled tiles: each rest triangle is thickened along its vertex normals,
 * placed on its layout triangle, and carries one connector notch per
 * retained linkage. Throws GeometryError naming the triangle when a tile
 * cannot be built.
 */
std::vector<TileSolid> generate_tiles(const Layout& layout, const TargetMesh& mesh, const PlateParams& pp,
                                      double* s_lo = nullptr, double* s_hi = nullptr);

/// One bar per retained linkage between the two tile centroids. Throws GeometryError if they coincide.
std::vector<ConnectorSolid> generate_connectors(const Layout& layout, const PlateParams& pp);

FlatPlate generate_plate(const Layout& layout, const TargetMesh& mesh, const PlateParams& pp);

PrintRecipe print_recipe(const PlateParams& pp);
std::string format_recipe(const PrintRecipe& recipe);

/// Tile vertices inside a connector's span that sit closer than the clearance.
struct ClearanceViolation {
    int linkage{-1};
    int triangle{-1};
    double perp{0};
    double z{0};
};
std::vector<ClearanceViolation> check_clearance(const FlatPlate& plate, const Layout& layout, const PlateParams& pp);

struct SolidCheck {
    bool closed{false};
    bool oriented{false};
    int euler{0};
    double volume{0};
};
SolidCheck check_solid(const Solid& solid);

struct FoldingReport {
    double max_mismatch{0};
    int matched_faces{0};
    int unmatched_faces{0};
};

/**
 * Map every tile back onto its 3D triangle and compare the lateral wall
 * faces that adjacent, non-cut tiles share.
 */
FoldingReport folding_check(const FlatPlate& plate, const Layout& layout);

void export_plate_mesh(const FlatPlate& plate, const std::filesystem::path& path, MeshFormat format);
std::string plate_obj_text(const FlatPlate& plate);

void export_layout_svg(const Layout& layout, const FlatPlate& plate, const std::filesystem::path& path);
std::string layout_svg_text(const Layout& layout, const FlatPlate& plate);

}  // namespace freeshell
