#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "fixtures.hpp"
#include "freeshell/error.hpp"
#include "freeshell/flatten.hpp"
#include "freeshell/plate.hpp"

using namespace freeshell;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "freeshell_test_plate";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Vec3 face_normal_of(const Solid& s, const Tri& t)
{
    return (s.vertices[t[1]] - s.vertices[t[0]]).cross(s.vertices[t[2]] - s.vertices[t[0]]).normalized();
}

// Two triangles hinged on the x axis, folded so their normals differ by beta.
TargetMesh hinge(double beta)
{
    return make_target_mesh({{0, 0, 0}, {10, 0, 0}, {5, 8, 0}, {5, -8 * std::cos(beta), 8 * std::sin(beta)}},
                            {{0, 1, 2}, {1, 0, 3}});
}

void expect_valid_solids(const FlatPlate& plate, bool check_genus = true)
{
    for (const TileSolid& t : plate.tiles) {
        const SolidCheck c = check_solid(t.solid);
        EXPECT_TRUE(c.closed) << t.solid.name;
        EXPECT_TRUE(c.oriented) << t.solid.name;
        EXPECT_GT(c.volume, 0.0) << t.solid.name;
        if (check_genus) {
            EXPECT_EQ(c.euler, 2 - 2 * std::max(0, t.notch_count - 1)) << t.solid.name;
        }
    }
    for (const ConnectorSolid& s : plate.connectors) {
        const SolidCheck c = check_solid(s.solid);
        EXPECT_TRUE(c.closed && c.oriented);
        EXPECT_EQ(c.euler, 2);
        EXPECT_NEAR(c.volume, s.length * s.width * 0.96, 1e-9 * s.length);
    }
}

}  // namespace

TEST(Tiles, FlatSquareIsStraightPrisms)
{
    const TargetMesh mesh = fixtures::flat_square();
    const Layout layout = fixtures::planar_layout(mesh);
    const PlateParams pp;
    const auto tiles = generate_tiles(layout, mesh, pp);
    ASSERT_EQ(tiles.size(), 2u);
    for (const TileSolid& t : tiles) {
        for (const WallFace& w : t.walls) {
            EXPECT_NEAR(face_normal_of(t.solid, w.vertices).z(), 0.0, 1e-12);
        }
        double zmin = 1e9;
        double zmax = -1e9;
        for (const Vec3& v : t.solid.vertices) {
            zmin = std::min(zmin, v.z());
            zmax = std::max(zmax, v.z());
        }
        EXPECT_NEAR(zmin, -1.2, 1e-12);
        EXPECT_NEAR(zmax, 1.2, 1e-12);
    }
}

TEST(Tiles, PrismVolumeMinusNotch)
{
    const TargetMesh mesh = fixtures::flat_square();
    const Layout layout = fixtures::planar_layout(mesh);
    PlateParams pp;
    const PlateParams resolved = resolve_plate_params(pp, layout.avg_edge);
    const auto tiles = generate_tiles(layout, mesh, pp);
    // The notch runs from the centroid to the diagonal, perpendicular to it.
    const double depth = 10.0 / (3.0 * std::sqrt(2.0));
    const double width = resolved.connector_width + 2.0 * resolved.clearance;
    const double height = resolved.connector_thickness + 2.0 * resolved.clearance;
    const double expected = 50.0 * resolved.tile_thickness - width * depth * height;
    for (const TileSolid& t : tiles) {
        EXPECT_NEAR(check_solid(t.solid).volume, expected, 1e-9);
    }
}

TEST(Tiles, SingleTriangleWithoutNotch)
{
    const TargetMesh mesh = make_target_mesh({{0, 0, 0}, {10, 0, 0}, {0, 10, 0}}, {{0, 1, 2}});
    const Layout layout = fixtures::planar_layout(mesh);
    const auto tiles = generate_tiles(layout, mesh, {});
    ASSERT_EQ(tiles.size(), 1u);
    const SolidCheck c = check_solid(tiles[0].solid);
    EXPECT_GE(tiles[0].solid.vertices.size(), 8u);
    EXPECT_EQ(c.euler, 2);
    EXPECT_NEAR(c.volume, 50.0 * 2.4, 1e-9);
}

TEST(Tiles, WallsTiltByHalfTheFold)
{
    for (double beta : {0.3, 0.6, 1.0}) {
        const TargetMesh mesh = hinge(beta);
        const FlattenResult r = run_discrete_flattening(mesh, {});
        const auto tiles = generate_tiles(r.layout, mesh, {});
        const int shared = r.layout.linkages.at(0).mesh_edge;
        int checked = 0;
        for (const TileSolid& t : tiles) {
            for (const WallFace& w : t.walls) {
                if (w.mesh_edge != shared) {
                    continue;
                }
                const Vec3 n = face_normal_of(t.solid, w.vertices);
                EXPECT_NEAR(std::asin(std::abs(n.z())), beta / 2.0, 1e-6);
                ++checked;
            }
        }
        EXPECT_GT(checked, 0);
    }
}

TEST(Tiles, TooThinForNotchIsGeometryError)
{
    const TargetMesh mesh = fixtures::flat_square();
    const Layout layout = fixtures::planar_layout(mesh);
    PlateParams pp;
    pp.tile_thickness = 1.0;
    EXPECT_THROW(generate_tiles(layout, mesh, pp), GeometryError);
}

TEST(Tiles, FlippedLayoutTriangleIsGeometryError)
{
    const TargetMesh mesh = fixtures::flat_square();
    Layout layout = fixtures::planar_layout(mesh);
    std::swap(layout.corners[1], layout.corners[2]);
    try {
        generate_tiles(layout, mesh, {});
        FAIL() << "expected GeometryError";
    } catch (const GeometryError& e) {
        EXPECT_NE(std::string(e.what()).find("triangle 0"), std::string::npos);
    }
}

TEST(Connectors, TwoTriangleSquare)
{
    const TargetMesh mesh = fixtures::flat_square();
    const FlattenResult r = run_discrete_flattening(mesh, {});
    const auto conns = generate_connectors(r.layout, {});
    ASSERT_EQ(conns.size(), 1u);
    const Linkage& l = r.layout.linkages[0];
    const Vec2 ca = triangle_centroid(r.layout, l.tri_a);
    const Vec2 cb = triangle_centroid(r.layout, l.tri_b);
    EXPECT_NEAR(conns[0].length, (cb - ca).norm(), 1e-12);
    const Vec2 axis = (conns[0].end - conns[0].start).normalized();
    EXPECT_NEAR((axis - (cb - ca).normalized()).norm(), 0.0, 1e-12);
    EXPECT_NEAR(conns[0].width, 0.3 * r.layout.avg_edge, 1e-12);

    // Gap rate a / b; the bound check flags it when above 0.14.
    const double rate = gap_value(r.layout, l) / conns[0].length;
    PlateParams pp;
    pp.gap_rate_bound = rate * 1.01;
    EXPECT_TRUE(generate_plate(r.layout, mesh, pp).gap_rate_violations.empty());
    pp.gap_rate_bound = rate * 0.99;
    const FlatPlate plate = generate_plate(r.layout, mesh, pp);
    EXPECT_EQ(plate.gap_rate_violations, std::vector<int>{0});
    EXPECT_FALSE(plate.warnings.empty());
}

TEST(Connectors, CutLinkageGetsInterlock)
{
    const TargetMesh mesh = fixtures::flat_square();
    Layout layout = fixtures::planar_layout(mesh);
    for (int k = 3; k < 6; ++k) {
        layout.corners[k] += Vec2(-1.0, 1.0);
    }
    layout.linkages[0].state = LinkageState::cut;
    const FlatPlate plate = generate_plate(layout, mesh, {});
    EXPECT_TRUE(plate.connectors.empty());
    ASSERT_EQ(plate.interlocks.size(), 1u);
    EXPECT_EQ(plate.interlocks[0].linkage, 0);
    const Linkage& l = layout.linkages[0];
    const Vec2 mid = (layout.corners[l.i] + layout.corners[l.j] + layout.corners[l.k] + layout.corners[l.m]) / 4.0;
    EXPECT_NEAR((plate.interlocks[0].midpoint - mid).norm(), 0.0, 1e-12);
    for (const TileSolid& t : plate.tiles) {
        EXPECT_EQ(t.notch_count, 0);
    }
}

TEST(Connectors, CoincidentCentroidsAreGeometryError)
{
    const TargetMesh mesh = fixtures::flat_square();
    Layout layout = fixtures::planar_layout(mesh);
    layout.corners[3] = layout.corners[0];
    layout.corners[4] = layout.corners[1];
    layout.corners[5] = layout.corners[2];
    EXPECT_THROW(generate_connectors(layout, {}), GeometryError);
}

TEST(Plate, FixturesAreValidFoldAndClear)
{
    struct Case {
        const char* name;
        TargetMesh mesh;
        double thickness;
        bool simple_notches;
    };
    // The cone's apex normal is 70.5 degrees off each face, which leaves a
    // third of the tile thickness around the notch there. Its notches widen
    // past the other tile edges, so the genus formula does not apply.
    std::vector<Case> cases;
    cases.push_back({"square", fixtures::flat_square(), 2.4, true});
    cases.push_back({"cone", fixtures::cone_cap(), 6.0, false});
    cases.push_back({"hemisphere", fixtures::hemisphere(), 2.4, true});
    cases.push_back({"random", fixtures::random_surface(3), 2.4, true});
    for (const Case& c : cases) {
        SCOPED_TRACE(c.name);
        const FlattenResult r = run_discrete_flattening(c.mesh, {});
        PlateParams pp;
        pp.tile_thickness = c.thickness;
        const FlatPlate plate = generate_plate(r.layout, c.mesh, pp);
        EXPECT_EQ(plate.tiles.size(), c.mesh.triangle_count());
        EXPECT_EQ(plate.connectors.size() + plate.interlocks.size(), r.layout.linkages.size());
        expect_valid_solids(plate, c.simple_notches);
        const FoldingReport fold = folding_check(plate, r.layout);
        EXPECT_LT(fold.max_mismatch, 1e-6);
        EXPECT_EQ(fold.unmatched_faces, 0);
        if (!plate.connectors.empty()) {
            EXPECT_GT(fold.matched_faces, 0);
        }
        EXPECT_TRUE(check_clearance(plate, r.layout, pp).empty());
    }
}

TEST(Plate, ThinConeIsGeometryError)
{
    const TargetMesh mesh = fixtures::cone_cap();
    const FlattenResult r = run_discrete_flattening(mesh, {});
    EXPECT_THROW(generate_plate(r.layout, mesh, {}), GeometryError);
}

TEST(Plate, ClearanceCheckCatchesOversizedBar)
{
    const TargetMesh mesh = fixtures::flat_square();
    const FlattenResult r = run_discrete_flattening(mesh, {});
    const PlateParams pp;
    FlatPlate plate = generate_plate(r.layout, mesh, pp);
    ASSERT_TRUE(check_clearance(plate, r.layout, pp).empty());
    PlateParams wide = pp;
    wide.connector_width = 0.3 * r.layout.avg_edge + 2.0;
    EXPECT_FALSE(check_clearance(plate, r.layout, wide).empty());
}

TEST(Export, ObjGroupsAndStlFacets)
{
    const TargetMesh mesh = fixtures::hemisphere();
    const FlattenResult r = run_discrete_flattening(mesh, {});
    const FlatPlate plate = generate_plate(r.layout, mesh, {});
    const fs::path obj = scratch("plate.obj");
    const fs::path stl = scratch("plate.stl");
    export_plate_mesh(plate, obj, MeshFormat::OBJ);
    export_plate_mesh(plate, stl, MeshFormat::STL);
    std::istringstream in(slurp(obj));
    std::string line;
    int groups = 0;
    while (std::getline(in, line)) {
        groups += line.rfind("g ", 0) == 0;
    }
    EXPECT_EQ(groups, static_cast<int>(plate.tiles.size() + plate.connectors.size()));
    std::size_t facets = 0;
    for (const TileSolid& t : plate.tiles) {
        facets += t.solid.triangles.size();
    }
    for (const ConnectorSolid& c : plate.connectors) {
        facets += c.solid.triangles.size();
    }
    const std::string data = slurp(stl);
    std::uint32_t count = 0;
    std::memcpy(&count, data.data() + 80, 4);
    EXPECT_EQ(count, facets);
    EXPECT_EQ(data.size(), 84 + 50 * facets);
}

TEST(Export, SvgElementsAndDeterminism)
{
    const TargetMesh mesh = fixtures::flat_square();
    const FlattenResult r = run_discrete_flattening(mesh, {});
    const FlatPlate plate = generate_plate(r.layout, mesh, {});
    const fs::path a = scratch("a.svg");
    const fs::path b = scratch("b.svg");
    export_layout_svg(r.layout, plate, a);
    export_layout_svg(r.layout, generate_plate(r.layout, mesh, {}), b);
    const std::string svg = slurp(a);
    EXPECT_EQ(svg, slurp(b));

    auto count = [&](const std::string& needle) {
        std::size_t n = 0;
        for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) {
            ++n;
        }
        return n;
    };
    EXPECT_EQ(count("<path "), 2u);
    EXPECT_EQ(count("<rect "), 1u);

    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex("viewBox=\"0 0 ([0-9.]+) ([0-9.]+)\"")));
    const double w = std::stod(m[1]);
    const double h = std::stod(m[2]);
    const std::regex coord("(x1|x2|cx|y1|y2|cy)=\"(-?[0-9.]+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), coord); it != std::sregex_iterator(); ++it) {
        const double v = std::stod((*it)[2]);
        const double limit = (*it)[1].str()[0] == 'x' || (*it)[1] == "cx" ? w : h;
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, limit);
    }
    const std::regex path_pts("[ML] (-?[0-9.]+) (-?[0-9.]+)");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), path_pts); it != std::sregex_iterator(); ++it) {
        EXPECT_GE(std::stod((*it)[1]), 0.0);
        EXPECT_LE(std::stod((*it)[1]), w);
        EXPECT_GE(std::stod((*it)[2]), 0.0);
        EXPECT_LE(std::stod((*it)[2]), h);
    }
}

TEST(Export, SvgMarksCutSeams)
{
    const TargetMesh mesh = fixtures::flat_square();
    Layout layout = fixtures::planar_layout(mesh);
    for (int k = 3; k < 6; ++k) {
        layout.corners[k] += Vec2(-1.0, 1.0);
    }
    layout.linkages[0].state = LinkageState::cut;
    const std::string svg = layout_svg_text(layout, generate_plate(layout, mesh, {}));
    EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
    EXPECT_NE(svg.find("interlock_0"), std::string::npos);
    EXPECT_EQ(svg.find("<rect "), std::string::npos);
}

TEST(Recipe, Defaults)
{
    const PrintRecipe r = print_recipe({});
    EXPECT_EQ(r.connector_layer_h, 0.06);
    EXPECT_EQ(r.tile_layer_h, 0.3);
    EXPECT_EQ(r.connector_speed, 100.0);
    EXPECT_EQ(r.tile_speed, 100.0);
    const std::string text = format_recipe(r);
    EXPECT_NE(text.find("connector_layer_h = 0.06\n"), std::string::npos);
    EXPECT_NE(text.find("tile_layer_h = 0.3\n"), std::string::npos);
    EXPECT_NE(text.find("activation = "), std::string::npos);
}

TEST(Recipe, TileSpeedOverride)
{
    PlateParams pp;
    pp.recipe.tile_speed = 150;
    const std::string text = format_recipe(print_recipe(pp));
    EXPECT_NE(text.find("tile_speed = 150\n"), std::string::npos);
    EXPECT_NE(text.find(">= 80 mm/s"), std::string::npos);
}

TEST(PlateParams, Validation)
{
    PlateParams pp;
    pp.connector_thickness = 3.0;
    EXPECT_THROW(resolve_plate_params(pp, 10.0), DomainError);
    pp = {};
    pp.gap_rate_bound = 1.0;
    EXPECT_THROW(resolve_plate_params(pp, 10.0), DomainError);
    pp = {};
    pp.recipe.tile_speed = 0;
    EXPECT_THROW(resolve_plate_params(pp, 10.0), DomainError);
    EXPECT_NEAR(resolve_plate_params({}, 10.0).connector_width, 3.0, 1e-12);
}
