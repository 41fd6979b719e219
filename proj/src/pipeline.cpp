#include "freeshell/pipeline.hpp"

#include <filesystem>

#include "freeshell/error.hpp"
#include "freeshell/layout_io.hpp"
#include "freeshell/mesh_io.hpp"
#include "freeshell/remesh.hpp"
#include "freeshell/verify.hpp"

namespace freeshell
{

namespace fs = std::filesystem;

namespace
{

TargetMesh load_stage_mesh(const PipelineConfig& cfg)
{
    const fs::path path = cfg.output_dir / "mesh.obj";
    if (!fs::exists(path)) {
        throw IoError(path.string() + " not found; run the remesh stage first");
    }
    return load_mesh(path);
}

Layout load_stage_layout(const PipelineConfig& cfg, const TargetMesh& mesh)
{
    const fs::path obj = cfg.output_dir / "layout.obj";
    if (!fs::exists(obj)) {
        throw IoError(obj.string() + " not found; run the flatten stage first");
    }
    return load_layout(mesh, obj, cfg.output_dir / "linkages.txt");
}

void run_remesh(const PipelineConfig& cfg, std::ostream& log)
{
    if (cfg.input_path.empty()) {
        throw ConfigError("pipeline.input: no input mesh given");
    }
    TargetMesh mesh = load_mesh(cfg.input_path);
    if (cfg.remesh.target_len > 0.0) {
        mesh = isotropic_remesh(mesh, cfg.remesh.target_len, cfg.remesh.iters);
    }
    save_mesh(mesh, cfg.output_dir / "mesh.obj", MeshFormat::OBJ);
    const EdgeStatistics es = edge_statistics(mesh);
    log << "remesh: " << mesh.vertex_count() << " vertices, " << mesh.triangle_count() << " triangles, avg edge "
        << format_double(es.avg_edge_len) << " mm\n";
}

void run_flatten(const PipelineConfig& cfg, std::ostream& log, bool verbose)
{
    const TargetMesh mesh = load_stage_mesh(cfg);
    IterationObserver on_iter;
    if (verbose) {
        on_iter = [&log](const Layout&, const CoarseRecord& rec) { log << "coarse " << coarse_record_line(rec); };
    }
    const FlattenResult result = run_discrete_flattening(mesh, cfg.flatten, {}, on_iter);
    save_layout(result.layout, cfg.output_dir / "layout.obj", cfg.output_dir / "linkages.txt");
    write_text_file(cfg.output_dir / "flatten_stats.txt", flatten_stats_text(result.stats, result.layout));
    log << "flatten: " << result.stats.cut_count << " cuts, coarse a_max " << format_double(result.stats.coarse.final_a_max)
        << " mm, mean gap " << format_double(result.stats.refine.final_avg_gap) << " mm (target "
        << format_double(result.stats.d_target) << ")\n";
}

void run_plate(const PipelineConfig& cfg, std::ostream& log)
{
    const TargetMesh mesh = load_stage_mesh(cfg);
    const Layout layout = load_stage_layout(cfg, mesh);
    const FlatPlate plate = generate_plate(layout, mesh, cfg.plate);
    export_plate_mesh(plate, cfg.output_dir / "plate.obj", MeshFormat::OBJ);
    export_plate_mesh(plate, cfg.output_dir / "plate.stl", MeshFormat::STL);
    export_layout_svg(layout, plate, cfg.output_dir / "layout.svg");
    write_text_file(cfg.output_dir / "recipe.txt", format_recipe(plate.recipe));

    int bad_solids = 0;
    for (const TileSolid& t : plate.tiles) {
        const SolidCheck c = check_solid(t.solid);
        bad_solids += (c.closed && c.oriented && c.volume > 0.0) ? 0 : 1;
    }
    for (const ConnectorSolid& c : plate.connectors) {
        const SolidCheck s = check_solid(c.solid);
        bad_solids += (s.closed && s.oriented && s.volume > 0.0) ? 0 : 1;
    }
    const FoldingReport fold = folding_check(plate, layout);
    const auto clearance = check_clearance(plate, layout, cfg.plate);
    std::string text;
    text += "tiles = " + std::to_string(plate.tiles.size()) + "\n";
    text += "connectors = " + std::to_string(plate.connectors.size()) + "\n";
    text += "interlocks = " + std::to_string(plate.interlocks.size()) + "\n";
    text += "invalid_solids = " + std::to_string(bad_solids) + "\n";
    text += "folding_max_mismatch = " + format_double(fold.max_mismatch) + "\n";
    text += "folding_matched_faces = " + std::to_string(fold.matched_faces) + "\n";
    text += "folding_unmatched_faces = " + std::to_string(fold.unmatched_faces) + "\n";
    text += "clearance_violations = " + std::to_string(clearance.size()) + "\n";
    text += "gap_rate_violations = " + std::to_string(plate.gap_rate_violations.size()) + "\n";
    for (const std::string& w : plate.warnings) {
        text += "warning = " + w + "\n";
    }
    write_text_file(cfg.output_dir / "plate_check.txt", text);
    log << "plate: " << plate.tiles.size() << " tiles, " << plate.connectors.size() << " connectors, "
        << plate.interlocks.size() << " interlocks\n";
    for (const std::string& w : plate.warnings) {
        log << "plate: warning: " << w << "\n";
    }
}

void run_verify(const PipelineConfig& cfg, std::ostream& log)
{
    const TargetMesh mesh = load_stage_mesh(cfg);
    const Layout layout = load_stage_layout(cfg, mesh);
    EnergyParams p;
    p.eps_tor = cfg.flatten.eps_tor;
    p.cut_rate = cfg.flatten.cut_rate;
    const LayoutReport report = layout_metrics(layout, p);
    write_report(report, cfg.output_dir / "report.txt");

    std::vector<Vec3> scan;
    if (!cfg.verify.scan_path.empty()) {
        scan = read_xyz(cfg.verify.scan_path);
    } else {
        const FlatPlate plate = generate_plate(layout, mesh, cfg.plate);
        scan = synthetic_scan(plate, mesh, cfg.verify.scan_points_per_tile, cfg.verify.scan_sigma, cfg.seed);
        write_xyz(scan, cfg.output_dir / "scan.xyz");
    }
    if (scan.empty()) {
        throw DomainError("no scan points to measure");
    }
    const DistanceResult dist = point_to_mesh_distance(scan, mesh);
    write_report(dist, cfg.output_dir / "distance_report.txt");
    log << "verify: max gap " << format_double(report.max_gap) << " mm, " << report.overlap_pairs
        << " overlapping pairs, connected " << (report.connected ? "true" : "false") << ", scan distance avg "
        << format_double(dist.avg) << " max " << format_double(dist.max) << " mm\n";
}

template <typename F>
void labelled(const char* label, F&& f)
{
    try {
        f();
    } catch (const Error&) {
        rethrow_with_label(label);
    }
}

}  // namespace

Stage parse_stage(const std::string& name)
{
    if (name == "remesh") {
        return Stage::remesh;
    }
    if (name == "flatten") {
        return Stage::flatten;
    }
    if (name == "plate") {
        return Stage::plate;
    }
    if (name == "verify") {
        return Stage::verify;
    }
    if (name == "all") {
        return Stage::all;
    }
    throw ConfigError("unknown stage '" + name + "'");
}

void execute_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log, bool verbose)
{
    validate_config(cfg);
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) {
        throw IoError("cannot create " + cfg.output_dir.string() + ": " + ec.message());
    }
    const bool all = stage == Stage::all;
    if (all || stage == Stage::remesh) {
        labelled("remesh", [&] { run_remesh(cfg, log); });
    }
    if (all || stage == Stage::flatten) {
        labelled("flatten", [&] { run_flatten(cfg, log, verbose); });
    }
    if (all || stage == Stage::plate) {
        labelled("plate", [&] { run_plate(cfg, log); });
    }
    if (all || stage == Stage::verify) {
        labelled("verify", [&] { run_verify(cfg, log); });
    }
}

int run_pipeline(Stage stage, const PipelineConfig& cfg, std::ostream& log, std::ostream& err, bool verbose)
{
    try {
        execute_stage(stage, cfg, log, verbose);
    } catch (const std::exception& e) {
        err << "freeshell: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace freeshell
