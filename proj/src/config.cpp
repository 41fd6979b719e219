#include "freeshell/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "freeshell/error.hpp"
#include "freeshell/mesh_io.hpp"

namespace freeshell
{

namespace
{

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const char* first = v.data();
    if (!v.empty() && v.front() == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
}

long long to_int(const std::string& key, const std::string& v)
{
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

template <typename T>
Setter number(T PipelineConfig::*outer, double T::*field)
{
    return [=](PipelineConfig& c, const std::string& k, const std::string& v) { (c.*outer).*field = to_double(k, v); };
}

template <typename T>
Setter integer(T PipelineConfig::*outer, int T::*field)
{
    return [=](PipelineConfig& c, const std::string& k, const std::string& v) {
        (c.*outer).*field = static_cast<int>(to_int(k, v));
    };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> m;
        m["pipeline.input"] = [](PipelineConfig& c, const std::string&, const std::string& v) { c.input_path = v; };
        m["pipeline.output_dir"] = [](PipelineConfig& c, const std::string&, const std::string& v) {
            c.output_dir = v;
        };
        m["pipeline.seed"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            const long long s = to_int(k, v);
            if (s < 0) {
                throw ConfigError(k + ": must be non-negative");
            }
            c.seed = static_cast<std::uint64_t>(s);
        };
        m["remesh.target_len"] = number(&PipelineConfig::remesh, &RemeshConfig::target_len);
        m["remesh.iters"] = integer(&PipelineConfig::remesh, &RemeshConfig::iters);

        m["flatten.shrink_rate"] = number(&PipelineConfig::flatten, &FlattenConfig::shrink_rate);
        m["flatten.kappa"] = number(&PipelineConfig::flatten, &FlattenConfig::kappa);
        m["flatten.cut_rate"] = number(&PipelineConfig::flatten, &FlattenConfig::cut_rate);
        m["flatten.eps_tor"] = number(&PipelineConfig::flatten, &FlattenConfig::eps_tor);
        m["flatten.align_max_iters"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.align.max_iters = static_cast<int>(to_int(k, v));
        };
        m["flatten.weld_tol_rel"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.align.weld_tol_rel = to_double(k, v);
        };
        m["flatten.outer_max_iters"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.coarse.outer_max_iters = static_cast<int>(to_int(k, v));
        };
        m["flatten.arap_max_iters"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.arap.max_iters = static_cast<int>(to_int(k, v));
        };
        m["flatten.arap_tol"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.arap.tol = to_double(k, v);
        };

        m["solver.memory"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.solver.memory = static_cast<int>(to_int(k, v));
        };
        m["solver.grad_tol"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.solver.grad_tol = to_double(k, v);
        };
        m["solver.max_iters"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.flatten.solver.max_iters = static_cast<int>(to_int(k, v));
        };

        m["refine.learn_rate"] = number(&PipelineConfig::flatten, &FlattenConfig::learn_rate);
        m["refine.max_steps"] = integer(&PipelineConfig::flatten, &FlattenConfig::refine_max_steps);
        m["refine.loss_tol_rel"] = number(&PipelineConfig::flatten, &FlattenConfig::loss_tol_rel);

        m["plate.tile_thickness"] = number(&PipelineConfig::plate, &PlateParams::tile_thickness);
        m["plate.connector_thickness"] = number(&PipelineConfig::plate, &PlateParams::connector_thickness);
        m["plate.connector_width"] = number(&PipelineConfig::plate, &PlateParams::connector_width);
        m["plate.clearance"] = number(&PipelineConfig::plate, &PlateParams::clearance);
        m["plate.gap_rate_bound"] = number(&PipelineConfig::plate, &PlateParams::gap_rate_bound);
        m["plate.connector_layer_h"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.plate.recipe.connector_layer_h = to_double(k, v);
        };
        m["plate.tile_layer_h"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.plate.recipe.tile_layer_h = to_double(k, v);
        };
        m["plate.connector_speed"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.plate.recipe.connector_speed = to_double(k, v);
        };
        m["plate.tile_speed"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.plate.recipe.tile_speed = to_double(k, v);
        };
        m["plate.activation"] = [](PipelineConfig& c, const std::string&, const std::string& v) {
            c.plate.recipe.activation = v;
        };
        m["plate.connector_fill"] = [](PipelineConfig& c, const std::string&, const std::string& v) {
            c.plate.recipe.connector_fill = v;
        };

        m["verify.scan_points_per_tile"] = integer(&PipelineConfig::verify, &VerifyConfig::scan_points_per_tile);
        m["verify.scan_sigma"] = number(&PipelineConfig::verify, &VerifyConfig::scan_sigma);
        m["verify.scan_path"] = [](PipelineConfig& c, const std::string&, const std::string& v) {
            c.verify.scan_path = v;
        };
        return m;
    }();
    return table;
}

void require(bool ok, const std::string& key, const std::string& what)
{
    if (!ok) {
        throw ConfigError(key + ": " + what);
    }
}

}  // namespace

void validate_config(const PipelineConfig& c)
{
    require(c.remesh.target_len >= 0.0, "remesh.target_len", "must be >= 0");
    require(c.remesh.iters >= 1, "remesh.iters", "must be >= 1");
    const FlattenConfig& f = c.flatten;
    require(f.shrink_rate > 0.0 && f.shrink_rate < 1.0, "flatten.shrink_rate", "must lie in (0, 1)");
    require(f.kappa >= 1.0, "flatten.kappa", "must be >= 1");
    require(f.cut_rate >= 0.0 && f.cut_rate < 1.0, "flatten.cut_rate", "must lie in [0, 1)");
    require(f.eps_tor > 0.0 && f.eps_tor < 1.0, "flatten.eps_tor", "must lie in (0, 1)");
    require(f.align.max_iters >= 1, "flatten.align_max_iters", "must be >= 1");
    require(f.align.weld_tol_rel > 0.0, "flatten.weld_tol_rel", "must be > 0");
    require(f.coarse.outer_max_iters >= 1, "flatten.outer_max_iters", "must be >= 1");
    require(f.arap.max_iters >= 1, "flatten.arap_max_iters", "must be >= 1");
    require(f.arap.tol > 0.0, "flatten.arap_tol", "must be > 0");
    require(f.solver.memory >= 1, "solver.memory", "must be >= 1");
    require(f.solver.grad_tol >= 0.0, "solver.grad_tol", "must be >= 0");
    require(f.solver.max_iters >= 1, "solver.max_iters", "must be >= 1");
    require(f.learn_rate >= 0.0, "refine.learn_rate", "must be >= 0 (0 selects the automatic rate)");
    require(f.refine_max_steps >= 1, "refine.max_steps", "must be >= 1");
    require(f.loss_tol_rel > 0.0, "refine.loss_tol_rel", "must be > 0");
    const PlateParams& p = c.plate;
    require(p.connector_thickness > 0.0, "plate.connector_thickness", "must be > 0");
    require(p.tile_thickness > p.connector_thickness, "plate.tile_thickness", "must exceed connector_thickness");
    require(p.connector_width >= 0.0, "plate.connector_width", "must be >= 0 (0 selects 0.3 * avg edge)");
    require(p.clearance >= 0.0, "plate.clearance", "must be >= 0");
    require(p.gap_rate_bound > 0.0 && p.gap_rate_bound < 1.0, "plate.gap_rate_bound", "must lie in (0, 1)");
    require(p.recipe.connector_layer_h > 0.0, "plate.connector_layer_h", "must be > 0");
    require(p.recipe.tile_layer_h > 0.0, "plate.tile_layer_h", "must be > 0");
    require(p.recipe.connector_speed > 0.0, "plate.connector_speed", "must be > 0");
    require(p.recipe.tile_speed > 0.0, "plate.tile_speed", "must be > 0");
    require(c.verify.scan_points_per_tile >= 1, "verify.scan_points_per_tile", "must be >= 1");
    require(c.verify.scan_sigma >= 0.0, "verify.scan_sigma", "must be >= 0");
}

PipelineConfig parse_config(const std::string& text, const std::string& origin)
{
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        line = trim(line);
        if (line.empty() || line.front() == '#' || line.front() == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(where + "malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + "expected key = value, got '" + line + "'");
        }
        const std::string key = (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigError(where + "unknown key '" + key + "'");
        }
        try {
            it->second(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    validate_config(cfg);
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    PipelineConfig cfg = parse_config(ss.str(), path.string());
    // Relative paths in the file are relative to the file.
    const auto base = path.parent_path();
    if (!cfg.input_path.empty() && cfg.input_path.is_relative()) {
        cfg.input_path = base / cfg.input_path;
    }
    if (cfg.output_dir.is_relative()) {
        cfg.output_dir = base / cfg.output_dir;
    }
    if (!cfg.verify.scan_path.empty() && cfg.verify.scan_path.is_relative()) {
        cfg.verify.scan_path = base / cfg.verify.scan_path;
    }
    return cfg;
}

std::string format_config(const PipelineConfig& c)
{
    const auto d = [](double v) { return format_double(v); };
    const auto i = [](long long v) { return std::to_string(v); };
    std::string s;
    s += "[pipeline]\ninput = " + c.input_path.string() + "\noutput_dir = " + c.output_dir.string() +
         "\nseed = " + std::to_string(c.seed) + "\n\n";
    s += "[remesh]\ntarget_len = " + d(c.remesh.target_len) + "\niters = " + i(c.remesh.iters) + "\n\n";
    const FlattenConfig& f = c.flatten;
    s += "[flatten]\nshrink_rate = " + d(f.shrink_rate) + "\nkappa = " + d(f.kappa) + "\ncut_rate = " +
         d(f.cut_rate) + "\neps_tor = " + d(f.eps_tor) + "\nalign_max_iters = " + i(f.align.max_iters) +
         "\nweld_tol_rel = " + d(f.align.weld_tol_rel) + "\nouter_max_iters = " + i(f.coarse.outer_max_iters) +
         "\narap_max_iters = " + i(f.arap.max_iters) + "\narap_tol = " + d(f.arap.tol) + "\n\n";
    s += "[solver]\nmemory = " + i(f.solver.memory) + "\ngrad_tol = " + d(f.solver.grad_tol) +
         "\nmax_iters = " + i(f.solver.max_iters) + "\n\n";
    s += "[refine]\nlearn_rate = " + d(f.learn_rate) + "\nmax_steps = " + i(f.refine_max_steps) +
         "\nloss_tol_rel = " + d(f.loss_tol_rel) + "\n\n";
    const PlateParams& p = c.plate;
    s += "[plate]\ntile_thickness = " + d(p.tile_thickness) + "\nconnector_thickness = " + d(p.connector_thickness) +
         "\nconnector_width = " + d(p.connector_width) + "\nclearance = " + d(p.clearance) +
         "\ngap_rate_bound = " + d(p.gap_rate_bound) + "\nconnector_layer_h = " + d(p.recipe.connector_layer_h) +
         "\ntile_layer_h = " + d(p.recipe.tile_layer_h) + "\nconnector_speed = " + d(p.recipe.connector_speed) +
         "\ntile_speed = " + d(p.recipe.tile_speed) + "\nactivation = " + p.recipe.activation +
         "\nconnector_fill = " + p.recipe.connector_fill + "\n\n";
    s += "[verify]\nscan_points_per_tile = " + i(c.verify.scan_points_per_tile) +
         "\nscan_sigma = " + d(c.verify.scan_sigma) + "\nscan_path = " + c.verify.scan_path.string() + "\n";
    return s;
}

}  // namespace freeshell
