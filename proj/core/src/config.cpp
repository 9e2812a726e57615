#include "infill/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "infill/io.hpp"

namespace infill {
namespace {

struct ConfigError : std::runtime_error {
    explicit ConfigError(int line, const std::string& msg)
        : std::runtime_error("config line " + std::to_string(line) + ": " + msg) {}
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int levenshtein(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string suggest(const std::string& key, const std::vector<std::string>& known) {
    std::string best;
    int best_d = 3;  // suggest only near misses
    for (const std::string& k : known) {
        const int d = levenshtein(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

double parse_double(int line, const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(line, key + ": expected a number, got '" + value + "'");
    }
}

int parse_int(int line, const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(line, key + ": expected an integer, got '" + value + "'");
    }
}

bool parse_bool(int line, const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "yes") return true;
    if (value == "off" || value == "false" || value == "no") return false;
    throw ConfigError(line, key + ": expected on/off, got '" + value + "'");
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

const std::vector<std::string> kProblemKeys = {"nx", "ny", "domain-mask", "fixed", "load",
                                               "passive-shell", "E0", "Emin", "nu"};
const std::vector<std::string> kOptimizeKeys = {
    "local-constraint", "alpha", "alpha-total", "R", "r", "p", "gamma", "anisotropic",
    "lobe-long", "lobe-short", "beta0", "beta-max", "beta-period", "epsilon", "max-iters",
    "move-limit", "init"};
const std::vector<std::string> kSolverKeys = {"tolerance", "max-cg-iters"};
const std::vector<std::string> kOutputKeys = {"dir", "snapshot-every", "formats"};
const std::vector<std::string> kSections = {"problem", "optimize", "solver", "output"};

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    bool saw_nx = false, saw_ny = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = trim(line.substr(0, comment));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
                std::string hint = suggest(section, kSections);
                throw ConfigError(line_no, "unknown section '" + section + "'" +
                                               (hint.empty() ? "" : ", did you mean '" + hint + "'?"));
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError(line_no, "key outside of any [section]");

        auto unknown = [&](const std::vector<std::string>& known) -> ConfigError {
            const std::string hint = suggest(key, known);
            return ConfigError(line_no, "unknown key '" + key + "' in [" + section + "]" +
                                            (hint.empty() ? "" : ", did you mean '" + hint + "'?"));
        };

        if (section == "problem") {
            if (key == "nx") {
                cfg.problem.nx = parse_int(line_no, key, value);
                if (cfg.problem.nx < 1) throw ConfigError(line_no, "nx must be >= 1");
                saw_nx = true;
            } else if (key == "ny") {
                cfg.problem.ny = parse_int(line_no, key, value);
                if (cfg.problem.ny < 1) throw ConfigError(line_no, "ny must be >= 1");
                saw_ny = true;
            } else if (key == "domain-mask") {
                cfg.problem.domain_mask = value == "none" ? "" : value;
            } else if (key == "fixed") {
                cfg.problem.fixed.push_back(value);
            } else if (key == "load") {
                cfg.problem.loads.push_back(value);
            } else if (key == "passive-shell") {
                cfg.problem.passive_shell = parse_double(line_no, key, value);
                if (cfg.problem.passive_shell < 0.0) {
                    throw ConfigError(line_no, "passive-shell must be >= 0");
                }
            } else if (key == "E0") {
                cfg.problem.E0 = parse_double(line_no, key, value);
                if (!(cfg.problem.E0 > 0.0)) throw ConfigError(line_no, "E0 must be positive");
            } else if (key == "Emin") {
                cfg.problem.Emin = parse_double(line_no, key, value);
                if (!(cfg.problem.Emin > 0.0)) throw ConfigError(line_no, "Emin must be positive");
            } else if (key == "nu") {
                cfg.problem.nu = parse_double(line_no, key, value);
                if (!(cfg.problem.nu > -1.0 && cfg.problem.nu < 0.5)) {
                    throw ConfigError(line_no, "nu must lie in (-1, 0.5)");
                }
            } else {
                throw unknown(kProblemKeys);
            }
        } else if (section == "optimize") {
            if (key == "local-constraint") {
                cfg.optimize.local_constraint = parse_bool(line_no, key, value);
            } else if (key == "alpha") {
                cfg.optimize.alpha = parse_double(line_no, key, value);
                if (!(cfg.optimize.alpha > 0.0 && cfg.optimize.alpha <= 1.0)) {
                    throw ConfigError(line_no, "alpha must lie in (0, 1]");
                }
            } else if (key == "alpha-total") {
                if (value == "none") {
                    cfg.optimize.alpha_total.reset();
                } else {
                    const double v = parse_double(line_no, key, value);
                    if (!(v > 0.0 && v <= 1.0)) {
                        throw ConfigError(line_no, "alpha-total must lie in (0, 1]");
                    }
                    cfg.optimize.alpha_total = v;
                }
            } else if (key == "R") {
                cfg.optimize.influence_radius = parse_double(line_no, key, value);
                if (!(cfg.optimize.influence_radius > 0.0)) {
                    throw ConfigError(line_no, "R must be positive");
                }
            } else if (key == "r") {
                cfg.optimize.filter_radius = parse_double(line_no, key, value);
                if (!(cfg.optimize.filter_radius > 0.0)) {
                    throw ConfigError(line_no, "r must be positive");
                }
            } else if (key == "p") {
                cfg.optimize.aggregation_exponent = parse_double(line_no, key, value);
                if (!(cfg.optimize.aggregation_exponent >= 2.0)) {
                    throw ConfigError(line_no, "p must be >= 2");
                }
            } else if (key == "gamma") {
                cfg.problem.gamma = parse_double(line_no, key, value);
                if (!(cfg.problem.gamma >= 1.0)) throw ConfigError(line_no, "gamma must be >= 1");
            } else if (key == "anisotropic") {
                cfg.optimize.anisotropic = parse_bool(line_no, key, value);
            } else if (key == "lobe-long") {
                cfg.optimize.lobe_long = value == "auto" ? 0.0 : parse_double(line_no, key, value);
            } else if (key == "lobe-short") {
                cfg.optimize.lobe_short = value == "auto" ? 0.0 : parse_double(line_no, key, value);
            } else if (key == "beta0") {
                cfg.optimize.beta.initial = parse_double(line_no, key, value);
            } else if (key == "beta-max") {
                cfg.optimize.beta.max = parse_double(line_no, key, value);
            } else if (key == "beta-period") {
                cfg.optimize.beta.period = parse_int(line_no, key, value);
            } else if (key == "epsilon") {
                cfg.optimize.change_tolerance = parse_double(line_no, key, value);
            } else if (key == "max-iters") {
                cfg.optimize.max_iterations = parse_int(line_no, key, value);
            } else if (key == "move-limit") {
                cfg.optimize.move_limit = parse_double(line_no, key, value);
            } else if (key == "init") {
                if (value == "auto") cfg.optimize.initial_design.reset();
                else cfg.optimize.initial_design = parse_double(line_no, key, value);
            } else {
                throw unknown(kOptimizeKeys);
            }
        } else if (section == "solver") {
            if (key == "tolerance") {
                cfg.optimize.solver_tolerance = parse_double(line_no, key, value);
            } else if (key == "max-cg-iters") {
                cfg.optimize.solver_max_iterations = parse_int(line_no, key, value);
            } else {
                throw unknown(kSolverKeys);
            }
        } else if (section == "output") {
            if (key == "dir") {
                cfg.output.directory = value;
            } else if (key == "snapshot-every") {
                cfg.output.snapshot_every = parse_int(line_no, key, value);
                if (cfg.output.snapshot_every < 0) {
                    throw ConfigError(line_no, "snapshot-every must be >= 0");
                }
            } else if (key == "formats") {
                cfg.output.formats.clear();
                for (std::string f : split(value, ',')) {
                    f = trim(f);
                    if (f.empty()) continue;
                    if (f != "csv" && f != "pgm" && f != "vtk" && f != "f64") {
                        throw ConfigError(line_no, "unknown output format '" + f + "'");
                    }
                    cfg.output.formats.push_back(f);
                }
                std::sort(cfg.output.formats.begin(), cfg.output.formats.end());
                cfg.output.formats.erase(
                    std::unique(cfg.output.formats.begin(), cfg.output.formats.end()),
                    cfg.output.formats.end());
            } else {
                throw unknown(kOutputKeys);
            }
        }
    }

    if (!saw_nx || !saw_ny) throw std::runtime_error("config: [problem] nx and ny are required");
    if (cfg.problem.fixed.empty()) throw std::runtime_error("config: at least one 'fixed' entry required");
    if (cfg.problem.loads.empty()) throw std::runtime_error("config: at least one 'load' entry required");
    cfg.optimize.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[problem]\n";
    out << "nx = " << cfg.problem.nx << "\n";
    out << "ny = " << cfg.problem.ny << "\n";
    out << "domain-mask = " << (cfg.problem.domain_mask.empty() ? "none" : cfg.problem.domain_mask)
        << "\n";
    for (const std::string& f : cfg.problem.fixed) out << "fixed = " << f << "\n";
    for (const std::string& l : cfg.problem.loads) out << "load = " << l << "\n";
    out << "passive-shell = " << format_double(cfg.problem.passive_shell) << "\n";
    out << "E0 = " << format_double(cfg.problem.E0) << "\n";
    out << "Emin = " << format_double(cfg.problem.Emin) << "\n";
    out << "nu = " << format_double(cfg.problem.nu) << "\n";
    out << "\n[optimize]\n";
    out << "local-constraint = " << (cfg.optimize.local_constraint ? "on" : "off") << "\n";
    out << "alpha = " << format_double(cfg.optimize.alpha) << "\n";
    out << "alpha-total = "
        << (cfg.optimize.alpha_total ? format_double(*cfg.optimize.alpha_total) : "none") << "\n";
    out << "R = " << format_double(cfg.optimize.influence_radius) << "\n";
    out << "r = " << format_double(cfg.optimize.filter_radius) << "\n";
    out << "p = " << format_double(cfg.optimize.aggregation_exponent) << "\n";
    out << "gamma = " << format_double(cfg.problem.gamma) << "\n";
    out << "anisotropic = " << (cfg.optimize.anisotropic ? "on" : "off") << "\n";
    out << "lobe-long = "
        << (cfg.optimize.lobe_long > 0.0 ? format_double(cfg.optimize.lobe_long) : "auto") << "\n";
    out << "lobe-short = "
        << (cfg.optimize.lobe_short > 0.0 ? format_double(cfg.optimize.lobe_short) : "auto")
        << "\n";
    out << "beta0 = " << format_double(cfg.optimize.beta.initial) << "\n";
    out << "beta-max = " << format_double(cfg.optimize.beta.max) << "\n";
    out << "beta-period = " << cfg.optimize.beta.period << "\n";
    out << "epsilon = " << format_double(cfg.optimize.change_tolerance) << "\n";
    out << "max-iters = " << cfg.optimize.max_iterations << "\n";
    out << "move-limit = " << format_double(cfg.optimize.move_limit) << "\n";
    out << "init = "
        << (cfg.optimize.initial_design ? format_double(*cfg.optimize.initial_design) : "auto")
        << "\n";
    out << "\n[solver]\n";
    out << "tolerance = " << format_double(cfg.optimize.solver_tolerance) << "\n";
    out << "max-cg-iters = " << cfg.optimize.solver_max_iterations << "\n";
    out << "\n[output]\n";
    out << "dir = " << cfg.output.directory << "\n";
    out << "snapshot-every = " << cfg.output.snapshot_every << "\n";
    out << "formats = ";
    for (std::size_t i = 0; i < cfg.output.formats.size(); ++i) {
        if (i) out << ",";
        out << cfg.output.formats[i];
    }
    out << "\n";
    return out.str();
}

namespace {

struct NodeAnchor {
    int i = 0;
    int j = 0;
};

NodeAnchor resolve_anchor(const Grid& grid, const std::string& name, const std::string& selector) {
    if (name == "left-mid") return {0, grid.ny / 2};
    if (name == "right-mid") return {grid.nx, grid.ny / 2};
    if (name == "top-mid") return {grid.nx / 2, grid.ny};
    if (name == "bottom-mid") return {grid.nx / 2, 0};
    if (name == "bottom-left") return {0, 0};
    if (name == "bottom-right") return {grid.nx, 0};
    if (name == "top-left") return {0, grid.ny};
    if (name == "top-right") return {grid.nx, grid.ny};
    throw std::invalid_argument("selector '" + selector + "': unknown anchor '" + name + "'");
}

NodeAnchor parse_node(const Grid& grid, const std::string& coords, const std::string& selector) {
    const auto comma = coords.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("selector '" + selector + "': expected node:i,j");
    }
    NodeAnchor a;
    try {
        a.i = std::stoi(coords.substr(0, comma));
        a.j = std::stoi(coords.substr(comma + 1));
    } catch (...) {
        throw std::invalid_argument("selector '" + selector + "': malformed node coordinates");
    }
    if (a.i < 0 || a.j < 0 || a.i > grid.nx || a.j > grid.ny) {
        throw std::invalid_argument("selector '" + selector + "': node outside the grid");
    }
    return a;
}

void parse_axes(const std::string& axes, const std::string& selector, bool& fix_x, bool& fix_y) {
    if (axes == "x") {
        fix_x = true;
        fix_y = false;
    } else if (axes == "y") {
        fix_x = false;
        fix_y = true;
    } else if (axes == "xy") {
        fix_x = fix_y = true;
    } else {
        throw std::invalid_argument("selector '" + selector + "': axes must be x, y or xy");
    }
}

}  // namespace

void apply_fixed_selector(const Grid& grid, const std::string& selector, BoundaryConditions& bcs) {
    const auto parts = split(selector, ':');
    bool fix_x = false, fix_y = false;
    if (parts[0] == "node") {
        if (parts.size() != 3) {
            throw std::invalid_argument("selector '" + selector + "': expected node:i,j:axes");
        }
        const NodeAnchor a = parse_node(grid, parts[1], selector);
        parse_axes(parts[2], selector, fix_x, fix_y);
        bcs.add_fixed_node(grid, a.i, a.j, fix_x, fix_y);
        return;
    }
    if (parts.size() != 2) {
        throw std::invalid_argument("selector '" + selector + "': expected <edge>:axes");
    }
    parse_axes(parts[1], selector, fix_x, fix_y);
    if (parts[0] == "left-edge") {
        for (int j = 0; j <= grid.ny; ++j) bcs.add_fixed_node(grid, 0, j, fix_x, fix_y);
    } else if (parts[0] == "right-edge") {
        for (int j = 0; j <= grid.ny; ++j) bcs.add_fixed_node(grid, grid.nx, j, fix_x, fix_y);
    } else if (parts[0] == "bottom-edge") {
        for (int i = 0; i <= grid.nx; ++i) bcs.add_fixed_node(grid, i, 0, fix_x, fix_y);
    } else if (parts[0] == "top-edge") {
        for (int i = 0; i <= grid.nx; ++i) bcs.add_fixed_node(grid, i, grid.ny, fix_x, fix_y);
    } else {
        throw std::invalid_argument("selector '" + selector + "': unknown edge '" + parts[0] + "'");
    }
}

void apply_load_selector(const Grid& grid, const std::string& selector, BoundaryConditions& bcs) {
    const auto parts = split(selector, ':');
    NodeAnchor a;
    std::size_t next = 1;
    if (parts[0] == "node") {
        if (parts.size() != 4) {
            throw std::invalid_argument("selector '" + selector +
                                        "': expected node:i,j:axis:magnitude");
        }
        a = parse_node(grid, parts[1], selector);
        next = 2;
    } else {
        if (parts.size() != 3) {
            throw std::invalid_argument("selector '" + selector +
                                        "': expected <anchor>:axis:magnitude");
        }
        a = resolve_anchor(grid, parts[0], selector);
    }
    int axis;
    if (parts[next] == "x") axis = 0;
    else if (parts[next] == "y") axis = 1;
    else throw std::invalid_argument("selector '" + selector + "': axis must be x or y");
    double mag;
    try {
        mag = std::stod(parts[next + 1]);
    } catch (...) {
        throw std::invalid_argument("selector '" + selector + "': malformed magnitude");
    }
    bcs.loads.push_back({grid.node_index(a.i, a.j), axis, mag});
}

Problem build_problem(const RunConfig& cfg) {
    Problem p;
    p.grid = build_grid(cfg.problem.nx, cfg.problem.ny);
    if (cfg.problem.domain_mask.empty()) {
        p.domain = DomainMask::all_inside(p.grid);
    } else {
        auto [mask_grid, values] = io::read_density_pgm(cfg.problem.domain_mask);
        if (mask_grid.nx != p.grid.nx || mask_grid.ny != p.grid.ny) {
            throw std::runtime_error("domain mask " + cfg.problem.domain_mask + " is " +
                                     std::to_string(mask_grid.nx) + "x" +
                                     std::to_string(mask_grid.ny) + ", expected " +
                                     std::to_string(p.grid.nx) + "x" + std::to_string(p.grid.ny));
        }
        p.domain.inside.resize(values.size());
        for (std::size_t e = 0; e < values.size(); ++e) {
            p.domain.inside[e] = values[e] > 0.5 ? 1 : 0;  // dark pixels = inside
        }
    }
    if (cfg.problem.passive_shell > 0.0) {
        p.passive = passive_from_distance(p.grid, domain_boundary_elements(p.grid, p.domain),
                                          cfg.problem.passive_shell, p.domain);
    } else {
        p.passive = PassiveMask::none(p.grid);
    }
    for (const std::string& s : cfg.problem.fixed) apply_fixed_selector(p.grid, s, p.bcs);
    for (const std::string& s : cfg.problem.loads) apply_load_selector(p.grid, s, p.bcs);
    p.bcs.normalize();
    p.bcs.validate(p.grid);
    p.material.E0 = cfg.problem.E0;
    p.material.Emin = cfg.problem.Emin;
    p.material.nu = cfg.problem.nu;
    p.material.gamma = cfg.problem.gamma;
    return p;
}

}  // namespace infill
