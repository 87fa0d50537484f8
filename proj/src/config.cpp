#include "optomech/config.hpp"

#include "optomech/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace optomech::config {

using nlohmann::json;

std::string to_string(Pipeline p) {
    switch (p) {
    case Pipeline::BoUnitary: return "bo-unitary";
    case Pipeline::BoDissipative: return "bo-dissipative";
    case Pipeline::SteadySweep: return "steady-sweep";
    case Pipeline::Stability: return "stability";
    }
    return "?";
}

Pipeline pipeline_from_string(const std::string& name) {
    for (auto p : {Pipeline::BoUnitary, Pipeline::BoDissipative, Pipeline::SteadySweep,
                   Pipeline::Stability}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError("pipeline: unknown pipeline \"" + name +
                      "\" (expected bo-unitary, bo-dissipative, steady-sweep or stability)");
}

double BoSection::g() const {
    if (const auto* g = std::get_if<double>(&coupling)) return *g;
    const auto& pc = std::get<PhysicalCoupling>(coupling);
    // In units of the mechanical frequency.
    return bo::coupling_from_physical(pc.cavity_frequency, pc.cavity_length, pc.mirror_mass,
                                      pc.mechanical_frequency) /
           pc.mechanical_frequency;
}

std::vector<double> Grid::values() const {
    if (const auto* list = std::get_if<std::vector<double>>(&spec)) return *list;
    const auto& r = std::get<GridRange>(spec);
    if (r.count == 1) return {r.start};
    return numerics::linspace(r.start, r.stop, static_cast<std::size_t>(r.count));
}

std::vector<double> TimeGrid::values() const {
    std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k) t[static_cast<std::size_t>(k)] = k * t_max / n_steps;
    return t;
}

namespace {

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

// A JSON object whose keys must all be consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    // Names a likely misspelling present in the same object.
    [[noreturn]] void missing(const std::string& key) const {
        std::string msg = field(key) + ": required field missing";
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key()) && edit_distance(it.key(), key) <= 2) {
                msg += " (unknown key \"" + it.key() + "\" present)";
                break;
            }
        }
        throw ConfigError(msg);
    }

    double number(const std::string& key) {
        if (!has(key)) missing(key);
        return as_number(raw(key), field(key));
    }

    double number_or(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }

    int integer(const std::string& key) {
        if (!has(key)) missing(key);
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
        return v.get<int>();
    }

    int integer_or(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

    std::string string(const std::string& key) {
        if (!has(key)) missing(key);
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
        return v.get<std::string>();
    }

    Section child(const std::string& key) { return Section(raw(key), field(key)); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown key");
        }
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
        return x;
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::complex<double> parse_amplitude(const json& v, const std::string& where) {
    if (v.is_number()) return {Section::as_number(v, where), 0.0};
    if (v.is_array() && v.size() == 2) {
        return {Section::as_number(v[0], where + "[0]"), Section::as_number(v[1], where + "[1]")};
    }
    throw ConfigError(where + ": expected a number or [re, im]");
}

Grid parse_grid(const json& v, const std::string& where) {
    Grid g;
    if (v.is_array()) {
        std::vector<double> list;
        for (std::size_t i = 0; i < v.size(); ++i) {
            list.push_back(Section::as_number(v[i], where + "[" + std::to_string(i) + "]"));
        }
        g.spec = std::move(list);
        return g;
    }
    if (!v.is_object()) throw ConfigError(where + ": expected a list or {start, stop, count}");
    Section s(v, where);
    GridRange r;
    r.start = s.number("start");
    r.stop = s.number("stop");
    r.count = s.integer("count");
    s.finish();
    g.spec = r;
    return g;
}

BoSection parse_bo(Section s) {
    BoSection b;
    b.Omega = s.number_or("Omega", 1.0);
    if (s.has("g") && s.has("physical_coupling")) {
        throw ConfigError(s.field("g") + ": give either g or physical_coupling, not both");
    }
    if (s.has("physical_coupling")) {
        Section pc = s.child("physical_coupling");
        PhysicalCoupling p;
        p.cavity_frequency = pc.number("cavity_frequency");
        p.cavity_length = pc.number("cavity_length");
        p.mirror_mass = pc.number("mirror_mass");
        p.mechanical_frequency = pc.number("mechanical_frequency");
        pc.finish();
        b.coupling = p;
    } else {
        b.coupling = s.number("g");
    }
    b.lambda = s.number("lambda");
    if (!s.has("alpha_A")) s.missing("alpha_A");
    b.alpha_A = parse_amplitude(s.raw("alpha_A"), s.field("alpha_A"));
    if (!s.has("alpha_B")) s.missing("alpha_B");
    b.alpha_B = parse_amplitude(s.raw("alpha_B"), s.field("alpha_B"));
    b.n_thermal = s.number_or("n_thermal", 0.0);
    b.cutoff_sigmas = s.number_or("cutoff_sigmas", 8.0);
    s.finish();
    return b;
}

LossSection parse_loss(Section s) {
    LossSection l;
    l.kappa = s.number("kappa");
    l.Gamma = s.number("Gamma");
    l.n_bath = s.number_or("n_bath", 0.0);
    s.finish();
    return l;
}

DriveSection parse_drive(Section s) {
    DriveSection d;
    d.Omega = s.number_or("Omega", 1.0);
    d.lambda = s.number("lambda");
    d.kappa = s.number("kappa");
    d.gamma_m = s.number("gamma_m");
    const bool eff = s.has("effective");
    const bool bare = s.has("bare");
    if (eff == bare) throw ConfigError(s.field("effective") + ": give exactly one of effective or bare");
    if (eff) {
        Section e = s.child("effective");
        EffectiveDriveSection x;
        x.g_a_s = e.number("g_a_s");
        x.g_b_s = e.number("g_b_s");
        e.finish();
        d.kind = x;
    } else {
        Section b = s.child("bare");
        BareDriveSection x;
        x.eta = b.number("eta");
        x.g = b.number("g");
        b.finish();
        d.kind = x;
    }
    s.finish();
    return d;
}

Grids parse_grids(Section s) {
    Grids g;
    if (s.has("time")) {
        Section t = s.child("time");
        TimeGrid tg;
        tg.t_max = t.number("t_max");
        tg.n_steps = t.integer("n_steps");
        t.finish();
        g.time = tg;
    }
    for (const char* name : {"n_thermal", "delta", "nbar"}) {
        if (!s.has(name)) continue;
        Grid grid = parse_grid(s.raw(name), s.field(name));
        const std::string key = name;
        if (key == "n_thermal") g.n_thermal = std::move(grid);
        else if (key == "delta") g.delta = std::move(grid);
        else g.nbar = std::move(grid);
    }
    s.finish();
    return g;
}

RunConfig from_json(const json& root) {
    Section s(root, "");
    RunConfig c;
    c.schema = s.integer("schema");
    if (c.schema != kSchemaVersion) {
        throw ConfigError("schema: unsupported version " + std::to_string(c.schema) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    }
    c.pipeline = pipeline_from_string(s.string("pipeline"));
    if (s.has("bo")) c.bo = parse_bo(s.child("bo"));
    if (s.has("loss")) c.loss = parse_loss(s.child("loss"));
    if (s.has("drive")) c.drive = parse_drive(s.child("drive"));
    if (s.has("grids")) c.grids = parse_grids(s.child("grids"));
    if (s.has("solver")) {
        Section t = s.child("solver");
        c.solver.abs_tol = t.number_or("abs_tol", c.solver.abs_tol);
        c.solver.rel_tol = t.number_or("rel_tol", c.solver.rel_tol);
        if (t.has("max_steps")) {
            const int m = t.integer("max_steps");
            if (m <= 0) throw ConfigError("solver.max_steps: must be positive");
            c.solver.max_steps = static_cast<std::size_t>(m);
        }
        t.finish();
    }
    if (s.has("mixture")) {
        const std::string m = s.string("mixture");
        if (m == "per-branch") c.mixture = bo::MixtureMode::PerBranch;
        else if (m == "averaged-state") c.mixture = bo::MixtureMode::AveragedState;
        else throw ConfigError("mixture: expected \"per-branch\" or \"averaged-state\", got \"" + m + "\"");
    }
    const bool is_bo = c.pipeline == Pipeline::BoUnitary || c.pipeline == Pipeline::BoDissipative;
    if (is_bo && !c.grids.time) c.grids.time = TimeGrid{100.0, 1000};
    c.threads = s.integer_or("threads", 0);
    if (s.has("output")) c.output = std::filesystem::path(s.string("output"));
    s.finish();
    return c;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void validate_grid(const std::optional<Grid>& grid, const std::string& name, bool non_negative) {
    if (!grid) return;
    if (const auto* r = std::get_if<GridRange>(&grid->spec)) {
        require(r->count >= 1, "grids." + name + ".count: must be at least 1");
    }
    const auto v = grid->values();
    require(!v.empty(), "grids." + name + ": must not be empty");
    for (double x : v) {
        if (non_negative) require(x >= 0.0, "grids." + name + ": values must be non-negative");
    }
}

} // namespace

void validate(const RunConfig& c) {
    const std::string p = to_string(c.pipeline);
    const bool is_bo = c.pipeline == Pipeline::BoUnitary || c.pipeline == Pipeline::BoDissipative;

    require(c.threads >= 0, "threads: must be non-negative");
    require(c.solver.abs_tol > 0.0, "solver.abs_tol: must be positive");
    require(c.solver.rel_tol > 0.0, "solver.rel_tol: must be positive");

    if (is_bo) {
        require(c.bo.has_value(), "bo: required for pipeline " + p);
        require(!c.drive, "drive: not used by pipeline " + p);
        require(c.grids.time.has_value(), "grids.time: required for pipeline " + p);
        require(!c.grids.delta, "grids.delta: not used by pipeline " + p);
        require(!c.grids.nbar, "grids.nbar: not used by pipeline " + p);
        const auto& b = *c.bo;
        require(b.Omega > 0.0, "bo.Omega: must be positive");
        require(b.lambda != 0.0, "bo.lambda: must be non-zero");
        require(b.n_thermal >= 0.0, "bo.n_thermal: must be non-negative");
        require(b.cutoff_sigmas >= 6.0, "bo.cutoff_sigmas: must be at least 6");
        if (const auto* pc = std::get_if<PhysicalCoupling>(&b.coupling)) {
            require(pc->cavity_frequency > 0.0 && pc->cavity_length > 0.0 && pc->mirror_mass > 0.0 &&
                        pc->mechanical_frequency > 0.0,
                    "bo.physical_coupling: all entries must be positive");
        } else {
            require(std::get<double>(b.coupling) >= 0.0, "bo.g: must be non-negative");
        }
        const auto& t = *c.grids.time;
        require(t.t_max > 0.0, "grids.time.t_max: must be positive");
        require(t.n_steps >= 1, "grids.time.n_steps: must be at least 1");
    } else {
        require(c.drive.has_value(), "drive: required for pipeline " + p);
        require(!c.bo, "bo: not used by pipeline " + p);
        require(!c.loss, "loss: not used by pipeline " + p);
        require(!c.grids.time, "grids.time: not used by pipeline " + p);
        require(!c.grids.n_thermal, "grids.n_thermal: not used by pipeline " + p);
        require(c.grids.delta.has_value(), "grids.delta: required for pipeline " + p);
        const auto& d = *c.drive;
        require(d.Omega > 0.0, "drive.Omega: must be positive");
        require(d.kappa > 0.0, "drive.kappa: must be positive");
        require(d.gamma_m >= 0.0, "drive.gamma_m: must be non-negative");
    }

    switch (c.pipeline) {
    case Pipeline::BoUnitary:
        require(!c.loss, "loss: not used by pipeline " + p);
        break;
    case Pipeline::BoDissipative:
        require(c.loss.has_value(), "loss: required for pipeline " + p);
        require(!c.grids.n_thermal, "grids.n_thermal: not used by pipeline " + p +
                                        " (set bo.n_thermal)");
        require(c.loss->kappa >= 0.0, "loss.kappa: must be non-negative");
        require(c.loss->Gamma >= 0.0, "loss.Gamma: must be non-negative");
        require(c.loss->n_bath >= 0.0, "loss.n_bath: must be non-negative");
        break;
    case Pipeline::SteadySweep:
        require(c.grids.nbar.has_value(), "grids.nbar: required for pipeline " + p);
        break;
    case Pipeline::Stability:
        require(!c.grids.nbar, "grids.nbar: not used by pipeline " + p);
        break;
    }

    validate_grid(c.grids.n_thermal, "n_thermal", true);
    validate_grid(c.grids.delta, "delta", false);
    validate_grid(c.grids.nbar, "nbar", true);
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + e.what());
    }
    RunConfig c = from_json(root);
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

namespace {

json grid_json(const Grid& g) {
    if (const auto* list = std::get_if<std::vector<double>>(&g.spec)) return *list;
    const auto& r = std::get<GridRange>(g.spec);
    return {{"start", r.start}, {"stop", r.stop}, {"count", r.count}};
}

json amplitude_json(std::complex<double> a) { return json::array({a.real(), a.imag()}); }

} // namespace

std::string write_config(const RunConfig& c) {
    json j;
    j["schema"] = c.schema;
    j["pipeline"] = to_string(c.pipeline);
    if (c.bo) {
        const auto& b = *c.bo;
        json o;
        o["Omega"] = b.Omega;
        if (const auto* g = std::get_if<double>(&b.coupling)) {
            o["g"] = *g;
        } else {
            const auto& pc = std::get<PhysicalCoupling>(b.coupling);
            o["physical_coupling"] = {{"cavity_frequency", pc.cavity_frequency},
                                      {"cavity_length", pc.cavity_length},
                                      {"mirror_mass", pc.mirror_mass},
                                      {"mechanical_frequency", pc.mechanical_frequency}};
        }
        o["lambda"] = b.lambda;
        o["alpha_A"] = amplitude_json(b.alpha_A);
        o["alpha_B"] = amplitude_json(b.alpha_B);
        o["n_thermal"] = b.n_thermal;
        o["cutoff_sigmas"] = b.cutoff_sigmas;
        j["bo"] = o;
    }
    if (c.loss) j["loss"] = {{"kappa", c.loss->kappa}, {"Gamma", c.loss->Gamma}, {"n_bath", c.loss->n_bath}};
    if (c.drive) {
        const auto& d = *c.drive;
        json o = {{"Omega", d.Omega}, {"lambda", d.lambda}, {"kappa", d.kappa}, {"gamma_m", d.gamma_m}};
        if (const auto* e = std::get_if<EffectiveDriveSection>(&d.kind)) {
            o["effective"] = {{"g_a_s", e->g_a_s}, {"g_b_s", e->g_b_s}};
        } else {
            const auto& b = std::get<BareDriveSection>(d.kind);
            o["bare"] = {{"eta", b.eta}, {"g", b.g}};
        }
        j["drive"] = o;
    }
    json grids = json::object();
    if (c.grids.time) grids["time"] = {{"t_max", c.grids.time->t_max}, {"n_steps", c.grids.time->n_steps}};
    if (c.grids.n_thermal) grids["n_thermal"] = grid_json(*c.grids.n_thermal);
    if (c.grids.delta) grids["delta"] = grid_json(*c.grids.delta);
    if (c.grids.nbar) grids["nbar"] = grid_json(*c.grids.nbar);
    j["grids"] = grids;
    j["solver"] = {{"abs_tol", c.solver.abs_tol},
                   {"rel_tol", c.solver.rel_tol},
                   {"max_steps", c.solver.max_steps}};
    j["mixture"] = c.mixture == bo::MixtureMode::PerBranch ? "per-branch" : "averaged-state";
    j["threads"] = c.threads;
    if (c.output) j["output"] = c.output->generic_string();
    return j.dump(2) + "\n";
}

} // namespace optomech::config
