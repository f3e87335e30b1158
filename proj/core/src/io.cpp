#include "nsk/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nsk {

namespace {

using json = nlohmann::json;

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

const json& require(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing field '" + where + "'");
    return *it;
}

double get_num(const json& j, const std::string& key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_number()) throw ConfigError("field '" + where + "' must be a number");
    return v.get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ConfigError("field '" + key + "' must be a number");
    return it->get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_number_integer()) throw ConfigError("field '" + where + "' must be an integer");
    return v.get<int>();
}

std::string get_str(const json& j, const std::string& key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_string()) throw ConfigError("field '" + where + "' must be a string");
    return v.get<std::string>();
}

PhysParams parse_params(const json& j) {
    PhysParams p;
    p.mu = get_num(j, "mu", "params.mu");
    p.lambda = get_num(j, "lambda", "params.lambda");
    p.kappa = get_num(j, "kappa", "params.kappa");
    p.a = get_num(j, "a", "params.a");
    p.gamma = get_num(j, "gamma", "params.gamma");
    p.rho_bar = get_num(j, "rho_bar", "params.rho_bar");
    return p;
}

GridConfig parse_grid(const json& j) {
    GridConfig g;
    g.dim = get_int(j, "dim", "grid.dim");
    g.n = get_int(j, "n", "grid.n");
    g.length = get_num(j, "length", "grid.length");
    return g;
}

InitSpec parse_init(const json& j) {
    InitSpec init;
    const std::string kind = get_str(j, "kind", "init.kind");
    if (kind == "mode_perturbation")
        init.kind = InitSpec::Kind::ModePerturbation;
    else if (kind == "mollified_sequence")
        init.kind = InitSpec::Kind::MollifiedSequence;
    else
        throw ConfigError("field 'init.kind' must be mode_perturbation or mollified_sequence");
    init.amplitude = get_num(j, "amplitude", "init.amplitude");
    init.seed = static_cast<std::uint64_t>(get_num_or(j, "seed", 0.0));
    init.mollify_scale = get_num_or(j, "mollify_scale", init.mollify_scale);
    init.profile_band = static_cast<int>(get_num_or(j, "profile_band", init.profile_band));
    if (auto it = j.find("modes"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("field 'init.modes' must be an array");
        for (const auto& entry : *it) {
            ModeEntry m;
            m.mode = get_int(entry, "mode", "init.modes[].mode");
            m.rho_coeff = get_num_or(entry, "rho_coeff", 1.0);
            m.u_coeff = get_num_or(entry, "u_coeff", 0.0);
            init.modes.push_back(m);
        }
    }
    return init;
}

TimeControls parse_time(const json& j, CapillaryForm* form) {
    TimeControls t;
    t.t_end = get_num(j, "t_end", "time.t_end");
    t.cfl = get_num_or(j, "cfl", t.cfl);
    t.dt_max = get_num(j, "dt_max", "time.dt_max");
    t.rho_floor = get_num(j, "rho_floor", "time.rho_floor");
    if (auto it = j.find("dealias_products"); it != j.end()) {
        if (!it->is_boolean())
            throw ConfigError("field 'time.dealias_products' must be a boolean");
        t.dealias_products = it->get<bool>();
    }
    if (form) {
        *form = CapillaryForm::Direct;
        if (auto it = j.find("capillary_form"); it != j.end()) {
            const std::string f = it->get<std::string>();
            if (f == "direct")
                *form = CapillaryForm::Direct;
            else if (f == "tensor_divergence")
                *form = CapillaryForm::TensorDivergence;
            else
                throw ConfigError(
                    "field 'time.capillary_form' must be direct or tensor_divergence");
        }
    }
    return t;
}

CutoffSpec parse_cutoff(const json& j) {
    CutoffSpec c;
    const std::string kind = get_str(j, "kind", "diagnostics.cutoff.kind");
    if (kind == "ones")
        c.kind = CutoffSpec::Kind::Ones;
    else if (kind == "smooth_bump")
        c.kind = CutoffSpec::Kind::SmoothBump;
    else
        throw ConfigError("field 'diagnostics.cutoff.kind' must be ones or smooth_bump");
    if (auto it = j.find("center"); it != j.end())
        for (const auto& v : *it) c.center.push_back(v.get<double>());
    c.radius = get_num_or(j, "radius", c.radius);
    return c;
}

DiagnosticsConfig parse_diagnostics(const json& j) {
    DiagnosticsConfig d;
    if (auto it = j.find("s_values"); it != j.end())
        for (const auto& v : *it) d.s_values.push_back(v.get<double>());
    d.sample_every = static_cast<int>(get_num_or(j, "sample_every", 1.0));
    if (auto it = j.find("cutoff"); it != j.end()) d.cutoff = parse_cutoff(*it);
    if (auto it = j.find("orlicz"); it != j.end()) {
        d.orlicz.p = get_num_or(*it, "p", 2.0);
        d.orlicz.q = get_num_or(*it, "q", 2.0);
        d.orlicz.delta = get_num_or(*it, "delta", 1.0);
    }
    if (auto it = j.find("store_trajectory"); it != j.end())
        d.store_trajectory = it->get<bool>();
    return d;
}

json parse_text(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("malformed JSON");
    return j;
}

// --- emission helpers (17 significant digits, fixed field order) ---

class JsonWriter {
public:
    void begin_object() { sep(); out_ += '{'; fresh_ = true; }
    void end_object() { out_ += '}'; fresh_ = false; }
    void begin_array() { sep(); out_ += '['; fresh_ = true; }
    void end_array() { out_ += ']'; fresh_ = false; }
    void key(const std::string& k) {
        sep();
        out_ += '"' + escape(k) + "\":";
        fresh_ = true;
    }
    void value(double v) { sep(); out_ += format_f64(v); fresh_ = false; }
    void value(int v) { sep(); out_ += std::to_string(v); fresh_ = false; }
    void value(long v) { sep(); out_ += std::to_string(v); fresh_ = false; }
    void value(std::uint64_t v) { sep(); out_ += std::to_string(v); fresh_ = false; }
    void value(bool v) { sep(); out_ += v ? "true" : "false"; fresh_ = false; }
    void value(const std::string& v) { sep(); out_ += '"' + escape(v) + '"'; fresh_ = false; }
    void value(const char* v) { value(std::string(v)); }
    void raw(const std::string& json_text) { sep(); out_ += json_text; fresh_ = false; }
    const std::string& str() const { return out_; }

private:
    void sep() {
        if (!fresh_ && !out_.empty()) {
            const char last = out_.back();
            if (last != '{' && last != '[' && last != ':') out_ += ',';
        }
        fresh_ = false;
    }
    std::string out_;
    bool fresh_ = true;
};

void emit_params(JsonWriter& w, const PhysParams& p) {
    w.begin_object();
    w.key("mu"); w.value(p.mu);
    w.key("lambda"); w.value(p.lambda);
    w.key("kappa"); w.value(p.kappa);
    w.key("a"); w.value(p.a);
    w.key("gamma"); w.value(p.gamma);
    w.key("rho_bar"); w.value(p.rho_bar);
    w.end_object();
}

void emit_grid(JsonWriter& w, const GridConfig& g) {
    w.begin_object();
    w.key("dim"); w.value(g.dim);
    w.key("n"); w.value(g.n);
    w.key("length"); w.value(g.length);
    w.end_object();
}

void emit_init(JsonWriter& w, const InitSpec& init) {
    w.begin_object();
    w.key("kind");
    w.value(init.kind == InitSpec::Kind::ModePerturbation ? "mode_perturbation"
                                                          : "mollified_sequence");
    w.key("amplitude"); w.value(init.amplitude);
    w.key("modes");
    w.begin_array();
    for (const auto& m : init.modes) {
        w.begin_object();
        w.key("mode"); w.value(m.mode);
        w.key("rho_coeff"); w.value(m.rho_coeff);
        w.key("u_coeff"); w.value(m.u_coeff);
        w.end_object();
    }
    w.end_array();
    w.key("seed"); w.value(init.seed);
    w.key("mollify_scale"); w.value(init.mollify_scale);
    w.key("profile_band"); w.value(init.profile_band);
    w.end_object();
}

void emit_time(JsonWriter& w, const TimeControls& t, CapillaryForm form) {
    w.begin_object();
    w.key("t_end"); w.value(t.t_end);
    w.key("cfl"); w.value(t.cfl);
    w.key("dt_max"); w.value(t.dt_max);
    w.key("rho_floor"); w.value(t.rho_floor);
    w.key("dealias_products"); w.value(t.dealias_products);
    w.key("capillary_form");
    w.value(form == CapillaryForm::Direct ? "direct" : "tensor_divergence");
    w.end_object();
}

void emit_diagnostics(JsonWriter& w, const DiagnosticsConfig& d) {
    w.begin_object();
    w.key("s_values");
    w.begin_array();
    for (double s : d.s_values) w.value(s);
    w.end_array();
    w.key("sample_every"); w.value(d.sample_every);
    w.key("cutoff");
    w.begin_object();
    w.key("kind");
    w.value(d.cutoff.kind == CutoffSpec::Kind::Ones ? "ones" : "smooth_bump");
    w.key("center");
    w.begin_array();
    for (double c : d.cutoff.center) w.value(c);
    w.end_array();
    w.key("radius"); w.value(d.cutoff.radius);
    w.end_object();
    w.key("orlicz");
    w.begin_object();
    w.key("p"); w.value(d.orlicz.p);
    w.key("q"); w.value(d.orlicz.q);
    w.key("delta"); w.value(d.orlicz.delta);
    w.end_object();
    w.key("store_trajectory"); w.value(d.store_trajectory);
    w.end_object();
}

void emit_pairs(JsonWriter& w, const std::vector<std::pair<std::string, double>>& metrics,
                const std::vector<std::pair<std::string, std::string>>& verdicts) {
    w.key("metrics");
    w.begin_object();
    for (const auto& [k, v] : metrics) { w.key(k); w.value(v); }
    w.end_object();
    w.key("verdicts");
    w.begin_object();
    for (const auto& [k, v] : verdicts) {
        w.key(k);
        if (v == "true") w.value(true);
        else if (v == "false") w.value(false);
        else w.value(v);
    }
    w.end_object();
}

void le_write(std::ofstream& os, std::span<const double> values) {
    for (double v : values) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
        os.write(bytes, 8);
    }
}

void le_read(std::ifstream& is, std::span<double> values) {
    for (double& v : values) {
        unsigned char bytes[8];
        is.read(reinterpret_cast<char*>(bytes), 8);
        if (!is) throw std::ios_base::failure("snapshot: truncated data file");
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        v = std::bit_cast<double>(bits);
    }
}

}  // namespace

void RunConfig::validate() const {
    try {
        Grid::make(grid.dim, grid.n, grid.length);
        params.validate();
        time.validate();
        init.validate();
        diagnostics.validate(grid.dim);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (output.snapshot_every < 0) throw ConfigError("output.snapshot_every must be >= 0");
}

RunConfig parse_run_config(const std::string& json_text) {
    const json j = parse_text(json_text);
    RunConfig c;
    c.grid = parse_grid(require(j, "grid", "grid"));
    c.params = parse_params(require(j, "params", "params"));
    c.init = parse_init(require(j, "init", "init"));
    c.time = parse_time(require(j, "time", "time"), &c.form);
    // The density-deviation gauge defaults to L^gamma_2 (p = 2, q = gamma)
    // unless spelled out.
    c.diagnostics.orlicz.q = std::max(c.params.gamma, 1.0 + 1e-9);
    if (auto it = j.find("diagnostics"); it != j.end()) {
        const bool explicit_orlicz = it->contains("orlicz");
        DiagnosticsConfig parsed = parse_diagnostics(*it);
        if (!explicit_orlicz) parsed.orlicz = c.diagnostics.orlicz;
        c.diagnostics = parsed;
    }
    if (auto it = j.find("output"); it != j.end()) {
        if (auto d = it->find("directory"); d != it->end()) c.output.directory = d->get<std::string>();
        c.output.snapshot_every = static_cast<int>(get_num_or(*it, "snapshot_every", 0.0));
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::ios_base::failure("cannot read config file: " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str());
}

std::string emit_run_config(const RunConfig& c) {
    JsonWriter w;
    w.begin_object();
    w.key("grid"); emit_grid(w, c.grid);
    w.key("params"); emit_params(w, c.params);
    w.key("init"); emit_init(w, c.init);
    w.key("time"); emit_time(w, c.time, c.form);
    w.key("diagnostics"); emit_diagnostics(w, c.diagnostics);
    w.key("output");
    w.begin_object();
    w.key("directory"); w.value(c.output.directory);
    w.key("snapshot_every"); w.value(c.output.snapshot_every);
    w.end_object();
    w.end_object();
    return w.str();
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
    const json j = parse_text(json_text);
    ExperimentSpec spec;
    spec.id = get_str(j, "id", "id");
    const GridConfig g = parse_grid(require(j, "grid", "grid"));
    spec.dim = g.dim;
    spec.n = g.n;
    spec.length = g.length;
    spec.params = parse_params(require(j, "params", "params"));
    spec.init = parse_init(require(j, "init", "init"));
    spec.time = parse_time(require(j, "time", "time"), &spec.form);
    spec.diagnostics.orlicz.q = std::max(spec.params.gamma, 1.0 + 1e-9);
    if (auto it = j.find("diagnostics"); it != j.end()) {
        const bool explicit_orlicz = it->contains("orlicz");
        DiagnosticsConfig parsed = parse_diagnostics(*it);
        if (!explicit_orlicz) parsed.orlicz = spec.diagnostics.orlicz;
        spec.diagnostics = parsed;
    }
    if (auto it = j.find("scan"); it != j.end()) {
        if (auto v = it->find("amplitudes"); v != it->end())
            for (const auto& x : *v) spec.scan.amplitudes.push_back(x.get<double>());
        if (auto v = it->find("s_values"); v != it->end())
            for (const auto& x : *v) spec.scan.s_values.push_back(x.get<double>());
        if (auto v = it->find("mollify_scales"); v != it->end())
            for (const auto& x : *v) spec.scan.mollify_scales.push_back(x.get<double>());
        spec.scan.linf_bound = get_num_or(*it, "linf_bound", 0.0);
    }
    try {
        spec.params.validate();
        spec.time.validate();
        spec.init.validate();
        spec.diagnostics.validate(spec.dim);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::ios_base::failure("cannot read spec file: " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_experiment_spec(ss.str());
}

std::string format_f64(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string diagnostics_csv(const RunReport& report, std::span<const double> s_values) {
    std::string out = "t,energy_gamma,dissipation_cum,budget_drift,min_rho,sup_inv_rho,"
                      "h1_deviation,orlicz_dev,j_gamma_mass";
    for (double s : s_values) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ",gain_s%g", s);
        out += buf;
    }
    out += '\n';
    for (const auto& r : report.records) {
        out += format_f64(r.t);
        for (double v : {r.energy_gamma, r.dissipation_cum, r.budget_drift, r.min_rho,
                         r.sup_inv_rho, r.h1_deviation, r.orlicz_dev, r.j_gamma_mass}) {
            out += ',';
            out += format_f64(v);
        }
        for (double v : r.gain_samples) {
            out += ',';
            out += format_f64(v);
        }
        out += '\n';
    }
    return out;
}

void write_diagnostics_csv(const std::filesystem::path& path, const RunReport& report,
                           std::span<const double> s_values) {
    write_text_file(path, diagnostics_csv(report, s_values));
}

std::string run_report_json(const RunReport& report, const RunConfig& config) {
    JsonWriter w;
    w.begin_object();
    w.key("completed"); w.value(!report.vacuum_abort);
    w.key("vacuum_abort"); w.value(report.vacuum_abort);
    if (report.vacuum_abort) {
        w.key("abort_time"); w.value(report.abort_time);
        w.key("abort_site"); w.value(static_cast<long>(report.abort_site));
        w.key("abort_min_rho"); w.value(report.abort_min_rho);
    }
    w.key("final_time"); w.value(report.final_time);
    w.key("steps"); w.value(report.step_count);
    w.key("samples"); w.value(static_cast<long>(report.records.size()));
    w.key("initial_energy"); w.value(report.initial_energy);
    w.key("initial_mass"); w.value(report.initial_mass);
    w.key("max_mass_drift_rel"); w.value(report.max_mass_drift_rel);
    w.key("max_momentum_drift"); w.value(report.max_momentum_drift);
    double max_drift = 0.0;
    double sup_inv = 0.0;
    double sup_h1 = 0.0;
    for (const auto& rec : report.records) {
        max_drift = std::max(max_drift, rec.budget_drift);
        sup_inv = std::max(sup_inv, rec.sup_inv_rho);
        sup_h1 = std::max(sup_h1, rec.h1_deviation);
    }
    w.key("max_budget_drift"); w.value(max_drift);
    w.key("sup_inv_rho"); w.value(sup_inv);
    w.key("sup_h1_deviation"); w.value(sup_h1);
    emit_pairs(w, report.metrics, report.verdicts);
    w.key("config"); w.raw(emit_run_config(config));
    w.end_object();
    return w.str();
}

std::string experiment_report_json(const ExperimentReport& report) {
    JsonWriter w;
    w.begin_object();
    w.key("id"); w.value(report.id);
    emit_pairs(w, report.metrics, report.verdicts);
    w.key("members");
    w.begin_array();
    for (std::size_t m = 0; m < report.members.size(); ++m) {
        const RunReport& mem = report.members[m];
        w.begin_object();
        w.key("label");
        w.value(m < report.member_labels.size() ? report.member_labels[m] : std::to_string(m));
        w.key("vacuum_abort"); w.value(mem.vacuum_abort);
        w.key("final_time"); w.value(mem.final_time);
        w.key("steps"); w.value(mem.step_count);
        w.key("initial_energy"); w.value(mem.initial_energy);
        w.key("max_mass_drift_rel"); w.value(mem.max_mass_drift_rel);
        emit_pairs(w, mem.metrics, mem.verdicts);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::ios_base::failure("cannot open for writing: " + path.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::ios_base::failure("write failed: " + path.string());
}

void write_snapshot(const std::filesystem::path& directory, const std::string& stem,
                    const State& state) {
    const Grid& grid = state.rho.grid();
    std::vector<std::string> field_names = {"rho"};
    for (int c = 0; c < state.u.components(); ++c)
        field_names.push_back("u" + std::to_string(c));

    std::string sidecar = "nsk-snapshot 1\n";
    sidecar += "time " + format_f64(state.t) + "\n";
    sidecar += "dim " + std::to_string(grid.dim()) + "\n";
    sidecar += "n " + std::to_string(grid.n()) + "\n";
    sidecar += "length " + format_f64(grid.length()) + "\n";
    sidecar += "layout row-major float64 little-endian\n";
    sidecar += "fields";
    for (const auto& f : field_names) sidecar += " " + f;
    sidecar += "\nfiles";
    for (const auto& f : field_names) sidecar += " " + stem + "." + f + ".f64";
    sidecar += "\n";

    auto write_bin = [&](const std::string& name, std::span<const double> values) {
        std::ofstream os(directory / name, std::ios::binary);
        if (!os) throw std::ios_base::failure("cannot open for writing: " + name);
        le_write(os, values);
        if (!os) throw std::ios_base::failure("write failed: " + name);
    };
    write_bin(stem + ".rho.f64", state.rho.comp(0));
    for (int c = 0; c < state.u.components(); ++c)
        write_bin(stem + ".u" + std::to_string(c) + ".f64", state.u.comp(c));
    write_text_file(directory / (stem + ".txt"), sidecar);
}

State read_snapshot(const std::filesystem::path& sidecar_path) {
    std::ifstream is(sidecar_path);
    if (!is) throw std::ios_base::failure("cannot read sidecar: " + sidecar_path.string());
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "nsk-snapshot" || version != 1)
        throw std::ios_base::failure("not an nsk snapshot sidecar");
    double time = 0.0;
    int dim = 0;
    int n = 0;
    double length = 0.0;
    std::vector<std::string> files;
    std::string token;
    while (is >> token) {
        if (token == "time") is >> time;
        else if (token == "dim") is >> dim;
        else if (token == "n") is >> n;
        else if (token == "length") is >> length;
        else if (token == "files") {
            std::string f;
            while (is >> f) files.push_back(f);
        }
    }
    if (files.empty()) throw std::ios_base::failure("sidecar lists no data files");
    GridPtr grid = Grid::make(dim, n, length);
    Field rho = Field::scalar(grid);
    Field u = Field::vector(grid);
    const auto base = sidecar_path.parent_path();
    auto read_bin = [&](const std::string& name, std::span<double> values) {
        std::ifstream bs(base / name, std::ios::binary);
        if (!bs) throw std::ios_base::failure("cannot read data file: " + name);
        le_read(bs, values);
    };
    read_bin(files.at(0), rho.comp(0));
    for (int c = 0; c < u.components(); ++c)
        read_bin(files.at(1 + c), u.comp(c));
    return State(time, std::move(rho), std::move(u));
}

}  // namespace nsk
