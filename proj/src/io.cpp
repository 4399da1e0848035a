#include "ecmsense/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ecmsense {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    const std::string t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) {
        throw ParseError(where + ": cannot parse number '" + t + "'");
    }
    return v;
}

long long parse_int(const std::string& s, const std::string& where) {
    const double v = parse_double(s, where);
    if (v != std::floor(v)) throw ParseError(where + ": expected integer");
    return static_cast<long long>(v);
}

bool parse_bool(const std::string& s, const std::string& where) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ParseError(where + ": expected boolean, got '" + t + "'");
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

std::string dir_of(const std::string& path) {
    const auto pos = path.find_last_of('/');
    return pos == std::string::npos ? "" : path.substr(0, pos);
}

std::string resolve_path(const std::string& base, const std::string& p) {
    if (p.empty() || p.front() == '/' || base.empty()) return p;
    return base + "/" + p;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Drive cycle CSV
// ---------------------------------------------------------------------------

LoadedCycle load_drive_cycle(const std::string& path, double resample_dt) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path + ": empty file");
    const auto header = split(trim(lines[0]), ',');
    if (header.size() < 2 || trim(header[0]) != "time_s" ||
        trim(header[1]) != "current_a") {
        throw ParseError(path + ": expected header time_s,current_a[,voltage_v]");
    }
    const bool has_voltage = header.size() >= 3 && trim(header[2]) == "voltage_v";
    if (header.size() >= 3 && !has_voltage) {
        throw ParseError(path + ": third column must be voltage_v");
    }

    std::vector<double> t, i, v;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const std::string row = trim(lines[ln]);
        if (row.empty() || row.front() == '#') continue;
        const auto cols = split(row, ',');
        const std::string where = path + ":" + std::to_string(ln + 1);
        if (cols.size() < (has_voltage ? 3u : 2u)) {
            throw ParseError(where + ": missing column");
        }
        t.push_back(parse_double(cols[0], where));
        i.push_back(parse_double(cols[1], where));
        if (has_voltage) v.push_back(parse_double(cols[2], where));
        if (t.size() >= 2 && t[t.size() - 1] <= t[t.size() - 2]) {
            throw ParseError(where + ": time not strictly increasing");
        }
    }
    if (t.size() < 2) throw ParseError(path + ": need at least 2 data rows");

    double dt = resample_dt;
    if (dt <= 0.0) {
        std::vector<double> diffs(t.size() - 1);
        for (std::size_t k = 1; k < t.size(); ++k) diffs[k - 1] = t[k] - t[k - 1];
        std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
        dt = diffs[diffs.size() / 2];
    }

    LoadedCycle out;
    out.original_rows = t.size();
    out.profile.dt = dt;
    out.profile.start_time = t.front();
    const double span = t.back() - t.front();
    const std::size_t n =
        static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;
    out.profile.samples.resize(n);
    std::vector<double> vres(has_voltage ? n : 0);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = t.front() + static_cast<double>(k) * dt;
        while (j + 1 < t.size() && t[j + 1] <= tk + 1e-9 * dt) ++j;
        out.profile.samples[k] = i[j];
        if (has_voltage) vres[k] = v[j];
    }
    if (has_voltage) {
        out.voltage = VoltageTrace{dt, std::move(vres)};
    }
    // A spacing beyond 1.5 dt means at least one expected sample is missing;
    // the hold fills it, but the caller should know.
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double gap = t[k] - t[k - 1];
        if (gap > 1.5 * dt) {
            out.warnings.push_back("gap of " + format_double(gap) + " s before t=" +
                                   format_double(t[k]) + " (line " +
                                   std::to_string(k + 2) + ")");
        }
    }
    return out;
}

void save_drive_cycle(const std::string& path, const CurrentProfile& profile,
                      const VoltageTrace* voltage) {
    auto out = open_out(path);
    out << "time_s,current_a" << (voltage ? ",voltage_v" : "") << "\n";
    for (std::size_t k = 0; k < profile.samples.size(); ++k) {
        out << format_double(profile.start_time + static_cast<double>(k) * profile.dt)
            << ',' << format_double(profile.samples[k]);
        if (voltage) out << ',' << format_double(voltage->samples[k]);
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// OCV sweep CSV and curve file
// ---------------------------------------------------------------------------

OcvSweep load_ocv_sweep(const std::string& path, SweepDirection direction) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path + ": empty file");
    const auto header = split(trim(lines[0]), ',');
    if (header.size() < 2 || trim(header[0]) != "soc_percent" ||
        trim(header[1]) != "voltage_v") {
        throw ParseError(path + ": expected header soc_percent,voltage_v");
    }
    OcvSweep sweep;
    sweep.direction = direction;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const std::string row = trim(lines[ln]);
        if (row.empty() || row.front() == '#') continue;
        const auto cols = split(row, ',');
        const std::string where = path + ":" + std::to_string(ln + 1);
        if (cols.size() < 2) throw ParseError(where + ": missing column");
        sweep.grid.push_back(parse_double(cols[0], where) / 100.0);
        sweep.voltages.push_back(parse_double(cols[1], where));
    }
    if (sweep.grid.size() < 2) throw ParseError(path + ": need at least 2 rows");
    return sweep;
}

void save_ocv_sweep(const std::string& path, const OcvSweep& sweep) {
    auto out = open_out(path);
    out << "soc_percent,voltage_v\n";
    for (std::size_t k = 0; k < sweep.grid.size(); ++k) {
        out << format_double(sweep.grid[k] * 100.0) << ','
            << format_double(sweep.voltages[k]) << "\n";
    }
}

OcvCurve load_ocv_curve(const std::string& path) {
    OcvCurve curve;
    curve.coefficients.clear();
    int degree = -1;
    std::vector<double> coeffs;
    bool have_lo = false;
    bool have_hi = false;
    const auto lines = read_lines(path);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string row = trim(lines[ln]);
        if (row.empty() || row.front() == '#') continue;
        std::istringstream ss(row);
        std::string key;
        ss >> key;
        std::string rest;
        std::getline(ss, rest);
        const std::string where = path + ":" + std::to_string(ln + 1);
        if (key == "degree") {
            degree = static_cast<int>(parse_int(rest, where));
        } else if (key == "z_lo_pct") {
            curve.z_lo = parse_double(rest, where) / 100.0;
            have_lo = true;
        } else if (key == "z_hi_pct") {
            curve.z_hi = parse_double(rest, where) / 100.0;
            have_hi = true;
        } else if (!key.empty() && key[0] == 'a') {
            coeffs.push_back(parse_double(rest, where));
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    if (degree < 1 || !have_lo || !have_hi ||
        coeffs.size() != static_cast<std::size_t>(degree) + 1) {
        throw ParseError(path + ": incomplete curve file");
    }
    curve.coefficients = std::move(coeffs);
    return curve;
}

void save_ocv_curve(const std::string& path, const OcvCurve& curve) {
    auto out = open_out(path);
    out << "# ecmsense OCV curve: V(Z) = sum a_k Z^k, Z the SOC fraction\n";
    out << "degree " << curve.degree() << "\n";
    out << "z_lo_pct " << format_double(curve.z_lo * 100.0) << "\n";
    out << "z_hi_pct " << format_double(curve.z_hi * 100.0) << "\n";
    for (std::size_t k = 0; k < curve.coefficients.size(); ++k) {
        out << 'a' << k << ' ' << format_double(curve.coefficients[k]) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Schedule file
// ---------------------------------------------------------------------------

ParameterSchedule load_schedule(const std::string& path) {
    std::vector<std::pair<SocInterval, ParameterSet>> entries;
    std::array<bool, kNumParams> mask{};
    ScheduleInterp interp = ScheduleInterp::piecewise_constant;
    const auto lines = read_lines(path);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string row = trim(lines[ln]);
        if (row.empty() || row.front() == '#') continue;
        std::istringstream ss(row);
        std::string key;
        ss >> key;
        const std::string where = path + ":" + std::to_string(ln + 1);
        if (key == "interval") {
            double hi, lo, tau1, tau2, c1, c2, rs;
            if (!(ss >> hi >> lo >> tau1 >> tau2 >> c1 >> c2 >> rs)) {
                throw ParseError(where + ": expected hi lo tau1 tau2 c1 c2 rs");
            }
            entries.emplace_back(SocInterval{hi, lo},
                                 ParameterSet(tau1, tau2, c1, c2, rs));
        } else if (key == "fixed") {
            std::string name;
            while (ss >> name) mask[param_index(name)] = true;
        } else if (key == "interp") {
            std::string mode;
            ss >> mode;
            if (mode == "constant") {
                interp = ScheduleInterp::piecewise_constant;
            } else if (mode == "linear") {
                interp = ScheduleInterp::midpoint_linear;
            } else {
                throw ParseError(where + ": interp must be constant or linear");
            }
        } else if (key == "means" || key == "stdevs") {
            // derived rows; recomputed from the intervals on load
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    if (entries.empty()) throw ParseError(path + ": no intervals");
    return ParameterSchedule(std::move(entries), mask, interp);
}

void save_schedule(const std::string& path, const ParameterSchedule& schedule) {
    auto out = open_out(path);
    out << "# ecmsense parameter schedule\n";
    out << "# interval hi_pct lo_pct tau1_s tau2_s c1_f c2_f rs_ohm\n";
    out << "interp "
        << (schedule.interp() == ScheduleInterp::piecewise_constant ? "constant"
                                                                    : "linear")
        << "\n";
    std::string fixed = "fixed";
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (schedule.fixed_mask()[i]) fixed += std::string(" ") + kParamNames[i];
    }
    out << fixed << "\n";
    for (const auto& [iv, p] : schedule.entries()) {
        out << "interval " << format_double(iv.hi_pct) << ' ' << format_double(iv.lo_pct);
        for (double v : p.to_array()) out << ' ' << format_double(v);
        out << "\n";
    }
    out << "means";
    for (double v : schedule.means()) out << ' ' << format_double(v);
    out << "\nstdevs";
    for (double v : schedule.stdevs()) out << ' ' << format_double(v);
    out << "\n";
}

// ---------------------------------------------------------------------------
// Sensitivity CSVs
// ---------------------------------------------------------------------------

std::string interval_label(const SocInterval& interval) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g-%g", interval.hi_pct, interval.lo_pct);
    return buf;
}

void save_sensitivity_csv(const std::string& path, const SensitivityReport& report) {
    auto out = open_out(path);
    out << "soc_interval,parameter,morris_mean_v,enhanced_mean_v,stdev_v,n_effective\n";
    for (std::size_t j = 0; j < report.intervals.size(); ++j) {
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const SensitivityCell& c = report.cell(j, i);
            out << interval_label(report.intervals[j]) << ',' << kParamNames[i] << ','
                << format_double(c.morris_mean) << ',' << format_double(c.enhanced_mean)
                << ',' << format_double(c.stdev) << ',' << c.n_effective << "\n";
        }
    }
}

void save_sensitivity_runs_csv(const std::string& path,
                               const SensitivityReport& report) {
    auto out = open_out(path);
    out << "soc_interval,parameter,run,xi_v\n";
    for (std::size_t j = 0; j < report.intervals.size(); ++j) {
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const SensitivityCell& c = report.cell(j, i);
            for (std::size_t run = 0; run < c.xi.size(); ++run) {
                if (!c.valid[run]) continue;
                out << interval_label(report.intervals[j]) << ',' << kParamNames[i]
                    << ',' << run << ',' << format_double(c.xi[run]) << "\n";
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto eq = row.find('=');
        const std::string where = "config line " + std::to_string(ln);
        if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
        const std::string key = trim(row.substr(0, eq));
        const std::string value = trim(row.substr(eq + 1));

        auto path = [&] { return resolve_path(base_dir, value); };
        if (key == "cycle_csv") cfg.cycle_csv = path();
        else if (key == "validation_cycle_csv") cfg.validation_cycle_csv = path();
        else if (key == "morris_cycle_csv") cfg.morris_cycle_csv = path();
        else if (key == "ocv_charge_csv") cfg.ocv_charge_csv = path();
        else if (key == "ocv_discharge_csv") cfg.ocv_discharge_csv = path();
        else if (key == "ocv_sweep_csv") cfg.ocv_sweep_csv = path();
        else if (key == "ocv_curve") cfg.ocv_curve = path();
        else if (key == "schedule") cfg.schedule = path();
        else if (key == "capacity_mah") cfg.capacity_mah = parse_double(value, where);
        else if (key == "z0_pct") cfg.z0_pct = parse_double(value, where);
        else if (key == "soc_edges_pct") {
            cfg.soc_edges_pct.clear();
            for (const auto& tok : split(value, ',')) {
                cfg.soc_edges_pct.push_back(parse_double(tok, where));
            }
        } else if (key == "resample_dt_s") cfg.resample_dt_s = parse_double(value, where);
        else if (key == "rest_current_a") cfg.rest_current_a = parse_double(value, where);
        else if (key == "rest_min_duration_s") {
            cfg.rest_min_duration_s = parse_double(value, where);
        } else if (key == "ocv_degree") {
            cfg.ocv_degree = static_cast<int>(parse_int(value, where));
        } else if (key == "ident_max_iterations") {
            cfg.ident_max_iterations = static_cast<int>(parse_int(value, where));
        } else if (key == "ident_rel_objective_tol") {
            cfg.ident_rel_objective_tol = parse_double(value, where);
        } else if (key == "ident_rel_step_tol") {
            cfg.ident_rel_step_tol = parse_double(value, where);
        } else if (key == "init_tau1") cfg.init_guess[kTau1] = parse_double(value, where);
        else if (key == "init_tau2") cfg.init_guess[kTau2] = parse_double(value, where);
        else if (key == "init_c1") cfg.init_guess[kC1] = parse_double(value, where);
        else if (key == "init_c2") cfg.init_guess[kC2] = parse_double(value, where);
        else if (key == "init_rs") cfg.init_guess[kRs] = parse_double(value, where);
        else if (key == "morris_runs") {
            cfg.morris_runs = static_cast<int>(parse_int(value, where));
        } else if (key == "morris_delta") cfg.morris_delta = parse_double(value, where);
        else if (key == "morris_reduction") {
            if (value == "mean") cfg.morris_reduction = TimeReduction::signed_mean;
            else if (value == "rms") cfg.morris_reduction = TimeReduction::time_rms;
            else throw ParseError(where + ": morris_reduction must be mean or rms");
        } else if (key == "morris_resample_invalid") {
            cfg.morris_resample_invalid = parse_bool(value, where);
        } else if (key == "case2_fixed") {
            cfg.case2_fixed.fill(false);
            for (const auto& tok : split(value, ',')) {
                const std::string name = trim(tok);
                if (!name.empty()) cfg.case2_fixed[param_index(name)] = true;
            }
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(
                std::strtoull(value.c_str(), nullptr, 10));
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(parse_int(value, where));
        } else if (key == "schedule_interp") {
            if (value == "constant") cfg.schedule_interp = ScheduleInterp::piecewise_constant;
            else if (value == "linear") cfg.schedule_interp = ScheduleInterp::midpoint_linear;
            else throw ParseError(where + ": schedule_interp must be constant or linear");
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), dir_of(path));
}

std::string serialize_run_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "# ecmsense run configuration\n";
    auto put = [&](const char* key, const std::string& value) {
        if (!value.empty()) out << key << " = " << value << "\n";
    };
    put("cycle_csv", cfg.cycle_csv);
    put("validation_cycle_csv", cfg.validation_cycle_csv);
    put("morris_cycle_csv", cfg.morris_cycle_csv);
    put("ocv_charge_csv", cfg.ocv_charge_csv);
    put("ocv_discharge_csv", cfg.ocv_discharge_csv);
    put("ocv_sweep_csv", cfg.ocv_sweep_csv);
    put("ocv_curve", cfg.ocv_curve);
    put("schedule", cfg.schedule);
    out << "capacity_mah = " << format_double(cfg.capacity_mah) << "\n";
    out << "z0_pct = " << format_double(cfg.z0_pct) << "\n";
    out << "soc_edges_pct = ";
    for (std::size_t i = 0; i < cfg.soc_edges_pct.size(); ++i) {
        out << (i ? "," : "") << format_double(cfg.soc_edges_pct[i]);
    }
    out << "\n";
    out << "resample_dt_s = " << format_double(cfg.resample_dt_s) << "\n";
    out << "rest_current_a = " << format_double(cfg.rest_current_a) << "\n";
    out << "rest_min_duration_s = " << format_double(cfg.rest_min_duration_s) << "\n";
    out << "ocv_degree = " << cfg.ocv_degree << "\n";
    out << "ident_max_iterations = " << cfg.ident_max_iterations << "\n";
    out << "ident_rel_objective_tol = " << format_double(cfg.ident_rel_objective_tol)
        << "\n";
    out << "ident_rel_step_tol = " << format_double(cfg.ident_rel_step_tol) << "\n";
    static constexpr std::array<const char*, kNumParams> init_keys{
        "init_tau1", "init_tau2", "init_c1", "init_c2", "init_rs"};
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (cfg.init_guess[i] > 0.0) {
            out << init_keys[i] << " = " << format_double(cfg.init_guess[i]) << "\n";
        }
    }
    out << "morris_runs = " << cfg.morris_runs << "\n";
    out << "morris_delta = " << format_double(cfg.morris_delta) << "\n";
    out << "morris_reduction = " << to_string(cfg.morris_reduction) << "\n";
    out << "morris_resample_invalid = "
        << (cfg.morris_resample_invalid ? "true" : "false") << "\n";
    std::string fixed;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (cfg.case2_fixed[i]) fixed += (fixed.empty() ? "" : ",") + std::string(kParamNames[i]);
    }
    if (!fixed.empty()) out << "case2_fixed = " << fixed << "\n";
    if (cfg.seed) out << "seed = " << *cfg.seed << "\n";
    out << "workers = " << cfg.workers << "\n";
    out << "schedule_interp = "
        << (cfg.schedule_interp == ScheduleInterp::piecewise_constant ? "constant"
                                                                      : "linear")
        << "\n";
    return out.str();
}

void save_summary(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
    auto out = open_out(path);
    for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

}  // namespace ecmsense
