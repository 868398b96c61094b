// mqscat: scattering rates, gate error budgets, wavelength scans, and the
// simulated decay-rate measurement pipeline for the Ca+ metastable qubit.
//
// Exit codes: 0 success, 2 usage error, 3 physics-domain error (e.g. a beam
// inside the resonance guard), 4 regression failure in `reproduce`.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <mqscatter/mqscatter.hpp>

using nlohmann::json;
using namespace mqs;

namespace {

constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::ostringstream hex;
    hex << std::hex << fnv1a(ss.str());
    return hex.str();
}

// Sidecar manifest: everything needed to reproduce an output file.
void write_manifest(const std::string& output_path, const std::string& command,
                    const json& resolved_config, const std::string& species_path,
                    std::uint64_t seed) {
    json m;
    m["command"] = command;
    m["config"] = resolved_config;
    m["species_file"] = species_path;
    m["species_hash"] = file_hash(species_path);
    m["seed"] = seed;
    m["tool_version"] = kVersion;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    m["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();
    std::ofstream out(output_path + ".manifest.json");
    out << m.dump(2) << '\n';
}

int parse_polarization(const std::string& s) {
    if (s == "sigma-" || s == "sm") return -1;
    if (s == "pi") return 0;
    if (s == "sigma+" || s == "sp") return +1;
    throw CLI::ValidationError("--pol must be sigma-, pi, or sigma+");
}

HalfInt parse_m(std::string s) {
    if (!s.empty() && s.front() == '+') s.erase(0, 1);
    const auto slash = s.find('/');
    if (slash == std::string::npos) return HalfInt::whole(std::stoll(s));
    if (s.substr(slash + 1) != "2") throw CLI::ValidationError("bad m value: " + s);
    return HalfInt::from_twice(std::stoll(s.substr(0, slash)));
}

std::string m_str(HalfInt m) {
    std::string s = m.str();
    if (m.twice() > 0) s.insert(0, "+");
    return s;
}

json budget_json(const ErrorBudget& eb) {
    return json{{"p_raman", eb.p_raman},
                {"p_leak_S", eb.p_leak_S},
                {"p_leak_D3", eb.p_leak_D3},
                {"p_leak_D5_outside", eb.p_leak_D5_outside},
                {"p_bitflip", eb.p_bitflip},
                {"rayleigh_decoherence_bound", eb.rayleigh_decoherence_bound},
                {"recoil_bound", eb.recoil_bound},
                {"rabi_frequency_rad_s", eb.rabi_frequency},
                {"gate_time_s", eb.gate_time}};
}

json dataset_json(const Dataset& data, const ProtocolConfig& cfg) {
    json recs = json::array();
    for (const auto& r : data.records)
        recs.push_back({{"delay_s", r.delay_s},
                        {"n_trials", r.n_trials},
                        {"n_survived", r.n_survived},
                        {"n_exited", r.n_exited},
                        {"n_discarded", r.n_discarded},
                        {"histogram", r.histogram}});
    return json{{"records", recs},
                {"config_hash", data.config_hash},
                {"seed", data.seed},
                {"intensity_w_m2", cfg.laser.intensity},
                {"initial_twice_m", cfg.initial.mJ.twice()}};
}

Dataset dataset_from_json(const json& j, double* intensity) {
    Dataset d;
    d.seed = j.value("seed", std::uint64_t{0});
    d.config_hash = j.value("config_hash", "");
    if (intensity) *intensity = j.value("intensity_w_m2", 0.0);
    for (const auto& r : j.at("records")) {
        DelayRecord rec;
        rec.delay_s = r.at("delay_s").get<double>();
        rec.n_trials = r.at("n_trials").get<std::int64_t>();
        rec.n_survived = r.at("n_survived").get<std::int64_t>();
        rec.n_exited = r.at("n_exited").get<std::int64_t>();
        rec.n_discarded = r.at("n_discarded").get<std::int64_t>();
        if (r.contains("histogram"))
            for (int i = 0; i < 4; ++i) rec.histogram[i] = r["histogram"][i];
        d.records.push_back(rec);
    }
    return d;
}

struct CommonArgs {
    std::string species_path;
    SpeciesData load() const { return load_species(species_path); }
};

void add_species_option(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--species", args.species_path, "species JSON file")
        ->default_val(default_species_path());
}

// ---------------------------------------------------------------- rates ----

int cmd_rates(const CommonArgs& common, int pol, HalfInt m, double wavelength,
              double intensity, double power, double waist,
              const std::string& format, const std::string& output) {
    const auto sp = common.load();
    if (power > 0.0) intensity = intensity_from_power(power, waist);
    const Sublevel initial{ManifoldLabel::D52, m};
    const auto laser = LaserField::pure(pol, wavelength, intensity);
    const auto breakdown = rate_breakdown(initial, laser, sp);
    const auto channels = enumerate_channels(initial, laser, sp);
    const std::string pol_name = pol == -1 ? "sigma-" : (pol == 0 ? "pi" : "sigma+");

    std::ostringstream body;
    if (format == "csv") {
        body << "initial_m,polarization,final_label,final_m,rate_per_intensity_SI\n";
        for (const auto& ch : channels)
            body << m_str(ch.initial.mJ) << ',' << pol_name << ','
                 << to_string(ch.final_state.manifold) << ','
                 << m_str(ch.final_state.mJ) << ',' << std::scientific
                 << ch.rate_per_intensity << '\n';
    } else if (format == "json") {
        json j;
        j["initial_m"] = m_str(m);
        j["polarization"] = pol_name;
        j["wavelength_m"] = wavelength;
        j["gamma_SD_per_intensity_hz_w_m2"] = breakdown.gamma_SD;
        j["gamma_elastic_per_intensity"] = breakdown.gamma_elastic;
        j["gamma_raman_per_intensity"] = breakdown.gamma_raman;
        j["gamma_total_per_intensity"] = breakdown.gamma_total;
        json back;
        for (const auto& [tm, r] : breakdown.gamma_back_D5)
            back[m_str(HalfInt::from_twice(tm))] = r;
        j["gamma_back_D5_per_intensity"] = back;
        if (intensity > 0.0) {
            j["intensity_w_m2"] = intensity;
            j["gamma_SD_hz"] = breakdown.gamma_SD * intensity;
        }
        body << j.dump(2) << '\n';
    } else {
        body << "# per-intensity rates out of |D5/2, " << m_str(m) << "> under "
             << pol_name << " at " << wavelength * 1e9 << " nm; units Hz/(W/m^2)\n";
        body << "gamma_SD       " << std::scientific << breakdown.gamma_SD << '\n';
        body << "gamma_elastic  " << breakdown.gamma_elastic << '\n';
        body << "gamma_raman    " << breakdown.gamma_raman << '\n';
        body << "gamma_total    " << breakdown.gamma_total << '\n';
        for (const auto& [tm, r] : breakdown.gamma_back_D5)
            body << "gamma_back_D5[" << m_str(HalfInt::from_twice(tm)) << "] " << r
                 << '\n';
        if (intensity > 0.0)
            body << "gamma_SD at " << intensity
                 << " W/m^2 [Hz]: " << breakdown.gamma_SD * intensity << '\n';
    }

    if (!output.empty()) {
        std::ofstream out(output);
        out << body.str();
        write_manifest(output, "rates",
                       json{{"pol", pol_name},
                            {"m", m_str(m)},
                            {"wavelength_m", wavelength},
                            {"intensity_w_m2", intensity},
                            {"format", format}},
                       common.species_path, 0);
    } else {
        std::cout << body.str();
    }
    return 0;
}

// ----------------------------------------------------------- gate-errors ----

int cmd_gate_errors(const CommonArgs& common, const std::string& gate,
                    double secular_mhz, double wavelength, double intensity) {
    const auto sp = common.load();
    json out;
    if (gate == "1q" || gate == "both") {
        auto cfg = default_one_qubit_config(sp, wavelength);
        if (intensity >= 0.0)
            for (auto& b : cfg.beams) b.field.intensity = intensity;
        out["one_qubit"] = budget_json(one_qubit_error(cfg, sp));
    }
    if (gate == "2q" || gate == "both") {
        auto cfg = default_two_qubit_config(sp, secular_mhz * 1e6, wavelength);
        if (intensity >= 0.0)
            for (auto& b : cfg.beams) b.field.intensity = intensity;
        out["two_qubit"] = budget_json(two_qubit_error(cfg, sp));
        out["lamb_dicke"] = lamb_dicke(default_two_qubit_config(sp, secular_mhz * 1e6,
                                                                wavelength));
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

// ------------------------------------------------------------------ scan ----

int cmd_scan(const CommonArgs& common, double min_nm, double max_nm, int steps,
             double secular_mhz, const std::string& output) {
    const auto sp = common.load();
    const auto cfg = default_two_qubit_config(sp, secular_mhz * 1e6);
    const auto res = wavelength_scan(min_nm * 1e-9, max_nm * 1e-9, steps, cfg, sp);

    std::ostringstream body;
    body << "wavelength_nm,error_floor,threshold_flag\n";
    for (const auto& p : res.points) {
        const bool at_threshold =
            res.threshold_wavelength &&
            std::abs(p.wavelength - *res.threshold_wavelength) <=
                (max_nm - min_nm) * 1e-9 / (steps - 1);
        body << p.wavelength * 1e9 << ',';
        if (p.valid) body << std::scientific << p.error_floor;
        else body << "nan";
        body << ',' << (at_threshold ? 1 : 0) << '\n';
    }
    if (!output.empty()) {
        std::ofstream out(output);
        out << body.str();
        write_manifest(output, "scan",
                       json{{"min_nm", min_nm},
                            {"max_nm", max_nm},
                            {"steps", steps},
                            {"secular_mhz", secular_mhz}},
                       common.species_path, 0);
    } else {
        std::cout << body.str();
    }
    if (res.threshold_wavelength)
        std::cout << "# error floor crosses 1e-4 at "
                  << *res.threshold_wavelength * 1e9 << " nm\n";
    else
        std::cout << "# error floor does not cross 1e-4 in this range\n";
    return 0;
}

// -------------------------------------------------------------- simulate ----

int cmd_simulate(const CommonArgs& common, int pol, HalfInt m, double intensity,
                 std::vector<double> delays, std::int64_t trials,
                 std::uint64_t seed, bool discard_up, const std::string& output) {
    const auto sp = common.load();
    ProtocolConfig cfg;
    cfg.initial = Sublevel{ManifoldLabel::D52, m};
    cfg.laser = LaserField::pure(pol, 976e-9, intensity);
    cfg.delays = std::move(delays);
    cfg.trials_per_delay = trials;
    cfg.seed = seed;
    cfg.discard_on_up_detect = discard_up;
    const auto data = run_protocol(cfg, sp);

    std::ostringstream csv;
    csv << "delay_s,n_trials,n_survived,n_discarded\n";
    for (const auto& r : data.records)
        csv << r.delay_s << ',' << r.n_trials << ',' << r.n_survived << ','
            << r.n_discarded << '\n';

    const json j = dataset_json(data, cfg);
    if (!output.empty()) {
        std::ofstream(output + ".csv") << csv.str();
        std::ofstream(output + ".json") << j.dump(2) << '\n';
        write_manifest(output + ".json", "simulate",
                       json{{"pol", pol},
                            {"m", m_str(m)},
                            {"intensity_w_m2", intensity},
                            {"delays_s", cfg.delays},
                            {"trials_per_delay", trials},
                            {"discard_on_up_detect", discard_up}},
                       common.species_path, seed);
    } else {
        std::cout << j.dump(2) << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------- fit ----

int cmd_fit(const CommonArgs& common, const std::vector<std::string>& paths,
            int bootstrap_n, std::uint64_t seed, const std::string& output) {
    const auto sp = common.load();
    const double sigma_nat = 0.009; // from the 1168(9) ms lifetime
    std::vector<IntensityPoint> points;
    json per_dataset = json::array();

    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open dataset: " + path);
        json j;
        in >> j;
        double intensity = 0.0;
        const auto data = dataset_from_json(j, &intensity);
        const auto fit = fit_exponential(data);
        const auto sub = subtract_natural(fit.tau_meas, fit.sigma_tau,
                                          sp.d5half_lifetime, sigma_nat);
        json f{{"dataset", path},
               {"tau_s", fit.tau_meas},
               {"sigma_tau_s", fit.sigma_tau},
               {"gamma_sd_hz", sub.gamma_sd},
               {"sigma_hz", sub.sigma},
               {"chi2", fit.chi2},
               {"dof", fit.dof},
               {"method", "binomial-mle"},
               {"seed", data.seed}};
        if (sub.unphysical_negative) f["warning"] = "negative rate beyond 3 sigma";
        if (bootstrap_n > 0) {
            const auto boot = bootstrap_uncertainty(data, bootstrap_n, seed);
            f["bootstrap_sigma_rate_hz"] = boot.sigma;
            f["bootstrap_resamples_used"] = boot.used;
            f["method"] = "binomial-mle+bootstrap";
        }
        per_dataset.push_back(f);
        if (intensity > 0.0) points.push_back({intensity, sub.gamma_sd, sub.sigma});
    }

    json out;
    out["fits"] = per_dataset;
    if (points.size() >= 2) {
        const auto rf = fit_rate_vs_intensity(points);
        out["slope_si"] = rf.slope;
        out["sigma_slope_si"] = rf.sigma_slope;
        out["slope_chi2"] = rf.chi2;
        out["slope_dof"] = rf.dof;
    }
    if (!output.empty()) {
        std::ofstream(output) << out.dump(2) << '\n';
        write_manifest(output, "fit",
                       json{{"datasets", paths}, {"bootstrap", bootstrap_n}},
                       common.species_path, seed);
    } else {
        std::cout << out.dump(2) << '\n';
    }
    return 0;
}

// ------------------------------------------------------------- reproduce ----

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

int cmd_reproduce(const CommonArgs& common) {
    const auto sp = common.load();
    std::vector<Check> checks;
    auto add = [&](const std::string& name, bool pass, std::ostringstream& os) {
        checks.push_back({name, pass, os.str()});
    };

    {
        const Sublevel up{ManifoldLabel::D52, HalfInt::from_twice(5)};
        const Sublevel dn{ManifoldLabel::D52, HalfInt::from_twice(3)};
        const double r1 = gamma_sd_per_intensity(up, LaserField::sigma_minus(976e-9), sp);
        const double r2 = gamma_sd_per_intensity(dn, LaserField::sigma_minus(976e-9), sp);
        const double r3 = gamma_sd_per_intensity(dn, LaserField::pi(976e-9), sp);
        std::ostringstream os;
        os.precision(4);
        os << r1 * 1e9 << " / " << r2 * 1e9 << " / " << r3 * 1e9
           << " (x1e-9 Hz/(W/m^2))";
        add("theory rates 3.60/2.16/1.44",
            std::abs(r1 - 3.60e-9) < 0.06e-9 && std::abs(r2 - 2.16e-9) < 0.04e-9 &&
                std::abs(r3 - 1.44e-9) < 0.03e-9,
            os);
        std::ostringstream os2;
        os2 << "ratios " << r1 / r3 << " : " << r2 / r3 << " : 1";
        add("exact 5:3:2 ratio",
            std::abs(r1 / r3 - 2.5) < 2.5e-10 && std::abs(r2 / r3 - 1.5) < 1.5e-10,
            os2);
    }
    {
        const auto b1 = one_qubit_error(default_one_qubit_config(sp), sp);
        const auto b2 = two_qubit_error(default_two_qubit_config(sp), sp);
        std::ostringstream os;
        os.precision(4);
        os << "P1q=" << b1.p_raman << " P2q=" << b2.p_raman
           << " rayleigh=" << b1.rayleigh_decoherence_bound
           << " recoil=" << b2.recoil_bound;
        add("gate errors",
            std::abs(b1.p_raman - 1.25e-6) < 0.02e-6 &&
                std::abs(b2.p_raman - 5e-5) < 1e-5 &&
                b1.rayleigh_decoherence_bound < 1e-7 && b2.recoil_bound < 1e-8,
            os);
    }
    {
        const auto scan =
            wavelength_scan(950e-9, 975e-9, 251, default_two_qubit_config(sp, 5e6), sp);
        std::ostringstream os;
        if (scan.threshold_wavelength)
            os << *scan.threshold_wavelength * 1e9 << " nm";
        else
            os << "no crossing";
        add("1e-4 threshold at 963 +- 5 nm",
            scan.threshold_wavelength &&
                std::abs(*scan.threshold_wavelength - 963e-9) < 5e-9,
            os);
    }
    {
        const double z = zeeman_splitting(sp.manifold(ManifoldLabel::D52), 1.56);
        std::ostringstream os;
        os << z / 1e6 << " MHz";
        add("Zeeman splitting 2.63 MHz +- 1%", std::abs(z - 2.63e6) < 0.0263e6, os);
    }
    {
        const Sublevel up{ManifoldLabel::D52, HalfInt::from_twice(5)};
        const Sublevel dn{ManifoldLabel::D52, HalfInt::from_twice(3)};
        const auto probe = LaserField::sigma_minus(976e-9, 3.5e8);
        const double b1 = double_scatter_bias(up, probe, 2.2, sp);
        const double b2 = double_scatter_bias(dn, probe, 2.2, sp);
        std::ostringstream os;
        os.precision(3);
        os << b1 * 100 << "% / " << b2 * 100 << "%";
        add("double-scatter bias 0.6/1.4%",
            std::abs(b1 - 0.006) < 0.003 && std::abs(b2 - 0.014) < 0.004, os);
    }

    bool all = true;
    std::cout << "reproduction report (tool " << kVersion << ")\n";
    for (const auto& c : checks) {
        all = all && c.pass;
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail
                  << '\n';
    }
    return all ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metastable-qubit scattering rates, gate errors, and simulated "
                 "decay-rate measurements"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // rates
    CommonArgs rates_common;
    std::string rates_pol = "sigma-", rates_m = "+5/2", rates_format = "table",
                rates_output;
    double rates_wl = 976e-9, rates_I = 0.0, rates_P = 0.0, rates_w = 0.0;
    auto* rates = app.add_subcommand("rates", "per-intensity scattering rates");
    add_species_option(rates, rates_common);
    rates->add_option("--pol", rates_pol, "sigma-, pi, or sigma+");
    rates->add_option("--m", rates_m, "initial D5/2 sublevel, e.g. +5/2");
    rates->add_option("--wavelength", rates_wl, "laser vacuum wavelength, m");
    rates->add_option("--intensity", rates_I, "laser intensity, W/m^2");
    rates->add_option("--power", rates_P, "beam power, W (with --waist)");
    rates->add_option("--waist", rates_w, "Gaussian beam waist, m");
    rates->add_option("--format", rates_format, "table, csv, or json");
    rates->add_option("-o,--output", rates_output, "output file (+ manifest)");

    // gate-errors
    CommonArgs ge_common;
    std::string ge_gate = "both";
    double ge_secular = 2.0, ge_wl = 976e-9, ge_I = -1.0;
    auto* ge = app.add_subcommand("gate-errors", "gate error budgets");
    add_species_option(ge, ge_common);
    ge->add_option("--gate", ge_gate, "1q, 2q, or both");
    ge->add_option("--secular-mhz", ge_secular, "secular frequency, MHz");
    ge->add_option("--wavelength", ge_wl, "beam wavelength, m");
    ge->add_option("--intensity", ge_I, "override beam intensity, W/m^2");

    // scan
    CommonArgs scan_common;
    double scan_min = 950.0, scan_max = 985.0, scan_secular = 5.0;
    int scan_steps = 141;
    std::string scan_output;
    auto* scan = app.add_subcommand(
        "scan", "two-qubit error floor vs wavelength (secular default 5 MHz)");
    add_species_option(scan, scan_common);
    scan->add_option("--min-nm", scan_min, "range start, nm");
    scan->add_option("--max-nm", scan_max, "range end, nm");
    scan->add_option("--steps", scan_steps, "number of scan points");
    scan->add_option("--secular-mhz", scan_secular, "secular frequency, MHz");
    scan->add_option("-o,--output", scan_output, "CSV output file (+ manifest)");

    // simulate
    CommonArgs sim_common;
    std::string sim_pol = "sigma-", sim_m = "+5/2", sim_output;
    double sim_I = 8.75e7;
    std::vector<double> sim_delays{0.2, 0.4, 0.6, 0.8, 1.0};
    std::int64_t sim_trials = 10000;
    std::uint64_t sim_seed = 1;
    bool sim_discard_up = false;
    auto* sim = app.add_subcommand("simulate", "simulate the decay-rate protocol");
    add_species_option(sim, sim_common);
    sim->add_option("--pol", sim_pol, "probe polarization");
    sim->add_option("--m", sim_m, "initial sublevel");
    sim->add_option("--intensity", sim_I, "probe intensity, W/m^2 (0 = shutter closed)");
    sim->add_option("--delays", sim_delays, "delay times, s")->expected(-1);
    sim->add_option("--trials", sim_trials, "trials per delay");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_flag("--discard-up", sim_discard_up, "discard trials detected in the up state");
    sim->add_option("-o,--output", sim_output, "output prefix (.csv/.json + manifest)");

    // fit
    CommonArgs fit_common;
    std::vector<std::string> fit_paths;
    int fit_bootstrap = 0;
    std::uint64_t fit_seed = 1;
    std::string fit_output;
    auto* fit = app.add_subcommand("fit", "fit simulated datasets");
    add_species_option(fit, fit_common);
    fit->add_option("datasets", fit_paths, "dataset JSON files")->required();
    fit->add_option("--bootstrap", fit_bootstrap, "bootstrap resamples (0 = off)");
    fit->add_option("--seed", fit_seed, "bootstrap seed");
    fit->add_option("-o,--output", fit_output, "FitResult JSON output (+ manifest)");

    // reproduce
    CommonArgs rep_common;
    auto* rep = app.add_subcommand("reproduce", "run the consolidated regression report");
    add_species_option(rep, rep_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (rates->parsed())
            return cmd_rates(rates_common, parse_polarization(rates_pol),
                             parse_m(rates_m), rates_wl, rates_I, rates_P, rates_w,
                             rates_format, rates_output);
        if (ge->parsed())
            return cmd_gate_errors(ge_common, ge_gate, ge_secular, ge_wl, ge_I);
        if (scan->parsed())
            return cmd_scan(scan_common, scan_min, scan_max, scan_steps, scan_secular,
                            scan_output);
        if (sim->parsed())
            return cmd_simulate(sim_common, parse_polarization(sim_pol),
                                parse_m(sim_m), sim_I, sim_delays, sim_trials,
                                sim_seed, sim_discard_up, sim_output);
        if (fit->parsed())
            return cmd_fit(fit_common, fit_paths, fit_bootstrap, fit_seed, fit_output);
        if (rep->parsed()) return cmd_reproduce(rep_common);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ResonanceError& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
