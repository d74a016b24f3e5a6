#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mcflab/config.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/scenario.hpp"
#include "mcflab/stability.hpp"

namespace mcflab {

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

inline std::string snapshot_csv(const DiscreteImmersion& imm, const FrameField& ff,
                                const SquaredDistanceField* field) {
    std::ostringstream os;
    const int d = imm.chart->dim();
    os << "index";
    for (int a = 0; a < d; ++a) os << ",coord_" << a;
    os << ",mean_curvature_norm,psi\n";
    for (int k = 0; k < imm.count(); ++k) {
        os << k;
        for (int a = 0; a < d; ++a) os << ',' << format_double(imm.samples[k][a]);
        const double hn = ff.valid[k] ? imm.chart->norm(imm.samples[k], ff.H_ambient[k])
                                      : std::numeric_limits<double>::quiet_NaN();
        os << ',' << format_double(hn);
        if (field)
            os << ',' << format_double(field->psi(imm.samples[k]));
        else
            os << ",nan";
        os << '\n';
    }
    return os.str();
}

inline std::string flow_trace_csv(const FlowTrace& trace) {
    std::ostringstream os;
    os << "t,volume,sup_psi,barrier_monotone,dissipation,hausdorff,sup_mean_curvature,"
          "mass_ratio\n";
    for (const FlowRecord& r : trace.records) {
        os << format_double(r.t) << ',' << format_double(r.volume) << ','
           << format_double(r.sup_psi) << ',' << format_double(r.barrier_monotone) << ','
           << format_double(r.dissipation) << ',' << format_double(r.hausdorff) << ','
           << format_double(r.sup_meanH) << ',' << format_double(r.mass_ratio) << '\n';
    }
    return os.str();
}

inline std::string barrier_evidence_csv(const BarrierCertificate& cert, int dim) {
    std::ostringstream os;
    os << "base_index,direction_index,radius";
    for (int a = 0; a < dim; ++a) os << ",coord_" << a;
    os << ",psi,tr_n_hessian,ratio\n";
    for (const BarrierEvidence& ev : cert.evidence) {
        os << ev.at.base << ',' << ev.at.direction << ',' << format_double(ev.at.radius);
        for (int a = 0; a < dim; ++a) os << ',' << format_double(ev.at.point[a]);
        os << ',' << format_double(ev.psi) << ',' << format_double(ev.tr_n) << ','
           << format_double(ev.ratio) << '\n';
    }
    return os.str();
}

inline nlohmann::json stability_json(const StabilityCertificate& cert) {
    nlohmann::json per_sample = nlohmann::json::array();
    for (size_t i = 0; i < cert.sample_index.size(); ++i) {
        nlohmann::json entry;
        entry["sample"] = cert.sample_index[i];
        std::vector<double> eig(cert.eigenvalues[i].data(),
                                cert.eigenvalues[i].data() + cert.eigenvalues[i].size());
        entry["eigenvalues"] = eig;
        per_sample.push_back(entry);
    }
    return nlohmann::json{{"scenario", cert.scenario_id},
                          {"c0", cert.c0},
                          {"margin", cert.margin},
                          {"strongly_stable", cert.strongly_stable},
                          {"samples", per_sample}};
}

inline nlohmann::json barrier_json(const BarrierCertificate& cert) {
    return nlohmann::json{{"scenario", cert.scenario_id}, {"epsilon1", cert.epsilon1},
                          {"psi_floor", cert.psi_floor},  {"safety", cert.safety},
                          {"min_ratio", cert.min_ratio},  {"c1", cert.c1},
                          {"verdict", cert.verdict},      {"evidence_points", cert.evidence.size()}};
}

inline nlohmann::json uniqueness_json(const UniquenessReport& rep) {
    nlohmann::json runs = nlohmann::json::array();
    for (const SeedResult& r : rep.runs) {
        runs.push_back(nlohmann::json{{"seed", r.seed},
                                      {"outcome", to_string(r.outcome)},
                                      {"final_hausdorff", r.final_hausdorff},
                                      {"final_sup_mean_curvature", r.final_sup_meanH},
                                      {"converged_to_sigma", r.converged_to_sigma},
                                      {"stationary_away", r.stationary_away},
                                      {"failed", r.failed},
                                      {"note", r.note}});
    }
    return nlohmann::json{{"seeds", rep.seeds},
                          {"rng_seed", rep.rng_seed},
                          {"converged", rep.converged},
                          {"stationary_away", rep.stationary_away},
                          {"extinct", rep.extinct},
                          {"exited", rep.exited},
                          {"singular", rep.singular},
                          {"failed", rep.failed},
                          {"runs", runs}};
}

// ---------------------------------------------------------------------------
// Expected-value checks
// ---------------------------------------------------------------------------

struct CheckResult {
    Expectation expectation;
    double measured = 0;
    bool applicable = false;
    bool pass = false;
};

inline CheckResult evaluate_check(const Expectation& e,
                                  const std::map<std::string, double>& measured) {
    CheckResult r;
    r.expectation = e;
    const auto it = measured.find(e.id);
    if (it == measured.end()) return r;
    r.applicable = true;
    r.measured = it->second;
    switch (e.cmp) {
        case Expectation::Cmp::Approx: r.pass = std::abs(r.measured - e.value) <= e.tol; break;
        case Expectation::Cmp::AtLeast: r.pass = r.measured >= e.value - e.tol; break;
        case Expectation::Cmp::AtMost: r.pass = r.measured <= e.value + e.tol; break;
        case Expectation::Cmp::IsTrue: r.pass = r.measured != 0.0; break;
        case Expectation::Cmp::IsFalse: r.pass = r.measured == 0.0; break;
    }
    return r;
}

inline std::string check_line(const CheckResult& r) {
    std::ostringstream os;
    const Expectation& e = r.expectation;
    os << "  [" << (r.pass ? "PASS" : "FAIL") << "] " << e.id << " = "
       << format_double(r.measured);
    switch (e.cmp) {
        case Expectation::Cmp::Approx:
            os << "  expected " << format_double(e.value) << " +/- " << format_double(e.tol);
            break;
        case Expectation::Cmp::AtLeast: os << "  expected >= " << format_double(e.value); break;
        case Expectation::Cmp::AtMost: os << "  expected <= " << format_double(e.value); break;
        case Expectation::Cmp::IsTrue: os << "  expected true"; break;
        case Expectation::Cmp::IsFalse: os << "  expected false"; break;
    }
    const std::string claim_label = e.claim == "theory" ? "desk-scale theory check"
                                                        : "plumbing self-check";
    os << "  (" << e.provenance << "; " << claim_label << ")";
    if (!e.detail.empty()) os << "  -- " << e.detail;
    return os.str();
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct PipelineResult {
    bool ok = false;
    int passed = 0, failed = 0;
    std::string report;
    std::map<std::string, double> measured;
    std::vector<CheckResult> checks;
};

inline PipelineResult run_pipeline(const RunConfig& cfg) {
    const Scenario& scn = get_scenario(cfg.scenario);
    namespace fs = std::filesystem;
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);

    std::ostringstream report;
    report << "scenario: " << scn.name << "\n";
    report << "operation: " << cfg.operation << "\n";
    report << "rng_seed: " << cfg.seed << "\n";

    PipelineResult result;
    auto& measured = result.measured;

    const ChartPtr chart = scn.make_chart();
    const int samples = cfg.sigma_samples.value_or(scn.default_samples);
    const double eps1 = cfg.epsilon1.value_or(scn.default_eps1);
    const double margin = cfg.margin.value_or(scn.stability_margin);
    const bool want_stability = cfg.operation == "certify-stability" || cfg.operation == "all";
    const bool want_barrier = cfg.operation == "certify-barrier" || cfg.operation == "all";
    const bool want_flow = cfg.operation == "flow" || cfg.operation == "all";
    const bool want_uniqueness = cfg.operation == "uniqueness" || cfg.operation == "all";

    // --- stability -----------------------------------------------------------
    if (want_stability) {
        if (scn.surface_certification) {
            const auto grids = scn.cert_grids(chart);
            double c0 = std::numeric_limits<double>::infinity();
            nlohmann::json passes = nlohmann::json::array();
            int pass_idx = 0;
            for (const DiscreteImmersion& grid : grids) {
                StabilityCertificate cert = certify_strong_stability(
                    grid, margin, scn.name + "/chart-pass-" + std::to_string(pass_idx++));
                c0 = std::min(c0, cert.c0);
                passes.push_back(stability_json(cert));
            }
            measured["stability.c0"] = c0;
            measured["stability.verdict"] = c0 > margin ? 1.0 : 0.0;
            nlohmann::json j{{"scenario", scn.name},
                             {"c0", c0},
                             {"margin", margin},
                             {"strongly_stable", c0 > margin},
                             {"chart_passes", passes}};
            write_text(out / "stability_certificate.json", j.dump(2) + "\n");
        } else {
            const DiscreteImmersion sigma = scn.make_sigma(chart, samples);
            StabilityCertificate cert = certify_strong_stability(sigma, margin, scn.name);
            measured["stability.c0"] = cert.c0;
            measured["stability.verdict"] = cert.strongly_stable ? 1.0 : 0.0;
            write_text(out / "stability_certificate.json", stability_json(cert).dump(2) + "\n");
        }
        report << "stability certificate: c0 = " << format_double(measured["stability.c0"])
               << ", margin = " << format_double(margin) << ", verdict = "
               << (measured["stability.verdict"] != 0 ? "strongly-stable" : "fail") << "\n";
    }

    // --- barrier (also computed when a tube-bound flow needs its c1) ----------
    std::optional<BarrierCertificate> bcert;
    const bool barrier_possible = scn.supports_barrier && scn.n == 1;
    if (barrier_possible && (want_barrier || ((want_flow || want_uniqueness) &&
                                              scn.flow_tube_bound))) {
        const DiscreteImmersion sigma = scn.make_sigma(chart, samples);
        const SquaredDistanceField field = scn.make_field(chart, sigma);
        bcert = certify_barrier_refined(sigma, eps1, field, scn.n, -1.0,
                                        cfg.safety.value_or(0.05), scn.name);
        if (want_barrier) {
            measured["barrier.min_ratio"] = bcert->min_ratio;
            measured["barrier.c1"] = bcert->c1;
            measured["barrier.verdict"] = bcert->verdict ? 1.0 : 0.0;
            write_text(out / "barrier_certificate.json", barrier_json(*bcert).dump(2) + "\n");
            write_text(out / "barrier_evidence.csv",
                       barrier_evidence_csv(*bcert, chart->dim()));
            report << "barrier certificate: epsilon1 = " << format_double(bcert->epsilon1)
                   << ", min ratio = " << format_double(bcert->min_ratio)
                   << ", c1 = " << format_double(bcert->c1)
                   << ", verdict = " << (bcert->verdict ? "pass" : "fail") << "\n";
            if (std::abs(eps1 - scn.default_eps1) > 1e-12)
                // Value expectations are tied to the preset radius.
                measured.erase("barrier.min_ratio");
        }
    }

    // --- flow ------------------------------------------------------------------
    if (want_flow && scn.supports_flow) {
        const DiscreteImmersion sigma = scn.make_sigma(chart, samples);
        const SquaredDistanceField field = scn.make_field(chart, sigma);
        FlowContext ctx;
        ctx.sigma = sigma;
        ctx.sigma_volume = volume(sigma);
        ctx.field = field;
        ctx.eps1 = scn.flow_tube_bound ? eps1 : std::numeric_limits<double>::infinity();
        ctx.c1 = bcert && bcert->verdict ? bcert->min_ratio : 0.0;

        FlowParams params = scn.flow_defaults;
        if (cfg.dt_safety) params.dt_safety = *cfg.dt_safety;
        if (cfg.t_end) params.t_end = *cfg.t_end;
        if (cfg.resample_every) params.resample_every = *cfg.resample_every;
        if (cfg.record_every) params.record_every = *cfg.record_every;
        if (cfg.hausdorff_tol) params.hausdorff_tol = *cfg.hausdorff_tol;
        if (cfg.meanH_tol) params.meanH_tol = *cfg.meanH_tol;
        if (cfg.snapshot_every) params.snapshot_every = *cfg.snapshot_every;
        params.validate();

        const double amplitude = cfg.amplitude.value_or(scn.default_amplitude);
        const DiscreteImmersion initial = scn.make_initial(chart, samples, amplitude);
        const FlowTrace trace = run(initial, ctx, params);

        write_text(out / "flow_trace.csv", flow_trace_csv(trace));
        for (size_t i = 0; i < trace.snapshots.size(); ++i) {
            const auto& [t, imm] = trace.snapshots[i];
            FrameField ff = full_frames(imm);
            std::string name = i == 0                           ? std::string("snapshot_initial.csv")
                               : i + 1 == trace.snapshots.size() ? std::string("snapshot_final.csv")
                                                                 : "snapshot_" + std::to_string(i) +
                                                                       ".csv";
            write_text(out / name, snapshot_csv(imm, ff, &field));
        }

        const FlowRecord& last = trace.records.back();
        measured["flow.outcome_converged"] = trace.outcome == FlowOutcome::Converged ? 1.0 : 0.0;
        measured["flow.outcome_extinct"] = trace.outcome == FlowOutcome::Extinct ? 1.0 : 0.0;
        if (trace.outcome == FlowOutcome::Extinct)
            measured["flow.extinction_time"] = trace.extinction_time;
        measured["flow.final_hausdorff"] = last.hausdorff;
        measured["flow.final_sup_mean_curvature"] = last.sup_meanH;
        measured["flow.mass_ratio_final"] = last.mass_ratio;
        measured["flow.dissipation_residual"] = dissipation_residual(trace);

        report << "flow: outcome = " << to_string(trace.outcome) << " after "
               << trace.steps << " steps";
        if (trace.outcome == FlowOutcome::Extinct)
            report << ", extinction time = " << format_double(trace.extinction_time);
        report << "\n";

        if (ctx.c1 > 0) {
            measured["flow.c1_used"] = ctx.c1;
            const TrappingReport tr = trapping_check(trace, ctx.c1, 0.05);
            measured["flow.trapping_violations"] = tr.violations;
            if (tr.has_rate) {
                measured["flow.fitted_rate"] = tr.fitted_rate;
                measured["flow.fitted_rate_ge_c1"] = tr.fitted_rate >= ctx.c1 ? 1.0 : 0.0;
            }
            const MonotoneReport mono = barrier_monotone_check(trace);
            measured["flow.monotone_increment"] = mono.max_increment;
            // Non-vanishing after the first e-folding time of the trapping rate.
            const double t_fold = 1.0 / ctx.c1;
            bool nonvanishing = true;
            for (const FlowRecord& r : trace.records)
                if (r.t >= t_fold && r.volume < 0.9 * ctx.sigma_volume) nonvanishing = false;
            measured["flow.nonvanishing"] = nonvanishing ? 1.0 : 0.0;
            report << "trapping: violations = " << tr.violations << " of " << tr.checked
                   << " records at 5% slack";
            if (tr.has_rate) report << ", fitted psi-decay rate = " << format_double(tr.fitted_rate);
            report << "\nbarrier monotone: max increment = "
                   << format_double(mono.max_increment) << "\n";
        }
    }

    // --- uniqueness --------------------------------------------------------------
    if (want_uniqueness && scn.supports_uniqueness) {
        const DiscreteImmersion sigma = scn.make_sigma(chart, samples);
        const SquaredDistanceField field = scn.make_field(chart, sigma);
        FlowContext ctx;
        ctx.sigma = sigma;
        ctx.sigma_volume = volume(sigma);
        ctx.field = field;
        ctx.eps1 = eps1;
        ctx.c1 = bcert && bcert->verdict ? bcert->min_ratio : 0.0;
        if (scn.flow_tube_bound && !(bcert && bcert->verdict))
            report << "note: uniqueness search runs without a passing barrier certificate "
                      "(expected for negative controls)\n";

        FlowParams params = scn.flow_defaults;
        if (cfg.dt_safety) params.dt_safety = *cfg.dt_safety;
        if (cfg.t_end) params.t_end = *cfg.t_end;
        params.validate();

        const int seeds = cfg.seeds.value_or(scn.default_seeds);
        auto make_seed = [&](const std::vector<FourierSeries>& f) {
            return scn.make_seed(chart, samples, f);
        };
        const UniquenessReport rep = uniqueness_search(ctx, params, make_seed, scn.seed_series,
                                                       seeds, cfg.seed, scn.seed_amp_lo,
                                                       scn.seed_amp_hi);
        write_text(out / "uniqueness.json", uniqueness_json(rep).dump(2) + "\n");
        std::ostringstream ucsv;
        ucsv << "seed,outcome,final_hausdorff,final_sup_mean_curvature,converged_to_sigma,"
                "stationary_away\n";
        for (const SeedResult& r : rep.runs)
            ucsv << r.seed << ',' << to_string(r.outcome) << ','
                 << format_double(r.final_hausdorff) << ',' << format_double(r.final_sup_meanH)
                 << ',' << (r.converged_to_sigma ? 1 : 0) << ',' << (r.stationary_away ? 1 : 0)
                 << '\n';
        write_text(out / "uniqueness.csv", ucsv.str());

        measured["uniqueness.converged_fraction"] =
            rep.seeds > 0 ? static_cast<double>(rep.converged) / rep.seeds : 0.0;
        measured["uniqueness.stationary_away"] = rep.stationary_away;
        report << "uniqueness: " << rep.converged << "/" << rep.seeds
               << " converged to the reference, " << rep.stationary_away
               << " stationary away, " << rep.extinct << " extinct, " << rep.exited
               << " exited\n";
    }

    // --- expected-value comparison -------------------------------------------
    report << "checks:\n";
    for (const Expectation& e : scn.expected) {
        CheckResult cr = evaluate_check(e, measured);
        if (!cr.applicable) continue;
        result.checks.push_back(cr);
        report << check_line(cr) << "\n";
        if (cr.pass)
            ++result.passed;
        else
            ++result.failed;
    }
    result.ok = result.failed == 0;
    report << "overall: " << (result.ok ? "PASS" : "FAIL") << " (" << result.passed << "/"
           << (result.passed + result.failed) << " checks)\n";
    result.report = report.str();

    write_text(out / "report.txt", result.report);
    nlohmann::json checks = nlohmann::json::array();
    for (const CheckResult& cr : result.checks) {
        const Expectation& e = cr.expectation;
        checks.push_back(nlohmann::json{
            {"id", e.id},
            {"measured", cr.measured},
            {"expected", e.value},
            {"tolerance", e.tol},
            {"comparison", static_cast<int>(e.cmp)},
            {"provenance", e.provenance},
            {"claim", e.claim == "theory" ? "desk-scale theory check" : "plumbing self-check"},
            {"pass", cr.pass}});
    }
    nlohmann::json summary{{"scenario", scn.name}, {"operation", cfg.operation},
                           {"rng_seed", cfg.seed}, {"checks", checks},
                           {"passed", result.passed}, {"failed", result.failed},
                           {"ok", result.ok}};
    write_text(out / "summary.json", summary.dump(2) + "\n");
    return result;
}

}  // namespace mcflab
