#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mcflab/barrier.hpp"
#include "mcflab/immersion.hpp"
#include "mcflab/types.hpp"

namespace mcflab {

struct FlowParams {
    double dt_safety = 0.2;  // CFL factor: dt = dt_safety * (min spacing)^2
    double t_end = 25.0;
    int resample_every = 10;
    int record_every = 10;
    double hausdorff_tol = 1e-3;
    double meanH_tol = 1e-3;
    int converged_records = 50;
    double extinction_frac = 0.02;  // volume fraction that declares extinction
    int snapshot_every = 0;         // records between snapshots; 0 = endpoints only
    long max_steps = 2000000;

    void validate() const {
        if (!(dt_safety > 0 && dt_safety <= 1.0))
            throw ValidationError("dt_safety must lie in (0, 1]");
        if (t_end <= 0) throw ValidationError("t_end must be positive");
        if (resample_every < 1 || record_every < 1)
            throw ValidationError("resample_every and record_every must be >= 1");
        if (hausdorff_tol <= 0 || meanH_tol <= 0)
            throw ValidationError("convergence tolerances must be positive");
        if (converged_records < 1) throw ValidationError("converged_records must be >= 1");
        if (!(extinction_frac > 0 && extinction_frac < 1))
            throw ValidationError("extinction_frac must lie in (0, 1)");
        if (snapshot_every < 0) throw ValidationError("snapshot_every must be >= 0");
    }
};

enum class FlowOutcome { Converged, Extinct, ExitedTube, StepLimit, Singular };

inline const char* to_string(FlowOutcome o) {
    switch (o) {
        case FlowOutcome::Converged: return "converged";
        case FlowOutcome::Extinct: return "extinct";
        case FlowOutcome::ExitedTube: return "exited-tube";
        case FlowOutcome::StepLimit: return "step-limit";
        case FlowOutcome::Singular: return "singular";
    }
    return "unknown";
}

struct FlowRecord {
    double t = 0;
    double volume = 0;
    double sup_psi = 0;
    double barrier_monotone = 0;  // v(t) = exp(c1 t) * sup psi
    double dissipation = 0;       // accumulated integral of |H|^2 d mu dt
    double hausdorff = 0;
    double sup_meanH = 0;
    double mass_ratio = 0;
};

struct FlowTrace {
    std::vector<FlowRecord> records;
    std::vector<std::pair<double, DiscreteImmersion>> snapshots;
    FlowOutcome outcome = FlowOutcome::StepLimit;
    double extinction_time = 0;  // valid when outcome == Extinct
    long steps = 0;
    std::string note;
    DiscreteImmersion final_state;
};

// Everything a flow run needs besides the initial immersion: the reference
// submanifold, the squared-distance field, and the certified tube data.
struct FlowContext {
    DiscreteImmersion sigma;
    double sigma_volume = 0;
    SquaredDistanceField field;
    double eps1 = std::numeric_limits<double>::infinity();  // infinite = no tube bound
    double c1 = 0.0;                                        // rate used by the monotone v(t)
};

// One explicit Euler step of mean curvature flow: every sample moves by
// dt * H in chart coordinates. Embeddedness is re-verified afterwards.
inline DiscreteImmersion step(const DiscreteImmersion& imm, double dt, double dt_safety = 0.2) {
    const auto len = segment_lengths(imm);
    const double min_len = *std::min_element(len.begin(), len.end());
    if (dt > dt_safety * min_len * min_len * (1.0 + 1e-12))
        throw ValidationError("step: dt exceeds dt_safety * (min spacing)^2");
    FrameField ff = full_frames(imm);
    DiscreteImmersion out = imm;
    for (int k = 0; k < imm.count(); ++k)
        out.samples[k] = imm.chart->wrap(imm.samples[k] + dt * ff.H_ambient[k]);
    for (const Vec& x : out.samples)
        if (!imm.chart->in_domain(x)) throw DomainError("flow step left the chart domain");
    std::pair<int, int> bad;
    if (!is_embedded(out, 1e-3, &bad))
        throw SingularityError("self-intersection after step near segments " +
                               std::to_string(bad.first) + "," + std::to_string(bad.second));
    return out;
}

inline FlowTrace run(const DiscreteImmersion& imm0, const FlowContext& ctx,
                     const FlowParams& params) {
    params.validate();
    validate_curve(imm0);

    const double vol0 = volume(imm0);
    if (!(vol0 < 2.0 * ctx.sigma_volume))
        throw ValidationError("initial mass must be below twice the reference volume");
    const bool bounded = std::isfinite(ctx.eps1);
    auto sup_psi_of = [&ctx](const DiscreteImmersion& imm) {
        double s = 0.0;
        for (const Vec& x : imm.samples) s = std::max(s, ctx.field.psi(x));
        return s;
    };
    if (bounded && sup_psi_of(imm0) > ctx.eps1 * ctx.eps1 * (1.0 + 1e-9))
        throw ValidationError("initial immersion is not contained in U_eps1");

    FlowTrace trace;
    trace.snapshots.emplace_back(0.0, imm0);

    DiscreteImmersion state = imm0;
    const int N0 = imm0.count();
    double t = 0.0, dissipation = 0.0;
    long step_idx = 0;
    int streak = 0;
    int records_since_snapshot = 0;
    bool done = false;

    auto push_record = [&](const FrameField& ff, double vol, double sup_psi, double sup_h,
                           double haus) {
        FlowRecord rec;
        rec.t = t;
        rec.volume = vol;
        rec.sup_psi = sup_psi;
        rec.barrier_monotone = std::exp(ctx.c1 * t) * sup_psi;
        rec.dissipation = dissipation;
        rec.hausdorff = haus;
        rec.sup_meanH = sup_h;
        rec.mass_ratio = vol / ctx.sigma_volume;
        trace.records.push_back(rec);
        (void)ff;
    };

    while (!done) {
        FrameField ff = full_frames(state);
        const auto len = segment_lengths(state);
        const double vol = volume(state);
        const double sup_psi = sup_psi_of(state);
        double sup_h = 0.0, diss_rate = 0.0;
        const int N = state.count();
        for (int k = 0; k < N; ++k) {
            const double hn = state.chart->norm(state.samples[k], ff.H_ambient[k]);
            sup_h = std::max(sup_h, hn);
            const double w = 0.5 * (len[(k - 1 + N) % N] + len[k]);
            diss_rate += hn * hn * w;
        }
        const double haus = hausdorff_distance(state, ctx.sigma);

        const bool record_now = (step_idx % params.record_every == 0);
        if (record_now) {
            push_record(ff, vol, sup_psi, sup_h, haus);
            if (sup_h < params.meanH_tol && haus < params.hausdorff_tol)
                ++streak;
            else
                streak = 0;
            if (streak >= params.converged_records) {
                trace.outcome = FlowOutcome::Converged;
                done = true;
                break;
            }
            if (params.snapshot_every > 0 && ++records_since_snapshot >= params.snapshot_every) {
                trace.snapshots.emplace_back(t, state);
                records_since_snapshot = 0;
            }
        }

        if (vol < params.extinction_frac * vol0) {
            trace.outcome = FlowOutcome::Extinct;
            // Square-root vanishing tail: remaining time ~ V / (2 |dV/dt|).
            trace.extinction_time = t + (diss_rate > 0 ? vol / (2.0 * diss_rate) : 0.0);
            break;
        }
        if (bounded && sup_psi > ctx.eps1 * ctx.eps1 * (1.0 + 1e-9)) {
            trace.outcome = FlowOutcome::ExitedTube;
            break;
        }
        if (t >= params.t_end * (1.0 - 1e-12) || step_idx >= params.max_steps) {
            trace.outcome = FlowOutcome::StepLimit;
            break;
        }

        const double min_len = *std::min_element(len.begin(), len.end());
        const double dt = std::min(params.dt_safety * min_len * min_len, params.t_end - t);
        dissipation += dt * diss_rate;

        DiscreteImmersion next = state;
        for (int k = 0; k < state.count(); ++k)
            next.samples[k] = state.chart->wrap(state.samples[k] + dt * ff.H_ambient[k]);

        bool exited = false;
        for (const Vec& x : next.samples)
            if (!state.chart->in_domain(x)) exited = true;
        if (exited) {
            trace.outcome = FlowOutcome::ExitedTube;
            trace.note = "left the chart domain";
            break;
        }
        std::pair<int, int> bad;
        if (!is_embedded(next, 1e-3, &bad)) {
            trace.outcome = FlowOutcome::Singular;
            trace.note = "self-intersection near segments " + std::to_string(bad.first) + "," +
                         std::to_string(bad.second);
            trace.snapshots.emplace_back(t, next);  // diagnostic snapshot
            state = next;
            t += dt;
            ++step_idx;
            break;
        }

        state = next;
        t += dt;
        ++step_idx;
        if (step_idx % params.resample_every == 0) state = resample(state, N0);
    }
    trace.steps = step_idx;
    trace.final_state = state;

    // Final record and snapshot at the halt time.
    if (trace.records.empty() || trace.records.back().t < t - 1e-15) {
        FrameField ff = full_frames(state);
        const auto len = segment_lengths(state);
        double sup_h = 0.0;
        for (int k = 0; k < state.count(); ++k)
            sup_h = std::max(sup_h, state.chart->norm(state.samples[k], ff.H_ambient[k]));
        push_record(ff, volume(state), sup_psi_of(state), sup_h,
                    hausdorff_distance(state, ctx.sigma));
    }
    trace.snapshots.emplace_back(t, state);
    return trace;
}

// ---------------------------------------------------------------------------
// Monitors
// ---------------------------------------------------------------------------

struct TrappingReport {
    int checked = 0;
    int violations = 0;
    double max_excess = 0;  // worst sup_psi / bound - 1 over violating records
    double slack = 0.05;
    bool has_rate = false;
    double fitted_rate = 0;  // least-squares exponential decay rate of sup psi
};

// Verifies sup psi(t) <= exp(-c1 (t - t0)) sup psi(t0) within the slack and
// fits the observed decay rate.
inline TrappingReport trapping_check(const FlowTrace& trace, double c1, double slack = 0.05) {
    TrappingReport rep;
    rep.slack = slack;
    if (trace.records.empty()) return rep;
    const double t0 = trace.records.front().t;
    const double base = trace.records.front().sup_psi;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nfit = 0;
    for (const FlowRecord& r : trace.records) {
        ++rep.checked;
        const double bound = base * std::exp(-c1 * (r.t - t0)) * (1.0 + slack);
        if (r.sup_psi > bound + 1e-16 && r.sup_psi > 1e-12) {
            ++rep.violations;
            rep.max_excess = std::max(rep.max_excess, r.sup_psi / std::max(bound, 1e-300) - 1.0);
        }
        if (r.sup_psi > 1e-12) {
            const double x = r.t, y = std::log(r.sup_psi);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++nfit;
        }
    }
    if (nfit >= 2) {
        const double det = nfit * sxx - sx * sx;
        if (std::abs(det) > 1e-14) {
            rep.fitted_rate = -(nfit * sxy - sx * sy) / det;
            rep.has_rate = true;
        }
    }
    return rep;
}

struct MonotoneReport {
    double max_increment = 0;  // worst positive jump of v(t) between records
};

inline MonotoneReport barrier_monotone_check(const FlowTrace& trace) {
    MonotoneReport rep;
    for (size_t i = 1; i < trace.records.size(); ++i)
        rep.max_increment =
            std::max(rep.max_increment, trace.records[i].barrier_monotone -
                                            trace.records[i - 1].barrier_monotone);
    return rep;
}

// |delta volume + accumulated dissipation| relative to the initial volume;
// zero for exact smooth flows.
inline double dissipation_residual(const FlowTrace& trace) {
    if (trace.records.size() < 2) return 0.0;
    const FlowRecord& a = trace.records.front();
    const FlowRecord& b = trace.records.back();
    return std::abs((b.volume - a.volume) + (b.dissipation - a.dissipation)) / a.volume;
}

// ---------------------------------------------------------------------------
// Multi-seed stationarity search
// ---------------------------------------------------------------------------

struct FourierSeries {
    std::vector<double> a, b;  // cos / sin coefficients, k = 0..K

    double eval(double theta) const {
        double s = 0.0;
        for (size_t k = 0; k < a.size(); ++k)
            s += a[k] * std::cos(k * theta) + b[k] * std::sin(k * theta);
        return s;
    }
    double max_abs(int probes = 512) const {
        double m = 0.0;
        for (int i = 0; i < probes; ++i) m = std::max(m, std::abs(eval(2.0 * M_PI * i / probes)));
        return m;
    }
    void scale(double factor) {
        for (double& v : a) v *= factor;
        for (double& v : b) v *= factor;
    }
};

// Platform-independent uniform double in [0,1) from a mt19937_64 stream.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline FourierSeries random_fourier(std::mt19937_64& rng, int kmax, double amplitude) {
    FourierSeries f;
    f.a.resize(kmax + 1);
    f.b.resize(kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        f.a[k] = 2.0 * uniform01(rng) - 1.0;
        f.b[k] = k == 0 ? 0.0 : 2.0 * uniform01(rng) - 1.0;
    }
    const double m = f.max_abs();
    if (m > 0) f.scale(amplitude / m);
    return f;
}

struct SeedResult {
    int seed = 0;
    FlowOutcome outcome = FlowOutcome::StepLimit;
    double final_hausdorff = 0;
    double final_sup_meanH = 0;
    bool converged_to_sigma = false;
    bool stationary_away = false;
    bool failed = false;
    std::string note;
};

struct UniquenessReport {
    int seeds = 0;
    uint64_t rng_seed = 0;
    std::vector<SeedResult> runs;
    int converged = 0;
    int stationary_away = 0;  // would falsify the local-uniqueness analog
    int extinct = 0;
    int exited = 0;
    int singular = 0;
    int failed = 0;
};

using SeedCurveFn = std::function<DiscreteImmersion(const std::vector<FourierSeries>&)>;

// Runs the flow from randomized initial immersions inside the tube and counts
// how many relax to the reference. A run that goes stationary away from the
// reference is flagged: that would contradict strong stability.
inline UniquenessReport uniqueness_search(const FlowContext& ctx, const FlowParams& params,
                                          const SeedCurveFn& make_seed, int series_count,
                                          int seeds, uint64_t rng_seed, double amp_lo,
                                          double amp_hi, int kmax = 3) {
    UniquenessReport rep;
    rep.seeds = seeds;
    rep.rng_seed = rng_seed;
    std::mt19937_64 rng(rng_seed);
    const bool bounded = std::isfinite(ctx.eps1);

    for (int s = 0; s < seeds; ++s) {
        SeedResult res;
        res.seed = s;
        const double amp = amp_lo + uniform01(rng) * (amp_hi - amp_lo);
        std::vector<FourierSeries> series(series_count);
        for (int c = 0; c < series_count; ++c) series[c] = random_fourier(rng, kmax, amp);

        DiscreteImmersion seed_curve;
        bool usable = false;
        for (int attempt = 0; attempt < 8 && !usable; ++attempt) {
            try {
                seed_curve = make_seed(series);
                validate_curve(seed_curve);
                double sup_psi = 0.0;
                for (const Vec& x : seed_curve.samples)
                    sup_psi = std::max(sup_psi, ctx.field.psi(x));
                const bool inside = !bounded || sup_psi <= ctx.eps1 * ctx.eps1 * (1.0 + 1e-9);
                const bool mass_ok = volume(seed_curve) < 2.0 * ctx.sigma_volume * 0.999;
                usable = inside && mass_ok;
            } catch (const Error&) {
                usable = false;
            }
            if (!usable)
                for (auto& f : series) f.scale(0.7);
        }
        if (!usable) {
            res.failed = true;
            res.note = "could not build an admissible seed immersion";
            rep.runs.push_back(res);
            ++rep.failed;
            continue;
        }

        try {
            const FlowTrace trace = run(seed_curve, ctx, params);
            const FlowRecord& last = trace.records.back();
            res.outcome = trace.outcome;
            res.final_hausdorff = last.hausdorff;
            res.final_sup_meanH = last.sup_meanH;
            res.converged_to_sigma =
                trace.outcome == FlowOutcome::Converged && last.hausdorff < 1e-2;
            res.stationary_away = trace.outcome != FlowOutcome::Extinct &&
                                  trace.outcome != FlowOutcome::ExitedTube &&
                                  last.sup_meanH < params.meanH_tol && last.hausdorff >= 1e-2;
        } catch (const Error& e) {
            res.failed = true;
            res.note = e.what();
        }
        rep.runs.push_back(res);
        if (res.failed)
            ++rep.failed;
        else if (res.converged_to_sigma)
            ++rep.converged;
        else if (res.stationary_away)
            ++rep.stationary_away;
        else if (res.outcome == FlowOutcome::Extinct)
            ++rep.extinct;
        else if (res.outcome == FlowOutcome::ExitedTube)
            ++rep.exited;
        else if (res.outcome == FlowOutcome::Singular)
            ++rep.singular;
    }
    return rep;
}

}  // namespace mcflab
