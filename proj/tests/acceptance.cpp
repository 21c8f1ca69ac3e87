// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion. Criterion 8 needs an
// SVT-AV1 binary plus sample clips and is skipped when they are absent.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "encost/descriptors.hpp"
#include "encost/evaluation.hpp"
#include "encost/power.hpp"
#include "encost/serialize.hpp"
#include "encost/y4m.hpp"
#include "reference_descriptors.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace encost;

namespace {

struct Checker {
    std::vector<std::string> failures;

    void require(bool condition, const std::string& what) {
        if (!condition) failures.push_back(what);
    }
    void require_close(double actual, double expected, double rel_tol,
                       const std::string& what) {
        const double denom = std::max(std::fabs(expected), 1e-300);
        if (!(std::fabs(actual - expected) / denom <= rel_tol)) {
            std::ostringstream msg;
            msg << what << " (got " << actual << ", want " << expected << ")";
            failures.push_back(msg.str());
        }
    }
};

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------

void criterion1_descriptor_oracles(Checker& c) {
    std::mt19937_64 rng(0x5EED);
    BlockGridSpec spec;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<LumaFrame> frames = {synth::random_frame(64, 64, rng),
                                         synth::random_frame(64, 64, rng)};
        auto sel = DescriptorSelection::all();
        sel.flow = false;
        MemoryFrameSource src(frames);
        const auto d = analyze(src, spec, sel);

        c.require(rel_err(*d.c_s_si, refimpl::si(frames)) <= 1e-9, "SI mismatch vs naive reference");
        c.require(rel_err(*d.c_t_ti, refimpl::ti(frames)) <= 1e-9, "TI mismatch vs naive reference");
        c.require(rel_err(*d.c_s_vca, refimpl::vca_spatial(frames, 32)) <= 1e-9,
                  "spatial texture mismatch vs naive reference");
        c.require(rel_err(*d.c_t_vca, refimpl::vca_temporal(frames, 32)) <= 1e-9,
                  "temporal texture mismatch vs naive reference");
        c.require(rel_err(*d.c_s_var, refimpl::block_variance(frames)) <= 1e-9,
                  "block variance mismatch vs naive reference");
        // per-block texture: every block of the first frame
        for (int k = 0; k < 4; ++k) {
            const double ref = refimpl::block_texture(frames[0], k % 2, k / 2, 32);
            c.require(rel_err(block_texture(frames[0], k, spec), ref) <= 1e-9,
                      "block texture mismatch vs naive reference");
        }
    }
}

void criterion2_descriptor_invariants(Checker& c) {
    // constant-sequence zeros
    std::vector<LumaFrame> consts;
    for (int i = 0; i < 6; ++i) consts.push_back(synth::constant_frame(64, 64, 81));
    MemoryFrameSource const_src(consts);
    const auto dz = analyze(const_src, BlockGridSpec{}, DescriptorSelection::all());
    c.require(*dz.c_s_si == 0.0, "constant clip: SI != 0");
    c.require(*dz.c_t_ti == 0.0, "constant clip: TI != 0");
    c.require(*dz.c_s_var == 0.0, "constant clip: variance != 0");
    c.require(*dz.c_t_vca == 0.0, "constant clip: VCA temporal != 0");
    c.require(*dz.c_t_flow == 0.0, "constant clip: flow != 0");

    // DC-shift invariance, exact
    std::mt19937_64 rng(0xDC);
    std::vector<LumaFrame> base, shifted;
    for (int i = 0; i < 3; ++i) {
        LumaFrame f(64, 64, i);
        std::uniform_int_distribution<int> dist(0, 200);
        for (auto& s : f.samples) s = static_cast<std::uint8_t>(dist(rng));
        LumaFrame g = f;
        for (auto& s : g.samples) s = static_cast<std::uint8_t>(s + 55);
        base.push_back(std::move(f));
        shifted.push_back(std::move(g));
    }
    auto sel = DescriptorSelection::all();
    sel.flow = false;
    MemoryFrameSource a(base), b(shifted);
    const auto da = analyze(a, BlockGridSpec{}, sel);
    const auto db = analyze(b, BlockGridSpec{}, sel);
    c.require(*da.c_s_si == *db.c_s_si, "DC shift changed SI");
    c.require(*da.c_t_ti == *db.c_t_ti, "DC shift changed TI");
    c.require(*da.c_s_var == *db.c_s_var, "DC shift changed variance");

    // frame-permutation invariance of the spatial descriptors, exact
    std::vector<LumaFrame> perm = {base[2], base[0], base[1]};
    MemoryFrameSource p(perm);
    const auto dp = analyze(p, BlockGridSpec{}, sel);
    c.require(*da.c_s_si == *dp.c_s_si, "permutation changed SI");
    c.require(*da.c_s_vca == *dp.c_s_vca, "permutation changed VCA spatial");
    c.require(*da.c_s_var == *dp.c_s_var, "permutation changed variance");

    // repeated-frame sequence: temporal descriptors exactly zero
    std::vector<LumaFrame> repeated = {base[0], base[0], base[0]};
    MemoryFrameSource r(repeated);
    const auto dr = analyze(r, BlockGridSpec{}, DescriptorSelection::all());
    c.require(*dr.c_t_ti == 0.0, "repeated frames: TI != 0");
    c.require(*dr.c_t_vca == 0.0, "repeated frames: VCA temporal != 0");
    c.require(*dr.c_t_flow == 0.0, "repeated frames: flow != 0");
}

void criterion3_flow_translation(Checker& c) {
    const auto frames = synth::translating_sequence(256, 256, 12, 2, 0xF10);
    MemoryFrameSource src(frames);
    const double displacement = optical_flow_displacement(src);
    c.require(displacement >= 1.6 && displacement <= 2.4,
              "translation displacement " + std::to_string(displacement) +
                  " outside [1.6, 2.4]");
}

void criterion4_time_model_round_trip(Checker& c) {
    // noiseless: fitted model reproduces the generator on the full grid
    synth::DatasetOptions clean;
    clean.seed = 0xA11CE;
    const auto ds = synth::make_dataset(clean);
    FitConfig cfg;
    const auto fit = fit_time_model(ds.records, ds.descriptors, ds.generating_spec, cfg);
    std::vector<double> truth, fitted;
    for (const auto& r : ds.records) {
        const double cf = ds.true_factors.at(r.sequence_id);
        truth.push_back(predict_time_kpix(ds.true_params, cf, r.n_intra, r.crf, r.preset));
        fitted.push_back(predict_time_kpix(fit.params, cf, r.n_intra, r.crf, r.preset));
    }
    const double round_trip = mape(truth, fitted);
    c.require(round_trip < 0.1, "noiseless round trip MAPE " +
                                    std::to_string(round_trip) + " >= 0.1%");

    // 2% multiplicative noise: 3-fold CV MAPE < 4%
    synth::DatasetOptions noisy = clean;
    noisy.seed = 0xB0B;
    noisy.time_noise = 0.02;
    const auto nds = synth::make_dataset(noisy);
    const auto folds = make_fold_assignment(nds.records, 3, 1);
    const auto cv =
        cross_validate(nds.records, nds.descriptors, nds.generating_spec, cfg, folds);
    c.require(cv.time.mean_mape < 4.0,
              "noisy CV MAPE " + std::to_string(cv.time.mean_mape) + " >= 4%");

    // grid minimum lands on the generating descriptor pair
    const auto grid = descriptor_grid_evaluation(nds.records, nds.descriptors, cfg, folds);
    const auto* vca_cell = grid.find(SpatialSource::vca, TemporalSource::vca);
    c.require(vca_cell && vca_cell->time_mape.has_value(), "vca/vca cell missing");
    for (const auto& cell : grid.cells) {
        if (!cell.time_mape) continue;
        if (&cell == vca_cell) continue;
        c.require(*vca_cell->time_mape <= *cell.time_mape,
                  "grid minimum not at vca/vca (beaten by " +
                      std::string(to_string(cell.spatial)) + "/" +
                      std::string(to_string(cell.temporal)) + ")");
    }
}

void criterion5_energy_fit(Checker& c) {
    // exact recovery on a noiseless line
    std::vector<EncodingRecord> line;
    for (int i = 0; i < 10; ++i) {
        EncodingRecord r;
        r.sequence_id = "s" + std::to_string(i);
        r.class_id = "A2";
        r.width = 100;
        r.height = 100;
        r.n_frames = 10;
        r.frame_rate = {30, 1};
        r.preset = 1 + i;
        r.crf = 32;
        r.n_intra = 1;
        r.time_s = 3.0 + 2.5 * i;
        r.energy_j = 5.0 + 2.0 * r.time_s;
        line.push_back(r);
    }
    const auto ep = fit_energy_linear(line);
    c.require(rel_err(ep.e0, 5.0) <= 1e-9, "energy intercept off");
    c.require(rel_err(ep.p, 2.0) <= 1e-9, "energy slope off");

    // composing fitted time into the energy model costs a bounded MAPE delta;
    // the dataset mirrors the measurement setup's scale spread (same-duration
    // clips, moderate content range, near-zero idle offset)
    synth::DatasetOptions opt;
    opt.seed = 0xE4;
    opt.time_noise = 0.02;
    opt.with_energy = true;
    opt.energy_noise = 0.01;
    opt.n_frames_min = 240;
    opt.n_frames_max = 480;
    opt.ln_cs_min = 1.0;
    opt.ln_cs_max = 2.0;
    opt.ct_min = 0.8;
    opt.ct_max = 2.5;
    opt.e0 = 100.0;
    const auto ds = synth::make_dataset(opt);
    FitConfig cfg;
    const auto folds = make_fold_assignment(ds.records, 3, 2);
    const auto cv =
        cross_validate(ds.records, ds.descriptors, ds.generating_spec, cfg, folds);
    c.require(cv.energy.has_value(), "energy report missing");
    if (cv.energy) {
        const double delta = cv.energy->mean_mape - cv.time.mean_mape;
        c.require(delta >= 0.0 && delta <= 5.0,
                  "energy-over-time MAPE delta " + std::to_string(delta) +
                      " outside [0, 5] points");
    }
}

void criterion6_measurement_math(Checker& c) {
    // trapezoid additivity
    PowerTrace t;
    t.samples = {{0.0, 2.0}, {1.5, 8.0}, {3.0, 3.5}, {5.0, 6.0}, {9.0, 1.0}};
    const double whole = integrate_power(t, 0.25, 8.5);
    const double split = integrate_power(t, 0.25, 3.3) + integrate_power(t, 3.3, 8.5);
    c.require(rel_err(whole, split) <= 1e-12, "trapezoid additivity violated");

    // constant-trace case: 30 W total, 20 W idle, 10 s -> exactly 100 J
    PowerTrace total, idle;
    for (int i = 0; i <= 20; ++i) {
        total.samples.emplace_back(i * 0.5, 30.0);
        idle.samples.emplace_back(i * 0.5, 20.0);
    }
    c.require(encoding_energy(total, idle, 10.0).joules == 100.0,
              "constant-trace energy != 100 J");

    // hand-computed stopping-rule example
    MeasurementSeries series;
    series.values = {100.0, 100.0, 100.0, 104.0};
    const auto conf = confidence_satisfied(series);
    c.require(!conf.satisfied, "stopping rule wrongly satisfied");
    c.require(std::fabs(conf.lhs - 9.0814) < 1e-3, "stopping-rule lhs off");
    c.require(std::fabs(conf.rhs - 2.02) < 1e-12, "stopping-rule rhs off");

    // quantiles vs the published table at 4 decimals
    const double t95[30] = {6.3138, 2.9200, 2.3534, 2.1318, 2.0150, 1.9432, 1.8946,
                            1.8595, 1.8331, 1.8125, 1.7959, 1.7823, 1.7709, 1.7613,
                            1.7531, 1.7459, 1.7396, 1.7341, 1.7291, 1.7247, 1.7207,
                            1.7171, 1.7139, 1.7109, 1.7081, 1.7056, 1.7033, 1.7011,
                            1.6991, 1.6973};
    const double t99[30] = {31.8205, 6.9646, 4.5407, 3.7469, 3.3649, 3.1427, 2.9980,
                            2.8965,  2.8214, 2.7638, 2.7181, 2.6810, 2.6503, 2.6245,
                            2.6025,  2.5835, 2.5669, 2.5524, 2.5395, 2.5280, 2.5176,
                            2.5083,  2.4999, 2.4922, 2.4851, 2.4786, 2.4727, 2.4671,
                            2.4620,  2.4573};
    for (int df = 1; df <= 30; ++df) {
        c.require(std::fabs(student_t_quantile(0.95, df) - t95[df - 1]) < 5e-5,
                  "t quantile 0.95 df " + std::to_string(df));
        c.require(std::fabs(student_t_quantile(0.99, df) - t99[df - 1]) < 5e-5,
                  "t quantile 0.99 df " + std::to_string(df));
    }
}

void criterion7_protocol(Checker& c) {
    synth::DatasetOptions opt;
    opt.seed = 0x715;
    opt.time_noise = 0.02;
    const auto ds = synth::make_dataset(opt);

    // 3-fold assignment: exactly 2 sequences per class per fold
    const auto fa = make_fold_assignment(ds.records, 3, 9);
    std::map<std::pair<std::string, int>, int> counts;
    std::set<std::string> seen;
    for (const auto& r : ds.records) {
        if (!seen.insert(r.sequence_id).second) continue;
        counts[{r.class_id, fa.fold_of.at(r.sequence_id)}]++;
    }
    for (const auto& cls : {"A2", "A3", "A4"})
        for (int f = 0; f < 3; ++f)
            c.require(counts[{std::string(cls), f}] == 2,
                      "fold layout violated for class " + std::string(cls));

    // no train/validation leakage: per fold, the sequence sets are disjoint
    for (int fold = 0; fold < 3; ++fold) {
        std::set<std::string> train, val;
        for (const auto& r : ds.records)
            (fa.fold_of.at(r.sequence_id) == fold ? val : train).insert(r.sequence_id);
        for (const auto& s : val)
            c.require(!train.count(s), "sequence leaks between folds: " + s);
        c.require(!val.empty() && !train.empty(), "empty fold side");
    }

    // byte-reproducible CLI reports under --reproducible with a fixed seed
    const fs::path dir =
        fs::temp_directory_path() / ("encost_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir / "descriptors");
    {
        std::ofstream csv(dir / "records.csv", std::ios::binary);
        write_records_csv(csv, ds.records);
        BlockGridSpec spec;
        for (const auto& [seq, d] : ds.descriptors) {
            std::ofstream f(dir / "descriptors" / (seq + ".json"), std::ios::binary);
            f << to_json(d, spec).dump(2) << "\n";
        }
    }
    const std::string base = std::string(ENCOST_CLI_PATH) + " evaluate --records " +
                             (dir / "records.csv").string() + " --descriptors " +
                             (dir / "descriptors").string() +
                             " --spatial vca --temporal vca --folds 3 --seed 11 "
                             "--reproducible --out ";
    const int rc1 = std::system(
        (base + (dir / "a.json").string() + " > /dev/null 2>&1").c_str());
    const int rc2 = std::system(
        (base + (dir / "b.json").string() + " > /dev/null 2>&1").c_str());
    c.require(WIFEXITED(rc1) && WEXITSTATUS(rc1) == 0, "cli evaluate run 1 failed");
    c.require(WIFEXITED(rc2) && WEXITSTATUS(rc2) == 0, "cli evaluate run 2 failed");
    const auto bytes1 = slurp(dir / "a.json");
    const auto bytes2 = slurp(dir / "b.json");
    c.require(!bytes1.empty() && bytes1 == bytes2,
              "reports not byte-reproducible under --reproducible");
    fs::remove_all(dir);
}

// Criterion 8 (optional): requires SvtAv1EncApp in PATH and sample clips in
// $ENCOST_SVT_CLIPS_DIR. Encodes presets 1..13 at CRF 43 single-threaded,
// checks monotone speedup, then fits the time model on a small local grid.
bool criterion8_available() {
    if (std::system("command -v SvtAv1EncApp > /dev/null 2>&1") != 0) return false;
    const char* dir = std::getenv("ENCOST_SVT_CLIPS_DIR");
    if (!dir || !fs::is_directory(dir)) return false;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".y4m") return true;
    return false;
}

double child_cpu_seconds() {
    struct rusage ru{};
    getrusage(RUSAGE_CHILDREN, &ru);
    return ru.ru_utime.tv_sec + ru.ru_utime.tv_usec / 1e6 + ru.ru_stime.tv_sec +
           ru.ru_stime.tv_usec / 1e6;
}

void criterion8_svt(Checker& c) {
    const fs::path clips_dir = std::getenv("ENCOST_SVT_CLIPS_DIR");
    std::vector<fs::path> clips;
    for (const auto& e : fs::directory_iterator(clips_dir))
        if (e.path().extension() == ".y4m") clips.push_back(e.path());
    std::sort(clips.begin(), clips.end());
    clips.resize(std::min<std::size_t>(clips.size(), 2));

    std::vector<EncodingRecord> records;
    int monotone = 0, adjacent = 0;
    for (const auto& clip : clips) {
        std::ifstream probe(clip, std::ios::binary);
        const auto header = parse_y4m_header(probe);
        long n_frames = 0;
        {
            Y4mFileReader counter(clip.string());
            while (counter.next()) ++n_frames;
        }

        const auto encode = [&](int preset, int crf) {
            const double before = child_cpu_seconds();
            const std::string cmd = "SvtAv1EncApp -i " + clip.string() +
                                    " --preset " + std::to_string(preset) + " --crf " +
                                    std::to_string(crf) +
                                    " --lp 1 -b /dev/null > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) return -1.0;
            return child_cpu_seconds() - before;
        };

        double prev_time = -1.0;
        for (int preset = 1; preset <= 13; ++preset) {
            const double t = encode(preset, 43);
            c.require(t > 0.0, "encode failed at preset " + std::to_string(preset));
            if (t <= 0.0) return;
            if (prev_time > 0.0) {
                ++adjacent;
                if (t <= prev_time * 1.02) ++monotone;  // 2% timer slack
            }
            prev_time = t;
            EncodingRecord r;
            r.sequence_id = clip.stem().string();
            r.class_id = "local";
            r.width = header.width;
            r.height = header.height;
            r.n_frames = n_frames;
            r.frame_rate = header.frame_rate;
            r.preset = preset;
            r.crf = 43;
            r.n_intra = default_n_intra(n_frames, header.frame_rate);
            r.time_s = t;
            records.push_back(r);
        }
        for (int preset : {2, 6, 10, 13}) {
            for (int crf : {32, 55}) {
                const double t = encode(preset, crf);
                if (t <= 0.0) continue;
                EncodingRecord r = records.back();
                r.preset = preset;
                r.crf = crf;
                r.time_s = t;
                records.push_back(r);
            }
        }
    }

    c.require(adjacent > 0 && monotone >= static_cast<int>(0.9 * adjacent),
              "preset speedup monotone for only " + std::to_string(monotone) + "/" +
                  std::to_string(adjacent) + " adjacent pairs");

    ContentFactorSpec blind;
    blind.spatial = SpatialSource::none;
    blind.temporal = TemporalSource::none;
    FitConfig cfg;
    const auto fit = fit_time_model(records, DescriptorMap{}, blind, cfg);
    std::vector<double> measured, predicted;
    for (const auto& r : records) {
        measured.push_back(r.time_s);
        predicted.push_back(
            predict_time_kpix(fit.params, 1.0, r.n_intra, r.crf, r.preset) *
            r.kilopixels());
    }
    const double training = mape(measured, predicted);
    c.require(training < 30.0,
              "local training MAPE " + std::to_string(training) + " >= 30%");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        std::string label;
        double budget_s;
        std::function<void(Checker&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "descriptor equivalence vs naive references (50 random inputs)", 10.0,
         criterion1_descriptor_oracles},
        {2, "descriptor invariants (zeros, DC shift, permutation)", 5.0,
         criterion2_descriptor_invariants},
        {3, "optical-flow translation recovery (2 px/frame)", 30.0,
         criterion3_flow_translation},
        {4, "time-model round trip, noisy CV and grid minimum", 60.0,
         criterion4_time_model_round_trip},
        {5, "energy linear fit and bounded composition penalty", 10.0,
         criterion5_energy_fit},
        {6, "measurement math (trapezoid, stopping rule, t table)", 5.0,
         criterion6_measurement_math},
        {7, "protocol conformance (folds, leakage, reproducibility)", 5.0,
         criterion7_protocol},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Checker checker;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(checker);
        } catch (const std::exception& e) {
            checker.failures.push_back(std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (elapsed > criterion.budget_s)
            checker.failures.push_back("runtime " + std::to_string(elapsed) +
                                       " s exceeds budget " +
                                       std::to_string(criterion.budget_s) + " s");
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(2);
        if (checker.failures.empty()) {
            line << "[PASS] criterion " << criterion.id << ": " << criterion.label
                 << " (" << elapsed << " s)";
        } else {
            ++failures;
            line << "[FAIL] criterion " << criterion.id << ": " << criterion.label
                 << " (" << elapsed << " s)";
        }
        std::cout << line.str() << "\n";
        for (const auto& f : checker.failures) std::cout << "       - " << f << "\n";
    }

    if (criterion8_available()) {
        Checker checker;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion8_svt(checker);
        } catch (const std::exception& e) {
            checker.failures.push_back(std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        std::cout << (checker.failures.empty() ? "[PASS]" : "[FAIL]")
                  << " criterion 8 (optional): SVT-AV1 local sanity (" << elapsed
                  << " s)\n";
        for (const auto& f : checker.failures) std::cout << "       - " << f << "\n";
        if (!checker.failures.empty()) ++failures;
    } else {
        std::cout << "[SKIP] criterion 8 (optional): SVT-AV1 binary or sample "
                     "clips not available\n";
    }

    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
