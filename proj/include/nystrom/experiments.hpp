#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nystrom/approximation.hpp"
#include "nystrom/coherence.hpp"
#include "nystrom/csv.hpp"
#include "nystrom/errors.hpp"
#include "nystrom/kernels.hpp"
#include "nystrom/matrix.hpp"
#include "nystrom/matrix_io.hpp"
#include "nystrom/rng.hpp"
#include "nystrom/synth.hpp"

namespace nystrom {

enum class ExperimentKind { fig1, fig2, fig3, bound_probe };

inline std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::fig1: return "fig1";
        case ExperimentKind::fig2: return "fig2";
        case ExperimentKind::fig3: return "fig3";
        case ExperimentKind::bound_probe: return "bound-probe";
    }
    return "unknown";
}

/**
 * One row of experiment output. Absent fields are not applicable to the
 * row's experiment and serialize as empty CSV cells; present numeric values
 * are always finite. Aggregate rows leave subsetId (and, for grand means,
 * matrixId) empty; their values are arithmetic means of their member trial
 * rows, so every aggregate is recomputable from the file itself.
 */
struct TrialRecord {
    std::string experiment;
    std::optional<long> matrix_id;
    std::optional<long> subset_id;
    std::optional<long> n;
    std::optional<long> r;
    std::optional<long> k;
    std::optional<long> l;
    std::optional<double> eta;
    std::optional<double> spectrum_percent;
    std::optional<double> target_mu;
    std::optional<double> realized_mu;
    std::optional<long> rank_w;
    std::optional<double> defect;
    std::optional<double> frobenius_error;
    std::optional<double> percent_error;
    std::optional<std::uint64_t> seed;
};

inline constexpr const char* kRecordHeader =
    "experiment,matrixId,subsetId,n,r,k,l,eta,spectrumPercent,targetMu,"
    "realizedMu,rankW,defect,frobeniusError,percentError,seed";

/**
 * Experiment parameters. Which fields are read depends on `kind`; see the
 * individual runners. `mu_targets` entries equal to 0 select the
 * random-orthogonal coherence model, positive entries the forced model
 * with that target. `l_values` holds sample counts (fig1, fig3,
 * bound-probe) or principal-submatrix sizes (fig2 growth mode).
 */
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::fig1;
    Index n = 0;
    Index r = 0;
    Index k = -1;  // -1: default (l for fig1/bound-probe, required for fig3)
    std::vector<Index> l_values;
    std::vector<double> eta_values;
    std::vector<double> mu_targets;
    Index trials_matrices = 1;
    Index trials_subsets = 1;
    std::uint64_t seed = 0;
    std::string input_path;  // optional user data; overrides synthetic models
    bool use_kernel = false;
    KernelSpec kernel;
    double delta = 0.05;  // bound-probe failure budget
    double c1 = 1.0;      // bound-probe predicted-bound constants
    double c2 = 1.0;
    int threads = 1;
};

namespace detail {

// Stream tags for derive_seed label paths, so the per-matrix and
// per-subset streams of one experiment can never collide.
inline constexpr std::uint64_t kStreamMatrix = 0xA1;
inline constexpr std::uint64_t kStreamSubset = 0xB2;

inline std::uint64_t experiment_tag(ExperimentKind kind) {
    return static_cast<std::uint64_t>(kind) + 1;
}

/** Format a double with 9 significant digits (CSV convention). */
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void append_field(std::string& out, const std::optional<long>& v) {
    out += ',';
    if (v) out += std::to_string(*v);
}

inline void append_field(std::string& out, const std::optional<double>& v) {
    out += ',';
    if (v) out += format_double(*v);
}

inline void append_field(std::string& out, const std::optional<std::uint64_t>& v) {
    out += ',';
    if (v) out += std::to_string(*v);
}

/**
 * Run fn(0..n_jobs-1), spreading jobs over `threads` workers. Results must
 * be written to pre-assigned slots keyed by job index; with that discipline
 * output is identical for every thread count. The first exception thrown by
 * a job is rethrown on the calling thread.
 */
inline void parallel_for(std::size_t n_jobs, int threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n_jobs <= 1) {
        for (std::size_t i = 0; i < n_jobs; ++i) fn(i);
        return;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), n_jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_jobs) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/** Mean of an extractor over a span of records, skipping absent values. */
template <typename Getter>
inline std::optional<double> mean_of(const std::vector<TrialRecord>& records,
                                     const std::vector<std::size_t>& idx,
                                     Getter getter) {
    double acc = 0.0;
    long count = 0;
    for (std::size_t i : idx) {
        const auto v = getter(records[i]);
        if (v) {
            acc += *v;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return acc / static_cast<double>(count);
}

}  // namespace detail

/** Serialize records to CSV with the fixed 16-column header. */
inline void emit_csv(const std::vector<TrialRecord>& records,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_csv: cannot open '" + path + "' for writing");
    out << kRecordHeader << '\n';
    std::string line;
    for (const auto& rec : records) {
        line.clear();
        line += rec.experiment;
        detail::append_field(line, rec.matrix_id);
        detail::append_field(line, rec.subset_id);
        detail::append_field(line, rec.n);
        detail::append_field(line, rec.r);
        detail::append_field(line, rec.k);
        detail::append_field(line, rec.l);
        detail::append_field(line, rec.eta);
        detail::append_field(line, rec.spectrum_percent);
        detail::append_field(line, rec.target_mu);
        detail::append_field(line, rec.realized_mu);
        detail::append_field(line, rec.rank_w);
        detail::append_field(line, rec.defect);
        detail::append_field(line, rec.frobenius_error);
        detail::append_field(line, rec.percent_error);
        detail::append_field(line, rec.seed);
        out << line << '\n';
    }
    out.flush();
    if (!out) throw IoError("emit_csv: write error on '" + path + "'");
}

/** Parse a record CSV written by emit_csv. */
inline std::vector<TrialRecord> read_csv_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_csv_records: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("read_csv_records: empty file '" + path + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordHeader) {
        throw ParseError("read_csv_records: unexpected header in '" + path + "'");
    }
    std::vector<TrialRecord> records;
    std::size_t line_no = 1;
    auto opt_long = [&](const std::string& f, std::size_t col) -> std::optional<long> {
        if (f.empty()) return std::nullopt;
        return static_cast<long>(detail::parse_double_field(f, line_no, col));
    };
    auto opt_double = [&](const std::string& f,
                          std::size_t col) -> std::optional<double> {
        if (f.empty()) return std::nullopt;
        return detail::parse_double_field(f, line_no, col);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_skippable_line(line)) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 16) {
            throw ParseError("read_csv_records: line " + std::to_string(line_no) +
                             " has " + std::to_string(f.size()) +
                             " fields, expected 16");
        }
        TrialRecord rec;
        rec.experiment = f[0];
        rec.matrix_id = opt_long(f[1], 1);
        rec.subset_id = opt_long(f[2], 2);
        rec.n = opt_long(f[3], 3);
        rec.r = opt_long(f[4], 4);
        rec.k = opt_long(f[5], 5);
        rec.l = opt_long(f[6], 6);
        rec.eta = opt_double(f[7], 7);
        rec.spectrum_percent = opt_double(f[8], 8);
        rec.target_mu = opt_double(f[9], 9);
        rec.realized_mu = opt_double(f[10], 10);
        rec.rank_w = opt_long(f[11], 11);
        rec.defect = opt_double(f[12], 12);
        rec.frobenius_error = opt_double(f[13], 13);
        rec.percent_error = opt_double(f[14], 14);
        if (!f[15].empty()) {
            try {
                rec.seed = std::stoull(f[15]);
            } catch (const std::exception&) {
                throw ParseError("read_csv_records: malformed seed at line " +
                                 std::to_string(line_no));
            }
        }
        records.push_back(std::move(rec));
    }
    if (in.bad()) throw IoError("read_csv_records: read error on '" + path + "'");
    return records;
}

namespace detail {

struct NamedMatrix {
    long id = 0;
    GramMatrix g;
    std::optional<double> target_mu;
    std::optional<double> realized_mu;
    std::optional<long> r;
};

/** Resolve the matrices an experiment runs on: user-supplied or synthetic. */
inline GramMatrix load_user_gram(const ExperimentConfig& cfg) {
    if (cfg.use_kernel) {
        return gram_matrix(load_features(cfg.input_path), cfg.kernel);
    }
    return load_gram_csv(cfg.input_path);
}

inline void require_ascending(const std::vector<Index>& values, const std::string& what) {
    require_arg(!values.empty(), what + ": list must be non-empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        require_arg(values[i] >= 1, what + ": entries must be >= 1");
        require_arg(i == 0 || values[i] > values[i - 1],
                    what + ": entries must be strictly ascending");
    }
}

inline void require_mu_targets(const std::vector<double>& mu, Index n) {
    require_arg(!mu.empty(), "config: muTargets must be non-empty");
    const double root_n = std::sqrt(static_cast<double>(n));
    for (double v : mu) {
        require_arg(v == 0.0 || (v >= 1.0 && v <= root_n),
                    "config: muTargets entries must be 0 (random model) or in "
                    "[1, sqrt(n)]");
    }
}

}  // namespace detail

/**
 * Percent error of column-sampled approximations versus sample count, for
 * an incoherent flat-spectrum matrix and a forced-coherence counterpart
 * (or a user matrix when input_path is set). One trial = one fresh column
 * sample; k defaults to l. Sample indices for trial t are nested: the
 * prefix of one length-max(l) draw, so error is comparable across l.
 */
inline std::vector<TrialRecord> run_fig1(const ExperimentConfig& cfg) {
    detail::require_ascending(cfg.l_values, "fig1: lValues");
    detail::require_arg(cfg.trials_subsets >= 1, "fig1: trials must be >= 1");
    const std::uint64_t tag = detail::experiment_tag(ExperimentKind::fig1);
    const std::string name = experiment_name(ExperimentKind::fig1);

    std::vector<detail::NamedMatrix> matrices;
    if (!cfg.input_path.empty()) {
        GramMatrix g = detail::load_user_gram(cfg);
        detail::NamedMatrix m{0, std::move(g), std::nullopt, std::nullopt,
                              cfg.r >= 1 ? std::optional<long>(cfg.r) : std::nullopt};
        matrices.push_back(std::move(m));
    } else {
        detail::require_arg(cfg.n >= 1 && cfg.r >= 1 && cfg.r <= cfg.n,
                            "fig1: need n >= 1 and r in [1, n]");
        double forced_mu = 0.9 * std::sqrt(static_cast<double>(cfg.n));
        for (double v : cfg.mu_targets) {
            if (v > 0.0) forced_mu = v;
        }
        SynthReport incoherent =
            synth_spsd(flat_spectrum(cfg.n, cfg.r), random_target(), cfg.r,
                       derive_seed(cfg.seed, {tag, detail::kStreamMatrix, 0}));
        SynthReport artificial = synth_spsd(
            flat_spectrum(cfg.n, cfg.r), forced_target(forced_mu), cfg.r,
            derive_seed(cfg.seed, {tag, detail::kStreamMatrix, 1}));
        matrices.push_back(detail::NamedMatrix{0, std::move(incoherent.g),
                                               std::nullopt,
                                               incoherent.realized_mu,
                                               static_cast<long>(cfg.r)});
        matrices.push_back(detail::NamedMatrix{1, std::move(artificial.g),
                                               artificial.target_mu,
                                               artificial.realized_mu,
                                               static_cast<long>(cfg.r)});
    }

    const std::size_t n_l = cfg.l_values.size();
    const std::size_t trials = static_cast<std::size_t>(cfg.trials_subsets);
    const std::size_t n_jobs = matrices.size() * trials;
    std::vector<std::vector<TrialRecord>> slots(n_jobs);

    detail::parallel_for(n_jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t mi = job / trials;
        const std::size_t trial = job % trials;
        const detail::NamedMatrix& nm = matrices[mi];
        const Index n = nm.g.size();
        const Index l_max = cfg.l_values.back();
        const std::uint64_t sample_seed =
            derive_seed(cfg.seed, {tag, detail::kStreamSubset,
                                   static_cast<std::uint64_t>(nm.id),
                                   static_cast<std::uint64_t>(trial)});
        Rng rng(sample_seed);
        const auto full_draw = rng.sample_with_replacement(
            static_cast<std::size_t>(n), static_cast<std::size_t>(l_max));
        auto& out = slots[job];
        out.reserve(n_l);
        for (std::size_t li = 0; li < n_l; ++li) {
            const Index l = cfg.l_values[li];
            ColumnSample sample;
            sample.n = n;
            sample.indices.assign(full_draw.begin(),
                                  full_draw.begin() + static_cast<long>(l));
            const Index k_eff = cfg.k >= 1 ? std::min(cfg.k, l) : l;
            const NystromFactors factors = build_factors(nm.g, sample, k_eff);
            const FactoredApproximation fa = factored_approximation(factors);
            const ApproximationError err =
                approximation_error_factored(nm.g, fa.l_factor);
            TrialRecord rec;
            rec.experiment = name;
            rec.matrix_id = nm.id;
            rec.subset_id = static_cast<long>(trial);
            rec.n = n;
            rec.r = nm.r;
            rec.k = k_eff;
            rec.l = l;
            rec.target_mu = nm.target_mu;
            rec.realized_mu = nm.realized_mu;
            rec.rank_w = fa.w_rank;
            rec.frobenius_error = err.frobenius;
            rec.percent_error = err.percent;
            rec.seed = sample_seed;
            out.push_back(std::move(rec));
        }
    });

    std::vector<TrialRecord> records;
    records.reserve(n_jobs * n_l + matrices.size() * n_l);
    for (const auto& slot : slots) {
        for (const auto& rec : slot) records.push_back(rec);
    }
    // Mean rows per (matrix, l).
    for (std::size_t mi = 0; mi < matrices.size(); ++mi) {
        for (std::size_t li = 0; li < n_l; ++li) {
            std::vector<std::size_t> idx;
            idx.reserve(trials);
            for (std::size_t t = 0; t < trials; ++t) {
                idx.push_back((mi * trials + t) * n_l + li);
            }
            TrialRecord mean = records[idx.front()];
            mean.subset_id.reset();
            mean.seed.reset();
            mean.rank_w.reset();
            mean.frobenius_error = detail::mean_of(
                records, idx, [](const TrialRecord& r) { return r.frobenius_error; });
            mean.percent_error = detail::mean_of(
                records, idx, [](const TrialRecord& r) { return r.percent_error; });
            records.push_back(std::move(mean));
        }
    }
    return records;
}

/**
 * Coherence measurements. Without l_values: one coherence value per matrix
 * (left mode). With l_values: mean measured coherence of random principal
 * submatrices of each listed size (growth mode; the l column holds the
 * submatrix size). Synthetic models: a random-orthogonal-basis matrix and a
 * forced-first-vector matrix; growth mode gives both a strictly decaying
 * rank-r spectrum so the measured top-r basis is well-defined at every size.
 */
inline std::vector<TrialRecord> run_fig2(const ExperimentConfig& cfg) {
    const bool growth = !cfg.l_values.empty();
    detail::require_arg(cfg.trials_matrices >= 1, "fig2: trials must be >= 1");
    const std::uint64_t tag = detail::experiment_tag(ExperimentKind::fig2);
    const std::string name = experiment_name(ExperimentKind::fig2);

    const bool user = !cfg.input_path.empty();
    Index n = cfg.n;
    Index r = cfg.r;
    std::optional<GramMatrix> user_g;
    if (user) {
        user_g.emplace(detail::load_user_gram(cfg));
        n = user_g->size();
        detail::require_arg(r >= 1 && r <= n, "fig2: need r in [1, n]");
    } else {
        detail::require_arg(n >= 1 && r >= 1 && r <= n,
                            "fig2: need n >= 1 and r in [1, n]");
    }
    if (growth) {
        detail::require_ascending(cfg.l_values, "fig2: sizes");
        detail::require_arg(cfg.l_values.front() >= r,
                            "fig2: smallest size must be >= r");
        detail::require_arg(cfg.l_values.back() <= n,
                            "fig2: sizes must not exceed n");
        detail::require_arg(cfg.trials_subsets >= 1, "fig2: subsets must be >= 1");
    }

    double forced_mu = 0.9 * std::sqrt(static_cast<double>(n));
    for (double v : cfg.mu_targets) {
        if (v > 0.0) forced_mu = v;
    }

    // Model list: user matrix alone, or the two synthetic coherence models.
    struct Model {
        long id;
        std::optional<double> target_mu;
    };
    std::vector<Model> models;
    if (user) {
        models.push_back({0, std::nullopt});
    } else {
        models.push_back({0, std::nullopt});
        models.push_back({1, forced_mu});
    }

    const std::size_t per_model =
        user ? 1 : static_cast<std::size_t>(cfg.trials_matrices);
    const std::size_t n_jobs = models.size() * per_model;
    const std::size_t recs_per_job = growth ? cfg.l_values.size() : 1;
    std::vector<std::vector<TrialRecord>> slots(n_jobs);

    detail::parallel_for(n_jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t model_idx = job / per_model;
        const std::size_t t = job % per_model;
        const Model& model = models[model_idx];
        const long matrix_id =
            static_cast<long>(model_idx * per_model + t);

        std::optional<GramMatrix> synth_g;
        std::optional<double> realized;
        const GramMatrix* g = nullptr;
        if (user) {
            g = &*user_g;
        } else {
            const std::uint64_t gen_seed = derive_seed(
                cfg.seed, {tag, detail::kStreamMatrix,
                           static_cast<std::uint64_t>(model_idx),
                           static_cast<std::uint64_t>(t)});
            const CoherenceTarget target = model.target_mu
                                               ? forced_target(*model.target_mu)
                                               : random_target();
            SpectrumSpec spec;
            if (growth) {
                // Strictly decreasing rank-r spectrum: measured top-r bases
                // are then unique up to sign at every submatrix size.
                std::vector<double> values(static_cast<std::size_t>(n), 0.0);
                for (Index i = 0; i < r; ++i) {
                    values[static_cast<std::size_t>(i)] =
                        std::exp(-0.02 * static_cast<double>(i + 1));
                }
                spec = explicit_spectrum(n, std::move(values));
            } else {
                spec = flat_spectrum(n, r);
            }
            SynthReport rep = synth_spsd(spec, target, r, gen_seed);
            realized = rep.realized_mu;
            synth_g.emplace(std::move(rep.g));
            g = &*synth_g;
        }

        auto& out = slots[job];
        out.reserve(recs_per_job);
        if (growth) {
            const std::uint64_t sub_seed = derive_seed(
                cfg.seed, {tag, detail::kStreamSubset,
                           static_cast<std::uint64_t>(model_idx),
                           static_cast<std::uint64_t>(t)});
            const GrowthProfile profile =
                growth_profile(*g, cfg.l_values, r, cfg.trials_subsets, sub_seed);
            for (std::size_t si = 0; si < profile.sizes.size(); ++si) {
                TrialRecord rec;
                rec.experiment = name;
                rec.matrix_id = matrix_id;
                rec.n = n;
                rec.r = r;
                rec.l = profile.sizes[si];
                rec.target_mu = model.target_mu;
                rec.realized_mu = profile.mean_mu[si];
                rec.seed = sub_seed;
                out.push_back(std::move(rec));
            }
        } else {
            TrialRecord rec;
            rec.experiment = name;
            rec.matrix_id = matrix_id;
            rec.n = n;
            rec.r = r;
            rec.target_mu = model.target_mu;
            if (user) {
                const CoherenceReport meas = top_r_coherence(*g, r);
                rec.realized_mu = meas.mu;
            } else {
                rec.realized_mu = realized;
            }
            rec.seed = cfg.seed;
            out.push_back(std::move(rec));
        }
    });

    std::vector<TrialRecord> records;
    records.reserve(n_jobs * recs_per_job + models.size() * recs_per_job);
    for (const auto& slot : slots) {
        for (const auto& rec : slot) records.push_back(rec);
    }
    // Mean rows per (model, size) / per model.
    for (std::size_t model_idx = 0; model_idx < models.size(); ++model_idx) {
        for (std::size_t si = 0; si < recs_per_job; ++si) {
            std::vector<std::size_t> idx;
            idx.reserve(per_model);
            for (std::size_t t = 0; t < per_model; ++t) {
                idx.push_back((model_idx * per_model + t) * recs_per_job + si);
            }
            TrialRecord mean = records[idx.front()];
            mean.matrix_id.reset();
            mean.subset_id.reset();
            mean.seed.reset();
            mean.realized_mu = detail::mean_of(
                records, idx, [](const TrialRecord& r) { return r.realized_mu; });
            records.push_back(std::move(mean));
        }
    }
    return records;
}

/**
 * Percent error over a (decay rate, coherence level, sample count) grid on
 * exponential-spectrum matrices, k fixed. Matrix generation seeds depend
 * only on the matrix index and subset seeds only on (matrix, subset), so
 * cells are paired across eta, coherence level and l: trend comparisons
 * between cells see the same sampling noise.
 */
inline std::vector<TrialRecord> run_fig3(const ExperimentConfig& cfg) {
    detail::require_arg(cfg.n >= 1, "fig3: n must be >= 1");
    detail::require_arg(cfg.k >= 1, "fig3: k must be >= 1");
    detail::require_ascending(cfg.l_values, "fig3: lValues");
    detail::require_arg(!cfg.eta_values.empty(), "fig3: etaValues must be non-empty");
    for (double eta : cfg.eta_values) {
        detail::require_arg(eta > 0.0, "fig3: eta must be positive");
    }
    detail::require_mu_targets(cfg.mu_targets, cfg.n);
    detail::require_arg(cfg.trials_matrices >= 1 && cfg.trials_subsets >= 1,
                        "fig3: trials and subsets must be >= 1");
    const Index r = cfg.r >= 1 ? cfg.r : cfg.k;
    detail::require_arg(r <= cfg.n, "fig3: r must be <= n");

    const std::uint64_t tag = detail::experiment_tag(ExperimentKind::fig3);
    const std::string name = experiment_name(ExperimentKind::fig3);
    const std::size_t n_eta = cfg.eta_values.size();
    const std::size_t n_mu = cfg.mu_targets.size();
    const std::size_t n_mat = static_cast<std::size_t>(cfg.trials_matrices);
    const std::size_t n_sub = static_cast<std::size_t>(cfg.trials_subsets);
    const std::size_t n_l = cfg.l_values.size();

    const std::size_t n_jobs = n_eta * n_mu * n_mat;
    const std::size_t recs_per_job = n_sub * n_l;
    std::vector<std::vector<TrialRecord>> slots(n_jobs);

    detail::parallel_for(n_jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t ei = job / (n_mu * n_mat);
        const std::size_t mui = (job / n_mat) % n_mu;
        const std::size_t mat = job % n_mat;
        const double eta = cfg.eta_values[ei];
        const double mu = cfg.mu_targets[mui];

        // Basis seed shared across eta and mu levels (pairing).
        const std::uint64_t gen_seed =
            derive_seed(cfg.seed, {tag, detail::kStreamMatrix,
                                   static_cast<std::uint64_t>(mat)});
        const CoherenceTarget target =
            mu == 0.0 ? random_target() : forced_target(mu);
        const SynthReport rep =
            synth_spsd(exponential_spectrum(cfg.n, eta), target, r, gen_seed);
        const Index l_max = cfg.l_values.back();

        auto& out = slots[job];
        out.reserve(recs_per_job);
        for (std::size_t sub = 0; sub < n_sub; ++sub) {
            // Subset stream shared across eta, mu and l (nested prefixes).
            const std::uint64_t sub_seed =
                derive_seed(cfg.seed, {tag, detail::kStreamSubset,
                                       static_cast<std::uint64_t>(mat),
                                       static_cast<std::uint64_t>(sub)});
            Rng rng(sub_seed);
            const auto full_draw = rng.sample_with_replacement(
                static_cast<std::size_t>(cfg.n), static_cast<std::size_t>(l_max));
            for (std::size_t li = 0; li < n_l; ++li) {
                const Index l = cfg.l_values[li];
                ColumnSample sample;
                sample.n = cfg.n;
                sample.indices.assign(full_draw.begin(),
                                      full_draw.begin() + static_cast<long>(l));
                const Index k_eff = std::min(cfg.k, l);
                const NystromFactors factors = build_factors(rep.g, sample, k_eff);
                const FactoredApproximation fa = factored_approximation(factors);
                const ApproximationError err =
                    approximation_error_factored(rep.g, fa.l_factor);
                TrialRecord rec;
                rec.experiment = name;
                rec.matrix_id = static_cast<long>(mat);
                rec.subset_id = static_cast<long>(sub);
                rec.n = cfg.n;
                rec.r = r;
                rec.k = k_eff;
                rec.l = l;
                rec.eta = eta;
                rec.spectrum_percent = percent_of_spectrum(rep.sigma, k_eff);
                rec.target_mu = rep.target_mu;
                rec.realized_mu = rep.realized_mu;
                rec.rank_w = fa.w_rank;
                rec.frobenius_error = err.frobenius;
                rec.percent_error = err.percent;
                rec.seed = sub_seed;
                out.push_back(std::move(rec));
            }
        }
    });

    std::vector<TrialRecord> records;
    records.reserve(n_jobs * recs_per_job + n_eta * n_mu * n_l);
    for (const auto& slot : slots) {
        for (const auto& rec : slot) records.push_back(rec);
    }
    // Mean rows per (eta, mu, l) over matrices x subsets.
    for (std::size_t ei = 0; ei < n_eta; ++ei) {
        for (std::size_t mui = 0; mui < n_mu; ++mui) {
            for (std::size_t li = 0; li < n_l; ++li) {
                std::vector<std::size_t> idx;
                idx.reserve(n_mat * n_sub);
                for (std::size_t mat = 0; mat < n_mat; ++mat) {
                    const std::size_t job = (ei * n_mu + mui) * n_mat + mat;
                    for (std::size_t sub = 0; sub < n_sub; ++sub) {
                        idx.push_back(job * recs_per_job + sub * n_l + li);
                    }
                }
                TrialRecord mean = records[idx.front()];
                mean.matrix_id.reset();
                mean.subset_id.reset();
                mean.seed.reset();
                mean.rank_w.reset();
                for (auto getter : {&TrialRecord::spectrum_percent,
                                    &TrialRecord::realized_mu,
                                    &TrialRecord::frobenius_error,
                                    &TrialRecord::percent_error}) {
                    mean.*getter = detail::mean_of(
                        records, idx,
                        [getter](const TrialRecord& r) { return r.*getter; });
                }
                records.push_back(std::move(mean));
            }
        }
    }
    return records;
}

/** Per-level, per-l success frequencies measured by the bound probe. */
struct BoundProbeCell {
    Index l = 0;
    double freq_rank_full = 0.0;   // numerical_rank(W) == r
    double freq_error_small = 0.0; // percentError < 1e-4
    double freq_defect_ok = 0.0;   // orthogonality defect < 1/2
};

struct BoundProbeLevel {
    std::optional<double> target_mu;  // absent: random-orthogonal model
    double mean_realized_mu = 0.0;
    std::vector<BoundProbeCell> cells;   // one per l, ascending
    std::optional<Index> l_star;         // smallest l with defect freq >= 1-delta
    std::optional<double> ratio;         // l_star / (r mu^2 log r)
    double predicted_l = 0.0;            // r mu^2 max(c1 log r, c2 log(3/delta))
};

struct BoundProbeSummary {
    Index n = 0;
    Index r = 0;
    double delta = 0.0;
    std::vector<BoundProbeLevel> levels;
};

/**
 * Sampled-subset success probe on flat rank-r matrices: for each coherence
 * level and sample count, the empirical frequencies of full intersection
 * rank, tiny reconstruction error, and sub-1/2 orthogonality defect of the
 * planted basis. The defect uses the planted basis: a measured top-r basis
 * of a flat-spectrum matrix is not unique, so only the planted one gives a
 * well-posed event.
 */
inline std::vector<TrialRecord> run_bound_probe(const ExperimentConfig& cfg,
                                                BoundProbeSummary* summary = nullptr) {
    detail::require_arg(cfg.n >= 1 && cfg.r >= 1 && cfg.r <= cfg.n,
                        "bound-probe: need n >= 1 and r in [1, n]");
    detail::require_ascending(cfg.l_values, "bound-probe: lValues");
    detail::require_mu_targets(cfg.mu_targets, cfg.n);
    detail::require_arg(cfg.trials_matrices >= 1 && cfg.trials_subsets >= 1,
                        "bound-probe: trials and subsets must be >= 1");
    detail::require_arg(cfg.delta > 0.0 && cfg.delta < 1.0,
                        "bound-probe: delta must be in (0, 1)");
    detail::require_arg(cfg.c1 > 0.0 && cfg.c2 > 0.0,
                        "bound-probe: c1 and c2 must be positive");

    const std::uint64_t tag = detail::experiment_tag(ExperimentKind::bound_probe);
    const std::string name = experiment_name(ExperimentKind::bound_probe);
    const std::size_t n_mu = cfg.mu_targets.size();
    const std::size_t n_mat = static_cast<std::size_t>(cfg.trials_matrices);
    const std::size_t n_sub = static_cast<std::size_t>(cfg.trials_subsets);
    const std::size_t n_l = cfg.l_values.size();

    const std::size_t n_jobs = n_mu * n_mat;
    const std::size_t recs_per_job = n_sub * n_l;
    std::vector<std::vector<TrialRecord>> slots(n_jobs);

    detail::parallel_for(n_jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t mui = job / n_mat;
        const std::size_t mat = job % n_mat;
        const double mu = cfg.mu_targets[mui];
        const std::uint64_t gen_seed =
            derive_seed(cfg.seed, {tag, detail::kStreamMatrix,
                                   static_cast<std::uint64_t>(mat)});
        const CoherenceTarget target =
            mu == 0.0 ? random_target() : forced_target(mu);
        const SynthReport rep =
            synth_spsd(flat_spectrum(cfg.n, cfg.r), target, cfg.r, gen_seed);
        const Index l_max = cfg.l_values.back();

        auto& out = slots[job];
        out.reserve(recs_per_job);
        for (std::size_t sub = 0; sub < n_sub; ++sub) {
            const std::uint64_t sub_seed =
                derive_seed(cfg.seed, {tag, detail::kStreamSubset,
                                       static_cast<std::uint64_t>(mat),
                                       static_cast<std::uint64_t>(sub)});
            Rng rng(sub_seed);
            const auto full_draw = rng.sample_with_replacement(
                static_cast<std::size_t>(cfg.n), static_cast<std::size_t>(l_max));
            for (std::size_t li = 0; li < n_l; ++li) {
                const Index l = cfg.l_values[li];
                ColumnSample sample;
                sample.n = cfg.n;
                sample.indices.assign(full_draw.begin(),
                                      full_draw.begin() + static_cast<long>(l));
                const double defect =
                    subset_orthogonality_defect(rep.planted, sample.indices);
                const Index k_eff = cfg.k >= 1 ? std::min(cfg.k, l) : l;
                const NystromFactors factors = build_factors(rep.g, sample, k_eff);
                const FactoredApproximation fa = factored_approximation(factors);
                const ApproximationError err =
                    approximation_error_factored(rep.g, fa.l_factor);
                TrialRecord rec;
                rec.experiment = name;
                rec.matrix_id = static_cast<long>(mat);
                rec.subset_id = static_cast<long>(sub);
                rec.n = cfg.n;
                rec.r = cfg.r;
                rec.k = k_eff;
                rec.l = l;
                rec.target_mu = rep.target_mu;
                rec.realized_mu = rep.realized_mu;
                rec.rank_w = fa.w_rank;
                rec.defect = defect;
                rec.frobenius_error = err.frobenius;
                rec.percent_error = err.percent;
                rec.seed = sub_seed;
                out.push_back(std::move(rec));
            }
        }
    });

    std::vector<TrialRecord> records;
    records.reserve(n_jobs * recs_per_job + n_mu * n_l);
    for (const auto& slot : slots) {
        for (const auto& rec : slot) records.push_back(rec);
    }

    if (summary) {
        summary->n = cfg.n;
        summary->r = cfg.r;
        summary->delta = cfg.delta;
        summary->levels.clear();
    }
    const double log_r = std::log(static_cast<double>(cfg.r));
    // Mean rows per (mu, l), plus the summary frequencies.
    for (std::size_t mui = 0; mui < n_mu; ++mui) {
        BoundProbeLevel level;
        level.target_mu = cfg.mu_targets[mui] == 0.0
                              ? std::nullopt
                              : std::optional<double>(cfg.mu_targets[mui]);
        double mu_acc = 0.0;
        for (std::size_t li = 0; li < n_l; ++li) {
            std::vector<std::size_t> idx;
            idx.reserve(n_mat * n_sub);
            long rank_full = 0, err_small = 0, defect_ok = 0;
            for (std::size_t mat = 0; mat < n_mat; ++mat) {
                const std::size_t job = mui * n_mat + mat;
                for (std::size_t sub = 0; sub < n_sub; ++sub) {
                    const std::size_t i = job * recs_per_job + sub * n_l + li;
                    idx.push_back(i);
                    if (records[i].rank_w && *records[i].rank_w == cfg.r) ++rank_full;
                    if (records[i].percent_error && *records[i].percent_error < 1e-4) {
                        ++err_small;
                    }
                    if (records[i].defect && *records[i].defect < 0.5) ++defect_ok;
                }
            }
            const double total = static_cast<double>(idx.size());
            BoundProbeCell cell;
            cell.l = cfg.l_values[li];
            cell.freq_rank_full = static_cast<double>(rank_full) / total;
            cell.freq_error_small = static_cast<double>(err_small) / total;
            cell.freq_defect_ok = static_cast<double>(defect_ok) / total;
            level.cells.push_back(cell);

            TrialRecord mean = records[idx.front()];
            mean.matrix_id.reset();
            mean.subset_id.reset();
            mean.seed.reset();
            mean.rank_w.reset();
            for (auto getter : {&TrialRecord::realized_mu, &TrialRecord::defect,
                                &TrialRecord::frobenius_error,
                                &TrialRecord::percent_error}) {
                mean.*getter = detail::mean_of(
                    records, idx,
                    [getter](const TrialRecord& r) { return r.*getter; });
            }
            if (li == 0 && mean.realized_mu) mu_acc = *mean.realized_mu;
            records.push_back(std::move(mean));
        }
        level.mean_realized_mu = mu_acc;
        for (const auto& cell : level.cells) {
            if (!level.l_star && cell.freq_defect_ok >= 1.0 - cfg.delta) {
                level.l_star = cell.l;
            }
        }
        const double mu_for_bound = level.mean_realized_mu;
        const double denom =
            static_cast<double>(cfg.r) * mu_for_bound * mu_for_bound * log_r;
        if (level.l_star && denom > 0.0) {
            level.ratio = static_cast<double>(*level.l_star) / denom;
        }
        level.predicted_l =
            static_cast<double>(cfg.r) * mu_for_bound * mu_for_bound *
            std::max(cfg.c1 * log_r, cfg.c2 * std::log(3.0 / cfg.delta));
        if (summary) summary->levels.push_back(level);
    }
    return records;
}

/** Human-readable bound-probe summary (one block per coherence level). */
inline std::string format_summary(const BoundProbeSummary& summary) {
    std::string out;
    out += "bound-probe summary: n=" + std::to_string(summary.n) +
           " r=" + std::to_string(summary.r) +
           " delta=" + detail::format_double(summary.delta) + "\n";
    for (const auto& level : summary.levels) {
        out += level.target_mu
                   ? "  level targetMu=" + detail::format_double(*level.target_mu)
                   : "  level random-orthogonal";
        out += " (realized mu=" + detail::format_double(level.mean_realized_mu) + ")\n";
        for (const auto& cell : level.cells) {
            out += "    l=" + std::to_string(cell.l) +
                   "  rankFull=" + detail::format_double(cell.freq_rank_full) +
                   "  errTiny=" + detail::format_double(cell.freq_error_small) +
                   "  defectOk=" + detail::format_double(cell.freq_defect_ok) + "\n";
        }
        if (level.l_star) {
            out += "    l*=" + std::to_string(*level.l_star);
            if (level.ratio) {
                out += "  l*/(r mu^2 log r)=" + detail::format_double(*level.ratio);
            }
        } else {
            out += "    l*=(not reached)";
        }
        out += "  predicted l >= " + detail::format_double(level.predicted_l) + "\n";
    }
    return out;
}

/** Dispatch on cfg.kind; bound-probe summary is discarded (use
 *  run_bound_probe directly to keep it). */
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::fig1: return run_fig1(cfg);
        case ExperimentKind::fig2: return run_fig2(cfg);
        case ExperimentKind::fig3: return run_fig3(cfg);
        case ExperimentKind::bound_probe: return run_bound_probe(cfg);
    }
    throw InvalidArgumentError("run_experiment: unknown experiment kind");
}

}  // namespace nystrom
