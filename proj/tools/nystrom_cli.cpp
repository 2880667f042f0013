// Command-line driver: synthetic SPSD generation, coherence measurement,
// column-sampled approximation, and the experiment runners.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nystrom/nystrom.hpp"

namespace {

using nystrom::ExperimentConfig;
using nystrom::ExperimentKind;
using nystrom::Index;

struct CommonArgs {
    long long n = 0;
    long long rank = 0;
    long long k = -1;
    std::vector<long long> l;
    std::vector<double> eta;
    std::vector<double> mu;
    long long trials = 10;
    long long subsets = 5;
    std::uint64_t seed = 0;
    std::string input;
    std::string output;
    std::string kernel;
    double gamma = 1.0;
    std::string format = "csv";
    int threads = 1;
    double delta = 0.05;
    double c1 = 1.0;
    double c2 = 1.0;
};

void add_format_option(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--format", args.format, "Output format")
        ->check(CLI::IsMember({"csv"}))
        ->capture_default_str();
}

void add_seed_option(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--seed", args.seed, "Master RNG seed")->required();
}

void add_kernel_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--kernel", args.kernel,
                    "Treat --input as feature vectors under this kernel")
        ->check(CLI::IsMember({"linear", "rbf"}));
    cmd->add_option("--gamma", args.gamma, "RBF kernel width")
        ->capture_default_str();
}

void add_threads_option(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--threads", args.threads, "Worker threads for trials")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

std::vector<Index> to_indices(const std::vector<long long>& v) {
    std::vector<Index> out;
    out.reserve(v.size());
    for (long long x : v) out.push_back(static_cast<Index>(x));
    return out;
}

ExperimentConfig make_config(ExperimentKind kind, const CommonArgs& args) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.n = static_cast<Index>(args.n);
    cfg.r = static_cast<Index>(args.rank);
    cfg.k = static_cast<Index>(args.k);
    cfg.l_values = to_indices(args.l);
    cfg.eta_values = args.eta;
    cfg.mu_targets = args.mu;
    cfg.trials_matrices = static_cast<Index>(args.trials);
    cfg.trials_subsets = static_cast<Index>(args.subsets);
    cfg.seed = args.seed;
    cfg.input_path = args.input;
    cfg.use_kernel = !args.kernel.empty();
    if (cfg.use_kernel) {
        cfg.kernel.kind = args.kernel == "rbf" ? nystrom::KernelKind::rbf
                                               : nystrom::KernelKind::linear;
        cfg.kernel.gamma = args.gamma;
    }
    cfg.delta = args.delta;
    cfg.c1 = args.c1;
    cfg.c2 = args.c2;
    cfg.threads = args.threads;
    return cfg;
}

nystrom::GramMatrix load_input(const CommonArgs& args) {
    if (!args.kernel.empty()) {
        nystrom::KernelSpec spec;
        spec.kind = args.kernel == "rbf" ? nystrom::KernelKind::rbf
                                         : nystrom::KernelKind::linear;
        spec.gamma = args.gamma;
        return nystrom::gram_matrix(nystrom::load_features(args.input), spec);
    }
    return nystrom::load_gram_csv(args.input);
}

int run_synth(const CommonArgs& args) {
    nystrom::SpectrumSpec spec;
    if (!args.eta.empty()) {
        if (args.eta.size() != 1) {
            throw nystrom::InvalidArgumentError("synth: --eta takes one value");
        }
        spec = nystrom::exponential_spectrum(static_cast<Index>(args.n),
                                             args.eta.front());
    } else {
        spec = nystrom::flat_spectrum(static_cast<Index>(args.n),
                                      static_cast<Index>(args.rank));
    }
    nystrom::CoherenceTarget target = nystrom::random_target();
    if (!args.mu.empty()) {
        if (args.mu.size() != 1) {
            throw nystrom::InvalidArgumentError("synth: --mu takes one value");
        }
        if (args.mu.front() != 0.0) {
            target = nystrom::forced_target(args.mu.front());
        }
    }
    const nystrom::SynthReport rep = nystrom::synth_spsd(
        spec, target, static_cast<Index>(args.rank), args.seed);
    nystrom::save_matrix_csv(args.output, rep.g.mat());
    std::cout << "n=" << rep.g.size() << " r=" << args.rank
              << " realizedMu=" << rep.realized_mu;
    if (rep.target_mu) std::cout << " targetMu=" << *rep.target_mu;
    std::cout << " -> " << args.output << "\n";
    return 0;
}

int run_coherence(const CommonArgs& args) {
    const nystrom::GramMatrix g = load_input(args);
    const nystrom::CoherenceReport rep =
        nystrom::top_r_coherence(g, static_cast<Index>(args.rank));
    std::cout << "n=" << rep.n << " r=" << rep.r << " mu=" << rep.mu
              << " argmax=(" << rep.argmax_row << "," << rep.argmax_col << ")"
              << (rep.degenerate ? " [degenerate: r exceeds numerical rank]" : "")
              << "\n";
    if (!args.output.empty()) {
        std::ofstream out(args.output);
        if (!out) {
            throw nystrom::IoError("coherence: cannot open '" + args.output + "'");
        }
        out << "n,r,mu,argmaxRow,argmaxCol,degenerate\n"
            << rep.n << ',' << rep.r << ',' << rep.mu << ',' << rep.argmax_row
            << ',' << rep.argmax_col << ',' << (rep.degenerate ? 1 : 0) << "\n";
        if (!out) {
            throw nystrom::IoError("coherence: write error on '" + args.output + "'");
        }
    }
    return 0;
}

int run_approximate(const CommonArgs& args) {
    if (args.l.size() != 1) {
        throw nystrom::InvalidArgumentError("approximate: --l takes one value");
    }
    const nystrom::GramMatrix g = load_input(args);
    const Index l = static_cast<Index>(args.l.front());
    const Index k = args.k >= 1 ? static_cast<Index>(args.k) : l;
    const nystrom::ColumnSample sample =
        nystrom::sample_columns(g.size(), l, args.seed);
    const nystrom::NystromFactors factors = nystrom::build_factors(g, sample, k);
    const nystrom::FactoredApproximation fa =
        nystrom::factored_approximation(factors);
    const nystrom::ApproximationError err =
        nystrom::approximation_error_factored(g, fa.l_factor);
    std::cout << "n=" << g.size() << " l=" << l << " k=" << k
              << " rankW=" << fa.w_rank << " frobeniusError=" << err.frobenius
              << " percentError=" << err.percent << "\n";
    if (!args.output.empty()) {
        const nystrom::GramMatrix dense = nystrom::approximate(factors);
        nystrom::save_matrix_csv(args.output, dense.mat());
        std::cout << "approximation -> " << args.output << "\n";
    }
    return 0;
}

int run_experiment_cmd(ExperimentKind kind, const CommonArgs& args) {
    ExperimentConfig cfg = make_config(kind, args);
    if (kind == ExperimentKind::fig3) {
        if (cfg.k < 1) cfg.k = 50;
        if (cfg.mu_targets.empty()) {
            cfg.mu_targets = {0.0, std::sqrt(0.95 * static_cast<double>(cfg.n))};
        }
    }
    if (kind == ExperimentKind::bound_probe && cfg.mu_targets.empty()) {
        cfg.mu_targets = {0.0};
    }
    std::vector<nystrom::TrialRecord> records;
    if (kind == ExperimentKind::bound_probe) {
        nystrom::BoundProbeSummary summary;
        records = nystrom::run_bound_probe(cfg, &summary);
        std::cout << nystrom::format_summary(summary);
    } else {
        records = nystrom::run_experiment(cfg);
    }
    nystrom::emit_csv(records, args.output);
    std::cout << records.size() << " records -> " << args.output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Column-sampling low-rank approximation of SPSD matrices: "
                 "synthesis, coherence analysis, and experiment runners"};
    app.require_subcommand(1);

    CommonArgs synth_args, coh_args, approx_args;
    CommonArgs fig1_args, fig2_args, fig3_args, probe_args;
    fig3_args.n = 2000;
    fig3_args.k = 50;

    CLI::App* synth = app.add_subcommand(
        "synth", "Generate a synthetic SPSD matrix and write it as CSV");
    synth->add_option("--n", synth_args.n, "Matrix dimension")->required();
    synth->add_option("--rank", synth_args.rank, "Planted basis rank")->required();
    synth->add_option("--eta", synth_args.eta,
                      "Exponential spectrum decay rate (default: flat rank-r)")
        ->delimiter(',');
    synth->add_option("--mu", synth_args.mu,
                      "Forced coherence target (0 or omitted: random basis)")
        ->delimiter(',');
    synth->add_option("--out", synth_args.output, "Output matrix CSV")->required();
    add_seed_option(synth, synth_args);
    add_format_option(synth, synth_args);

    CLI::App* coh = app.add_subcommand(
        "coherence", "Measure top-r coherence of a matrix or kernel Gram matrix");
    coh->add_option("--input", coh_args.input, "Matrix CSV (or features with --kernel)")
        ->required();
    coh->add_option("--rank", coh_args.rank, "Basis size r")->required();
    coh->add_option("--out", coh_args.output, "Optional report CSV");
    add_kernel_options(coh, coh_args);
    add_format_option(coh, coh_args);

    CLI::App* approx = app.add_subcommand(
        "approximate", "Column-sampled approximation of a matrix");
    approx->add_option("--input", approx_args.input,
                       "Matrix CSV (or features with --kernel)")
        ->required();
    approx->add_option("--l", approx_args.l, "Number of sampled columns")
        ->required()
        ->delimiter(',');
    approx->add_option("--k", approx_args.k, "Truncation rank (default: l)");
    approx->add_option("--out", approx_args.output,
                       "Write the dense approximation as matrix CSV");
    add_seed_option(approx, approx_args);
    add_kernel_options(approx, approx_args);
    add_format_option(approx, approx_args);

    CLI::App* fig1 = app.add_subcommand(
        "fig1", "Percent error vs sample count, incoherent vs forced-coherence");
    fig1_args.subsets = 10;  // fig1 has one trial axis: sampling trials
    fig1->add_option("--n", fig1_args.n, "Matrix dimension (synthetic models)");
    fig1->add_option("--rank", fig1_args.rank, "Planted rank (synthetic models)");
    fig1->add_option("--k", fig1_args.k, "Truncation rank (default: l)");
    fig1->add_option("--l", fig1_args.l, "Sample counts")->required()->delimiter(',');
    fig1->add_option("--mu", fig1_args.mu,
                     "Override forced coherence target (default 0.9 sqrt(n))")
        ->delimiter(',');
    fig1->add_option("--trials", fig1_args.subsets, "Sampling trials per matrix")
        ->capture_default_str();
    fig1->add_option("--input", fig1_args.input, "Run on this matrix instead");
    fig1->add_option("--out", fig1_args.output, "Result CSV")->required();
    add_seed_option(fig1, fig1_args);
    add_kernel_options(fig1, fig1_args);
    add_threads_option(fig1, fig1_args);
    add_format_option(fig1, fig1_args);

    CLI::App* fig2 = app.add_subcommand(
        "fig2", "Coherence per matrix; with --l, growth over submatrix sizes");
    fig2->add_option("--n", fig2_args.n, "Matrix dimension (synthetic models)");
    fig2->add_option("--rank", fig2_args.rank, "Basis size r")->required();
    fig2->add_option("--l", fig2_args.l, "Submatrix sizes (growth mode)")
        ->delimiter(',');
    fig2->add_option("--mu", fig2_args.mu,
                     "Override forced coherence target (default 0.9 sqrt(n))")
        ->delimiter(',');
    fig2->add_option("--trials", fig2_args.trials, "Matrices per model")
        ->capture_default_str();
    fig2->add_option("--subsets", fig2_args.subsets, "Subset draws per size")
        ->capture_default_str();
    fig2->add_option("--input", fig2_args.input, "Run on this matrix instead");
    fig2->add_option("--out", fig2_args.output, "Result CSV")->required();
    add_seed_option(fig2, fig2_args);
    add_kernel_options(fig2, fig2_args);
    add_threads_option(fig2, fig2_args);
    add_format_option(fig2, fig2_args);

    CLI::App* fig3 = app.add_subcommand(
        "fig3", "Percent error over a decay-rate x coherence x sample-count grid");
    fig3->add_option("--n", fig3_args.n, "Matrix dimension")
        ->capture_default_str();
    fig3->add_option("--rank", fig3_args.rank, "Planted rank (default: k)");
    fig3->add_option("--k", fig3_args.k, "Truncation rank (default 50)");
    fig3->add_option("--l", fig3_args.l, "Sample counts")->required()->delimiter(',');
    fig3->add_option("--eta", fig3_args.eta, "Spectrum decay rates")
        ->required()
        ->delimiter(',');
    fig3->add_option("--mu", fig3_args.mu,
                     "Coherence levels, 0 = random basis (default: 0 and "
                     "sqrt(0.95 n))")
        ->delimiter(',');
    fig3->add_option("--trials", fig3_args.trials, "Matrices per cell")
        ->capture_default_str();
    fig3->add_option("--subsets", fig3_args.subsets, "Subset draws per matrix")
        ->capture_default_str();
    fig3->add_option("--out", fig3_args.output, "Result CSV")->required();
    add_seed_option(fig3, fig3_args);
    add_threads_option(fig3, fig3_args);
    add_format_option(fig3, fig3_args);

    CLI::App* probe = app.add_subcommand(
        "bound-probe", "Success frequencies of sampled subsets vs sample count");
    probe->add_option("--n", probe_args.n, "Matrix dimension")->required();
    probe->add_option("--rank", probe_args.rank, "Planted rank")->required();
    probe->add_option("--k", probe_args.k, "Truncation rank (default: l)");
    probe->add_option("--l", probe_args.l, "Sample counts")->required()->delimiter(',');
    probe->add_option("--mu", probe_args.mu,
                      "Coherence levels, 0 = random basis (default: 0)")
        ->delimiter(',');
    probe->add_option("--trials", probe_args.trials, "Matrices per level")
        ->capture_default_str();
    probe->add_option("--subsets", probe_args.subsets, "Subset draws per matrix")
        ->capture_default_str();
    probe->add_option("--delta", probe_args.delta, "Failure budget for l*")
        ->capture_default_str();
    probe->add_option("--c1", probe_args.c1, "Predicted-bound constant (log r term)")
        ->capture_default_str();
    probe->add_option("--c2", probe_args.c2,
                      "Predicted-bound constant (log(3/delta) term)")
        ->capture_default_str();
    probe->add_option("--out", probe_args.output, "Result CSV")->required();
    add_seed_option(probe, probe_args);
    add_threads_option(probe, probe_args);
    add_format_option(probe, probe_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return run_synth(synth_args);
        if (coh->parsed()) return run_coherence(coh_args);
        if (approx->parsed()) return run_approximate(approx_args);
        if (fig1->parsed()) return run_experiment_cmd(ExperimentKind::fig1, fig1_args);
        if (fig2->parsed()) return run_experiment_cmd(ExperimentKind::fig2, fig2_args);
        if (fig3->parsed()) return run_experiment_cmd(ExperimentKind::fig3, fig3_args);
        if (probe->parsed()) {
            return run_experiment_cmd(ExperimentKind::bound_probe, probe_args);
        }
    } catch (const nystrom::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return nystrom::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
