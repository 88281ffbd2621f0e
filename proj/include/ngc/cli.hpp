#pragma once

// Command-line surface: simulate / fit / sweep / eval / export. Every flag
// can also come from a flat key=value config file via --config. Output files
// are written atomically, so a failing run never leaves partial artifacts.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ngc/eval.hpp"
#include "ngc/io.hpp"
#include "ngc/simulate.hpp"

namespace ngc {

/// Options shared by fit and sweep; validated against module preconditions
/// before any work starts.
struct RunConfig {
    std::string panel_path;
    std::string format = "csv";  // csv | dream3
    std::string family = "cmlp";
    std::size_t lag = 5;
    std::size_t hidden = 10;
    std::size_t layers = 1;
    std::string activation = "tanh";
    std::string penalty = "hier";
    double mixed_alpha = 0.5;
    double forget_bias = 0.0;
    std::size_t segment_length = 0;
    bool standardize = true;
    std::uint64_t seed = 1;
    std::size_t max_iters = 5000;
    double tolerance = 1e-6;
    double initial_step = 1.0;
    double backtrack = 0.5;

    FitPlan to_plan() const {
        FitPlan plan;
        plan.family = model_family_from_string(family);
        plan.lag = lag;
        plan.hidden = hidden;
        plan.layers = layers;
        plan.activation = activation_from_string(activation);
        plan.penalty = penalty_family_from_string(penalty);
        plan.mixed_alpha = mixed_alpha;
        plan.forget_bias = forget_bias;
        plan.segment_length = segment_length;
        plan.optimizer.max_iters = max_iters;
        plan.optimizer.tolerance = tolerance;
        plan.optimizer.initial_step = initial_step;
        plan.optimizer.backtrack_factor = backtrack;
        plan.optimizer.seed = seed;
        if (plan.family == ModelFamily::Cmlp && lag == 0)
            throw CLI::ValidationError("--lag", "cMLP requires lag >= 1");
        if (hidden == 0) throw CLI::ValidationError("--hidden", "hidden units must be >= 1");
        if (segment_length == 1) throw CLI::ValidationError("--segment-length", "must be 0 (off) or >= 2");
        PenaltySpec{plan.penalty, 0.0, plan.mixed_alpha}.validate();
        return plan;
    }

    TimeSeriesPanel load_panel(PanelScaling* scaling) const {
        TimeSeriesPanel panel = format == "dream3" ? load_dream3_tsv(panel_path)
                                                   : load_panel_csv(panel_path);
        if (standardize) return standardize_panel(panel, scaling);
        if (scaling) *scaling = PanelScaling{Vector(panel.series_count(), 0.0),
                                             Vector(panel.series_count(), 1.0)};
        return panel;
    }
};

namespace cli_detail {

inline void add_run_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--panel", cfg.panel_path, "input panel file")->required();
    cmd->add_option("--format", cfg.format, "panel format: csv | dream3")
        ->check(CLI::IsMember({"csv", "dream3"}));
    cmd->add_option("--family", cfg.family, "model family: cmlp | clstm")
        ->check(CLI::IsMember({"cmlp", "clstm"}));
    cmd->add_option("--lag", cfg.lag, "cMLP maximum lag K");
    cmd->add_option("--hidden", cfg.hidden, "hidden units per layer");
    cmd->add_option("--layers", cfg.layers, "cMLP hidden layer count");
    cmd->add_option("--activation", cfg.activation, "tanh | sigmoid")
        ->check(CLI::IsMember({"tanh", "sigmoid", "linear"}));
    cmd->add_option("--penalty", cfg.penalty, "group | mixed | hier")
        ->check(CLI::IsMember({"group", "mixed", "hier"}));
    cmd->add_option("--mixed-alpha", cfg.mixed_alpha, "MIXED mixing weight in [0,1]");
    cmd->add_option("--forget-bias", cfg.forget_bias, "cLSTM forget gate bias init");
    cmd->add_option("--segment-length", cfg.segment_length,
                    "cLSTM truncated BPTT segment length (0 = full BPTT)");
    cmd->add_flag("--standardize,!--no-standardize", cfg.standardize,
                  "per-series zero-mean unit-variance scaling (default on)");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--max-iters", cfg.max_iters, "optimizer iteration cap");
    cmd->add_option("--tolerance", cfg.tolerance, "relative objective stall tolerance");
    cmd->add_option("--initial-step", cfg.initial_step, "line search initial step");
    cmd->add_option("--backtrack", cfg.backtrack, "line search shrink factor");
}

}  // namespace cli_detail

/// Entry point behind main(); returns the process exit code.
inline int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"nonlinear Granger-causality discovery with sparse componentwise networks"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file");

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "generate a panel with ground truth");
    struct {
        std::string kind = "lorenz96";
        std::size_t p = 20;
        std::size_t t = 1000;
        std::uint64_t seed = 1;
        double forcing = 10.0;
        double dt = 0.05;
        double noise_std = -1.0;  // -1 = family default
        std::size_t burn_in = 0;  // 0 = family default
        std::size_t var_lag = 3;
        std::size_t edges_per_row = 2;
        double coef = 0.096;
        std::string out_panel, out_truth;
    } s;
    sim->add_option("--kind", s.kind, "lorenz96 | var")->check(CLI::IsMember({"lorenz96", "var"}));
    sim->add_option("--p", s.p, "series count")->required();
    sim->add_option("--t", s.t, "sample count")->required();
    sim->add_option("--seed", s.seed, "random seed");
    sim->add_option("--f,--forcing", s.forcing, "Lorenz-96 forcing constant");
    sim->add_option("--dt", s.dt, "Lorenz-96 sampling interval");
    sim->add_option("--noise-std", s.noise_std, "noise std (default: 0 lorenz, 1 var)");
    sim->add_option("--burn-in", s.burn_in, "burn-in (default: 100 lorenz samples, 200 var steps)");
    sim->add_option("--var-lag", s.var_lag, "VAR true lag order");
    sim->add_option("--edges-per-row", s.edges_per_row, "VAR off-diagonal deps per row");
    sim->add_option("--coef", s.coef, "VAR coefficient value");
    sim->add_option("--out-panel", s.out_panel, "panel CSV output")->required();
    sim->add_option("--out-truth", s.out_truth, "ground-truth graph output")->required();

    // --- fit ---
    auto* fit = app.add_subcommand("fit", "fit all series at one lambda and extract the graph");
    RunConfig fit_cfg;
    double fit_lambda = 0.0;
    std::string fit_out_graph, fit_out_models;
    cli_detail::add_run_options(fit, fit_cfg);
    fit->add_option("--lambda", fit_lambda, "penalty strength")->required();
    fit->add_option("--out-graph", fit_out_graph, "graph output")->required();
    fit->add_option("--out-models", fit_out_models, "fitted models output");

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "fit a descending lambda grid with warm starts");
    RunConfig sweep_cfg;
    std::vector<double> sweep_lambdas;
    std::size_t grid_size = 20;
    double grid_ratio = 100.0;
    std::string sweep_out;
    cli_detail::add_run_options(sweep, sweep_cfg);
    sweep->add_option("--lambdas", sweep_lambdas, "explicit lambda values (otherwise auto grid)");
    sweep->add_option("--grid-size", grid_size, "auto grid size");
    sweep->add_option("--grid-ratio", grid_ratio, "auto grid lambda_max/lambda_min ratio");
    sweep->add_option("--out-sweep", sweep_out, "sweep output")->required();

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "score a sweep against a ground-truth graph");
    std::string eval_sweep, eval_truth, eval_out;
    bool include_diagonal = false;
    eval->add_option("--sweep", eval_sweep, "sweep file")->required();
    eval->add_option("--truth", eval_truth, "ground-truth graph file")->required();
    eval->add_option("--out-curves", eval_out, "curve summary output")->required();
    eval->add_flag("--include-diagonal", include_diagonal, "score self-edges too");

    // --- export ---
    auto* exp = app.add_subcommand("export", "standardize a stored graph for visualization");
    std::string exp_graph, exp_out, exp_groups;
    exp->add_option("--graph", exp_graph, "graph file")->required();
    exp->add_option("--out", exp_out, "standardized graph output")->required();
    exp->add_option("--groups", exp_groups, "series-to-node grouping file (name TAB label)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) {
            TimeSeriesPanel panel;
            GrangerGraph truth;
            if (s.kind == "lorenz96") {
                LorenzSpec spec;
                spec.p = s.p;
                spec.forcing = s.forcing;
                spec.delta_t = s.dt;
                spec.length = s.t;
                spec.burn_in = s.burn_in > 0 ? s.burn_in : 100;
                spec.noise_std = s.noise_std >= 0.0 ? s.noise_std : 0.0;
                spec.seed = s.seed;
                std::tie(panel, truth) = simulate_lorenz96(spec);
            } else {
                VarSpec spec = make_sparse_var(s.p, s.var_lag, s.edges_per_row, s.coef, s.seed,
                                               s.noise_std >= 0.0 ? s.noise_std : 1.0, s.t);
                spec.burn_in = s.burn_in > 0 ? s.burn_in : 200;
                std::tie(panel, truth) = simulate_var(spec);
            }
            save_panel_csv(panel, s.out_panel);
            save_graph(truth, s.out_truth);
        } else if (fit->parsed()) {
            PanelScaling scaling;
            const TimeSeriesPanel panel = fit_cfg.load_panel(&scaling);
            const FitPlan plan = fit_cfg.to_plan();
            const FitAllResult result = fit_all_series(panel, plan, fit_lambda);
            save_graph(result.graph, fit_out_graph);
            if (!fit_out_models.empty()) {
                if (plan.family == ModelFamily::Cmlp)
                    save_cmlp_models(result.cmlp, panel.names, fit_out_models, &scaling);
                else
                    save_clstm_models(result.clstm, panel.names, fit_out_models, &scaling);
            }
        } else if (sweep->parsed()) {
            PanelScaling scaling;
            const TimeSeriesPanel panel = sweep_cfg.load_panel(&scaling);
            const FitPlan plan = sweep_cfg.to_plan();
            Vector grid;
            if (!sweep_lambdas.empty()) {
                grid = sweep_lambdas;
                std::sort(grid.begin(), grid.end(), std::greater<double>());
                grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
            } else {
                grid = log_lambda_grid(panel_lambda_max(plan, panel), grid_size, grid_ratio);
            }
            const SweepResult result = lambda_sweep(panel, plan, grid);
            save_sweep(result, sweep_out);
        } else if (eval->parsed()) {
            SweepResult result = load_sweep(eval_sweep);
            result.ground_truth = load_graph(eval_truth);
            if (include_diagonal) result.include_diagonal = true;
            save_curves(score_sweep(result), eval_out);
        } else if (exp->parsed()) {
            const GrangerGraph g = load_graph(exp_graph);
            std::vector<std::string> labels;
            if (!exp_groups.empty()) {
                std::map<std::string, std::string> label_of;
                for (const auto& line : read_lines(exp_groups)) {
                    if (line.empty()) continue;
                    const auto cells = split(line, '\t');
                    if (cells.size() != 2)
                        throw std::invalid_argument(exp_groups + ": expected 'name<TAB>label' lines");
                    label_of[cells[0]] = cells[1];
                }
                for (const auto& name : g.names) {
                    const auto it = label_of.find(name);
                    if (it == label_of.end())
                        throw std::invalid_argument(exp_groups + ": no group for series '" + name + "'");
                    labels.push_back(it->second);
                }
            }
            save_standardized_graph(standardize_graph(g, labels), exp_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace ngc
