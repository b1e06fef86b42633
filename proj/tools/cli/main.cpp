// anchorda: multi-anchor active domain adaptation pipeline.
//
// Exit codes: 0 success, 2 usage or validation, 3 missing or unreadable
// input, 4 computation error.

#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>
#include <spdlog/sinks/stdout_color_sinks.h>

#include "anchorda/error.hpp"
#include "anchorda/parallel.hpp"
#include "commands.hpp"

namespace {

int exit_code_for(anchorda::ErrorKind kind) {
    using anchorda::ErrorKind;
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::DuplicateId:
        case ErrorKind::MissingField:
        case ErrorKind::VersionMismatch:
        case ErrorKind::TooFewSamples:
            return 2;
        case ErrorKind::UnresolvablePath:
        case ErrorKind::MissingMap:
        case ErrorKind::MissingInput:
        case ErrorKind::BadMagic:
        case ErrorKind::UnsupportedDtype:
        case ErrorKind::TruncatedPayload:
        case ErrorKind::TrailingData:
        case ErrorKind::DimOverflow:
            return 3;
        default:
            return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace anchorda::cli;

    CLI::App app{"Multi-anchor active domain adaptation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    unsigned threads = 0;
    std::string log_level = "info";
    auto* seed_opt = app.add_option("--seed", global.seed, "Root seed for every random stream");
    app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
    app.add_option("--out", global.out, "Output directory")->capture_default_str();

    AggregateOptions agg;
    auto* aggregate = app.add_subcommand("aggregate", "Build image-level vectors from a manifest");
    aggregate->add_option("--manifest", agg.manifest)->required();
    aggregate->add_option("--map", agg.map, "ground_truth or prediction")
        ->check(CLI::IsMember({"ground_truth", "prediction"}))
        ->capture_default_str();

    ClusterOptions clu;
    auto* cluster = app.add_subcommand("cluster", "K-means anchors into a bank file");
    cluster->add_option("--vectors", clu.vectors)->required();
    cluster->add_option("--k", clu.k)->capture_default_str();
    cluster->add_option("--domain", clu.domain)
        ->check(CLI::IsMember({"source", "target_warmup", "target"}))
        ->capture_default_str();
    cluster->add_option("--alpha", clu.alpha)->capture_default_str();
    cluster->add_option("--max-iters", clu.max_iters)->capture_default_str();
    cluster->add_option("--tol", clu.tol)->capture_default_str();
    cluster->add_option("--restarts", clu.restarts)->capture_default_str();
    cluster->add_flag("--normalize", clu.normalize, "L2-normalize vectors first");

    SelectOptions sel;
    auto* selectc = app.add_subcommand("select", "Score target samples and pick the budget");
    selectc->add_option("--vectors", sel.vectors)->required();
    selectc->add_option("--source-bank", sel.source_bank);
    selectc->add_option("--target-bank", sel.target_bank);
    selectc->add_option("--manifest", sel.manifest, "Probability maps and discriminator scores");
    selectc->add_option("--source-vectors", sel.source_vectors, "Source vectors for the prototype centroid");
    selectc->add_option("--metric", sel.metric)
        ->check(CLI::IsMember({"dual_domain", "mada_source_only", "random", "entropy", "adversarial",
                               "aada", "prototype"}))
        ->capture_default_str();
    selectc->add_option("--direction", sel.direction)
        ->check(CLI::IsMember({"largest", "smallest"}))
        ->capture_default_str();
    selectc->add_option("--budget", sel.budget, "Fraction of samples to select")->capture_default_str();
    selectc->add_flag("--normalize", sel.normalize);

    UpdateBankOptions upd;
    auto* update = app.add_subcommand("update-bank", "EMA-refine a bank with new vectors");
    update->add_option("--bank", upd.bank)->required();
    update->add_option("--vectors", upd.vectors)->required();
    update->add_option("--alpha", upd.alpha, "Override the bank's alpha");
    update->add_flag("--normalize", upd.normalize);

    LossEvalOptions loss;
    auto* loss_eval = app.add_subcommand("loss-eval", "Per-sample loss terms");
    loss_eval->add_option("--manifest", loss.manifest)->required();
    loss_eval->add_option("--target-bank", loss.target_bank)->required();
    loss_eval->add_option("--ohem-threshold", loss.ohem_threshold)->capture_default_str();
    loss_eval->add_option("--ohem-min-kept", loss.ohem_min_kept)->capture_default_str();
    loss_eval->add_option("--alignment-scope", loss.dis_scope, "Samples the anchor-alignment term covers")
        ->check(CLI::IsMember({"all", "labeled", "unlabeled"}))
        ->capture_default_str();
    loss_eval->add_flag("--normalize", loss.normalize);

    AugmentOptions aug;
    auto* augment = app.add_subcommand("augment", "Plan and apply cutmix / copy-paste");
    augment->add_option("--manifest", aug.manifest)->required();
    augment->add_option("--kind", aug.kind)
        ->check(CLI::IsMember({"cutmix", "copy_paste", "both"}))
        ->capture_default_str();
    augment->add_option("--plans", aug.plans, "Replay a saved plans.json");
    augment->add_option("--tail-quantile", aug.tail_quantile)->capture_default_str();
    augment->add_option("--rect-min", aug.fraction_lo)->capture_default_str();
    augment->add_option("--rect-max", aug.fraction_hi)->capture_default_str();
    augment->add_option("--jitter", aug.jitter, "Max copy-paste offset per axis")->capture_default_str();

    BenchOptions ben;
    auto* bench = app.add_subcommand("bench", "Synthetic selection benchmark");
    bench->add_option("--spec", ben.spec)->required();
    bench->add_option("--protocol", ben.protocol)
        ->check(CLI::IsMember({"compare", "budget_sweep", "anchor_sweep"}))
        ->capture_default_str();
    bench->add_flag("--timing", ben.timing, "Include wall-clock timings in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto logger = spdlog::stderr_color_mt("anchorda");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(log_level));
    global.seed_given = seed_opt->count() > 0;
    anchorda::set_max_threads(threads);

    try {
        if (*aggregate) run_aggregate(global, agg);
        else if (*cluster) run_cluster(global, clu);
        else if (*selectc) run_select(global, sel);
        else if (*update) run_update_bank(global, upd);
        else if (*loss_eval) run_loss_eval(global, loss);
        else if (*augment) run_augment(global, aug);
        else if (*bench) run_bench(global, ben);
    } catch (const anchorda::Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 4;
    }
    return 0;
}
