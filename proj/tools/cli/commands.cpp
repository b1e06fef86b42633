#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "anchorda/aggregation.hpp"
#include "anchorda/anchor_bank.hpp"
#include "anchorda/augment.hpp"
#include "anchorda/bench.hpp"
#include "anchorda/error.hpp"
#include "anchorda/kmeans.hpp"
#include "anchorda/losses.hpp"
#include "anchorda/manifest.hpp"
#include "anchorda/parallel.hpp"
#include "anchorda/rng.hpp"
#include "anchorda/selection.hpp"
#include "anchorda/tensor_io.hpp"
#include "anchorda/vector_set.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace anchorda::cli {
namespace {

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        fail(ErrorKind::IoFailure, "cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    if (!fs::exists(path)) fail(ErrorKind::UnresolvablePath, "no such file: " + path.string());
    std::ifstream in(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::InvalidArgument, path.string() + " is not JSON: " + e.what());
    }
}

void normalize_in_place(std::vector<double>& v) {
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm > 0.0)
        for (double& x : v) x /= norm;
}

std::vector<ImageVector> load_vectors(const fs::path& path, bool normalize) {
    auto vectors = load_vector_set(path);
    if (normalize)
        for (auto& v : vectors) normalize_in_place(v.values);
    return vectors;
}

// Label map used as segmentation target: ground truth, else the prediction
// map, else the argmax of the probability map.
LabelMap best_labels(const ManifestSample& s) {
    if (s.label_path) return label_map_from(read_tensor(*s.label_path));
    if (s.prediction_path) return label_map_from(read_tensor(*s.prediction_path));
    if (s.probability_path) return argmax_labels(probability_map_from(read_tensor(*s.probability_path)));
    fail(ErrorKind::MissingMap, "sample '" + s.id + "' has no label, prediction or probability map");
}

LabelMap pseudo_labels(const ManifestSample& s, const ProbabilityMap& probabilities) {
    if (s.prediction_path) return label_map_from(read_tensor(*s.prediction_path));
    return argmax_labels(probabilities);
}

void check_unit_interval(double value, const std::string& name) {
    require(value >= 0.0 && value <= 1.0, name + " must lie in [0, 1]");
}

}  // namespace

void run_aggregate(const GlobalOptions& g, const AggregateOptions& o) {
    const MapKind kind = parse_map_kind(o.map);
    const Manifest manifest = load_manifest(o.manifest);
    prepare_dir(g.out);

    const auto vectors = batch_vectors(manifest, kind);
    save_vector_set(g.out / "vectors.tnsr", vectors,
                    {manifest.num_categories, manifest.feature_channels, to_string(kind)});
    spdlog::info("aggregated {} samples into {}", vectors.size(), (g.out / "vectors.tnsr").string());
}

void run_cluster(const GlobalOptions& g, const ClusterOptions& o) {
    const DomainTag tag = parse_domain_tag(o.domain);
    check_unit_interval(o.alpha, "alpha");
    require(o.restarts >= 1, "restarts must be at least 1");
    const KMeansConfig cfg{.k = o.k,
                           .max_iters = o.max_iters,
                           .tol = o.tol,
                           .seed = derive_seed(g.seed, "cluster"),
                           .normalize = o.normalize};
    const auto vectors = load_vector_set(o.vectors);
    cfg.validate(vectors.size());
    prepare_dir(g.out);

    const Clustering c = kmeans_best_of(to_matrix(vectors), cfg, o.restarts);
    if (c.degenerate) spdlog::warn("fewer distinct vectors than K; some anchors coincide");
    const AnchorBank bank = init_from_clustering(c, tag, o.alpha);
    save_bank(bank, g.out / "anchors.bank");

    json j;
    j["k"] = cfg.k;
    j["restarts"] = o.restarts;
    j["normalize"] = cfg.normalize;
    j["domain_tag"] = to_string(tag);
    j["alpha"] = o.alpha;
    j["sse"] = c.sse;
    j["iterations_run"] = c.iterations_run;
    j["sse_history"] = c.sse_history;
    j["degenerate"] = c.degenerate;
    json ids = json::array();
    for (const auto& v : vectors) ids.push_back(v.source_id);
    j["ids"] = std::move(ids);
    j["assignment"] = c.assignment;
    j["bank_fingerprint"] = fingerprint(bank);
    write_json(g.out / "clustering.json", j);
    spdlog::info("clustered {} vectors into {} anchors (sse {:.6g})", vectors.size(), cfg.k, c.sse);
}

void run_select(const GlobalOptions& g, const SelectOptions& o) {
    const SelectionConfig cfg{.budget_fraction = o.budget,
                              .metric = parse_metric(o.metric),
                              .seed = derive_seed(g.seed, "select"),
                              .direction = parse_direction(o.direction)};
    cfg.validate();

    std::optional<AnchorBank> source_bank, target_bank;
    if (o.source_bank) source_bank = load_bank(*o.source_bank);
    if (o.target_bank) target_bank = load_bank(*o.target_bank);

    const auto vectors = load_vectors(o.vectors, o.normalize);
    std::vector<SampleRecord> records(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        records[i].id = vectors[i].source_id;
        records[i].vector = vectors[i].values;
    }

    if (o.manifest) {
        const Manifest manifest = load_manifest(*o.manifest);
        const bool needs_maps = cfg.metric == Metric::entropy || cfg.metric == Metric::aada;
        parallel_for(records.size(), [&](std::size_t i) {
            const ManifestSample* s = manifest.find(records[i].id);
            if (!s) return;
            records[i].discriminator_score = s->discriminator_score;
            if (needs_maps && s->probability_path)
                records[i].probabilities = probability_map_from(read_tensor(*s->probability_path));
        });
    }

    std::vector<double> centroid;
    if (o.source_vectors) {
        const auto source = load_vectors(*o.source_vectors, o.normalize);
        if (source.empty()) fail(ErrorKind::TooFewSamples, "source vectors file is empty");
        centroid.assign(source.front().values.size(), 0.0);
        for (const auto& v : source) {
            if (v.values.size() != centroid.size())
                fail(ErrorKind::ShapeMismatch, "source vectors differ in length");
            for (std::size_t d = 0; d < centroid.size(); ++d) centroid[d] += v.values[d];
        }
        for (double& x : centroid) x /= static_cast<double>(source.size());
    }

    SelectionContext ctx;
    if (source_bank) ctx.source_bank = &*source_bank;
    if (target_bank) ctx.target_bank = &*target_bank;
    if (o.source_vectors) ctx.centroid = &centroid;

    prepare_dir(g.out);
    const SelectionReport report = select(records, cfg, ctx);
    write_json(g.out / "selection.json", to_json(report));
    spdlog::info("selected {} of {} samples by {}", report.budget_count, records.size(),
                 to_string(cfg.metric));
}

void run_update_bank(const GlobalOptions& g, const UpdateBankOptions& o) {
    AnchorBank bank = load_bank(o.bank);
    if (o.alpha) {
        check_unit_interval(*o.alpha, "alpha");
        bank.alpha = *o.alpha;
    }
    const std::string before = fingerprint(bank);
    const auto vectors = load_vectors(o.vectors, o.normalize);
    prepare_dir(g.out);

    if (vectors.empty()) spdlog::warn("no vectors given; bank left unchanged");
    json updates = json::array();
    for (const auto& v : vectors) {
        const std::size_t index = ema_update(bank, v.values);
        updates.push_back({{"id", v.source_id}, {"anchor", index}});
    }
    save_bank(bank, g.out / "anchors.bank");

    json j;
    j["alpha"] = bank.alpha;
    j["input_fingerprint"] = before;
    j["output_fingerprint"] = fingerprint(bank);
    j["updates"] = std::move(updates);
    j["update_counts"] = bank.update_counts;
    write_json(g.out / "update.json", j);
    spdlog::info("applied {} EMA updates", vectors.size());
}

void run_loss_eval(const GlobalOptions& g, const LossEvalOptions& o) {
    const OhemConfig ohem{.prob_threshold = o.ohem_threshold, .min_kept_fraction = o.ohem_min_kept};
    ohem.validate();
    require(o.dis_scope == "all" || o.dis_scope == "labeled" || o.dis_scope == "unlabeled",
            "alignment scope must be all, labeled or unlabeled");
    const Manifest manifest = load_manifest(o.manifest);
    const AnchorBank bank = load_bank(o.target_bank);
    for (const auto& s : manifest.samples)
        if (!s.probability_path)
            fail(ErrorKind::MissingMap, "sample '" + s.id + "' has no probability map");
    prepare_dir(g.out);

    // Labeled samples contribute cross-entropy against their labels; every
    // sample contributes OHEM against its pseudo labels.
    struct Row {
        bool labeled = false;
        double seg = 0.0, cons = 0.0, dis = 0.0, total = 0.0;
    };
    std::vector<Row> rows(manifest.samples.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const ManifestSample& s = manifest.samples[i];
        ProbabilityMap probabilities = probability_map_from(read_tensor(*s.probability_path));
        const LabelMap pseudo = pseudo_labels(s, probabilities);
        Row& r = rows[i];
        r.labeled = s.label_path.has_value();

        LossValue seg, dis;
        if (r.labeled) seg = cross_entropy({probabilities, label_map_from(read_tensor(*s.label_path))});
        const LossValue cons = ohem_cross_entropy({std::move(probabilities), pseudo}, ohem);
        if (o.dis_scope == "all" || (o.dis_scope == "labeled") == r.labeled) {
            const FeatureMap features = feature_map_from(read_tensor(s.feature_path));
            ImageVector v = build_image_vector(features, pseudo, manifest.num_categories, s.id);
            if (o.normalize) normalize_in_place(v.values);
            dis = soft_alignment_loss(v.values, bank);
        }
        r.seg = seg.value;
        r.cons = cons.value;
        r.dis = dis.value;
        r.total = total_semi_loss(seg, cons, dis).value;
    });

    json samples = json::array();
    Row sum;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        samples.push_back({{"id", manifest.samples[i].id},
                           {"labeled", r.labeled},
                           {"seg", r.seg},
                           {"cons", r.cons},
                           {"dis", r.dis},
                           {"total", r.total}});
        sum.seg += r.seg;
        sum.cons += r.cons;
        sum.dis += r.dis;
        sum.total += r.total;
    }
    json j;
    j["ohem_threshold"] = ohem.prob_threshold;
    j["ohem_min_kept"] = ohem.min_kept_fraction;
    j["alignment_scope"] = o.dis_scope;
    j["target_bank_fingerprint"] = fingerprint(bank);
    j["samples"] = std::move(samples);
    j["totals"] = {{"seg", sum.seg}, {"cons", sum.cons}, {"dis", sum.dis}, {"total", sum.total}};
    write_json(g.out / "losses.json", j);
    spdlog::info("evaluated losses for {} samples", rows.size());
}

namespace {

struct AugmentInput {
    ImageLabelPair pair;
    ClassConfidence confidence;
};

std::string draw_donor(const DonorDistribution& dist, std::uint64_t seed) {
    CounterRng rng(derive_seed(seed, "copy-paste-donor"));
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.weights.size(); ++i) {
        acc += dist.weights[i];
        if (u < acc) return dist.candidate_ids[i];
    }
    return dist.candidate_ids.back();
}

}  // namespace

void run_augment(const GlobalOptions& g, const AugmentOptions& o) {
    require(o.kind == "cutmix" || o.kind == "copy_paste" || o.kind == "both",
            "kind must be cutmix, copy_paste or both");
    const Manifest manifest = load_manifest(o.manifest);
    const std::size_t n = manifest.samples.size();
    const std::size_t num_categories = manifest.num_categories;

    std::vector<AugmentInput> inputs(n);
    parallel_for(n, [&](std::size_t i) {
        const ManifestSample& s = manifest.samples[i];
        inputs[i].pair.image = feature_map_from(read_tensor(s.feature_path));
        inputs[i].pair.label = best_labels(s);
        if (s.probability_path) {
            const ProbabilityMap p = probability_map_from(read_tensor(*s.probability_path));
            inputs[i].confidence = confidence(p, pseudo_labels(s, p), num_categories);
        } else {
            inputs[i].confidence.assign(num_categories, std::nullopt);
        }
    });
    auto index_of = [&](const std::string& id) {
        for (std::size_t i = 0; i < n; ++i)
            if (manifest.samples[i].id == id) return i;
        fail(ErrorKind::MissingInput, "plan references unknown sample '" + id + "'");
    };

    json plans = json::array();
    std::set<std::uint16_t> tail;
    if (o.plans) {
        const json saved = read_json(*o.plans);
        try {
            for (const auto& c : saved.at("tail_classes")) tail.insert(c.get<std::uint16_t>());
            plans = saved.at("plans");
        } catch (const json::exception& e) {
            fail(ErrorKind::MissingField, o.plans->string() + ": " + e.what());
        }
    } else {
        require(o.fraction_lo > 0.0 && o.fraction_lo <= o.fraction_hi && o.fraction_hi <= 1.0,
                "rect fraction range must satisfy 0 < lo <= hi <= 1");
        require(o.tail_quantile >= 0.0 && o.tail_quantile <= 1.0, "tail quantile must lie in [0, 1]");
        std::vector<LabelMap> labels;
        for (const auto& in : inputs) labels.push_back(in.pair.label);
        tail = tail_classes(labels, num_categories, o.tail_quantile);

        const std::uint64_t aug_seed = derive_seed(g.seed, "augment");
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& id = manifest.samples[i].id;
            std::vector<std::string> ids;
            std::vector<ClassConfidence> confs;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                ids.push_back(manifest.samples[j].id);
                confs.push_back(inputs[j].confidence);
            }
            const DonorDistribution dist = donor_distribution(ids, confs);
            const std::uint64_t seed = derive_seed(aug_seed, std::uint64_t{i});
            const auto& base = inputs[i].pair;
            if (o.kind != "copy_paste") {
                const CutmixPlan plan = plan_cutmix(id, dist, base.label.height, base.label.width,
                                                    {o.fraction_lo, o.fraction_hi}, seed);
                plans.push_back(to_json(plan));
            }
            if (o.kind != "cutmix") {
                const std::string donor = draw_donor(dist, seed);
                try {
                    const CopyPastePlan plan =
                        plan_copy_paste(id, base.label, donor, inputs[index_of(donor)].pair.label, tail,
                                        seed, o.jitter);
                    plans.push_back(to_json(plan));
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NoCopyableClasses) throw;
                    spdlog::warn("no copy-paste for '{}': {}", id, e.what());
                }
            }
        }
    }

    const fs::path dir = g.out / "augmented";
    prepare_dir(dir);
    std::size_t violations = 0;
    for (const auto& entry : plans) {
        ImageLabelPair output;
        std::string base_id, donor_id, kind;
        std::ptrdiff_t dx = 0, dy = 0;
        try {
            kind = entry.at("kind").get<std::string>();
            if (kind == "cutmix") {
                const CutmixPlan plan = cutmix_plan_from_json(entry);
                base_id = plan.base_id;
                donor_id = plan.donor_id;
                output = apply_cutmix(inputs[index_of(base_id)].pair, inputs[index_of(donor_id)].pair, plan);
            } else if (kind == "copy_paste") {
                const CopyPastePlan plan = copy_paste_plan_from_json(entry);
                base_id = plan.base_id;
                donor_id = plan.donor_id;
                dx = plan.dx;
                dy = plan.dy;
                output = apply_copy_paste(inputs[index_of(base_id)].pair,
                                          inputs[index_of(donor_id)].pair, plan);
            } else {
                fail(ErrorKind::InvalidArgument, "unknown plan kind '" + kind + "'");
            }
        } catch (const json::exception& e) {
            fail(ErrorKind::MissingField, std::string("malformed plan: ") + e.what());
        }
        violations += provenance_violations(inputs[index_of(base_id)].pair,
                                            inputs[index_of(donor_id)].pair, output, dx, dy);
        const std::string stem = base_id + "." + kind;
        write_tensor(dir / (stem + ".features.tnsr"), to_tensor(output.image));
        write_tensor(dir / (stem + ".labels.tnsr"), to_tensor(output.label));
    }

    json j;
    j["tail_classes"] = tail;
    j["plans"] = plans;
    j["audit"] = {{"outputs", plans.size()}, {"provenance_violations", violations}};
    write_json(g.out / "plans.json", j);
    if (violations > 0)
        fail(ErrorKind::ProvenanceViolation,
             std::to_string(violations) + " output pixels trace to neither base nor donor");
    spdlog::info("wrote {} augmented samples", plans.size());
}

void run_bench(const GlobalOptions& g, const BenchOptions& o) {
    const Protocol protocol = parse_protocol(o.protocol);
    BenchSpecFile spec = load_bench_spec(o.spec);
    if (g.seed_given) spec.seeds = {g.seed};
    prepare_dir(g.out);

    const ProtocolRun run = run_protocol(spec, protocol);
    write_json(g.out / "bench_report.json", to_json(run, o.timing));
    const std::string table = format_table(run, o.timing);
    write_text(g.out / "bench_report.txt", table);
    std::cout << table;
}

}  // namespace anchorda::cli
