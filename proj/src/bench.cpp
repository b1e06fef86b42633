#include "anchorda/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "anchorda/error.hpp"
#include "anchorda/rng.hpp"

namespace anchorda {
namespace {

using nlohmann::json;

Matrix vectors_of(const std::vector<SyntheticSample>& samples) {
    if (samples.empty()) return {};
    Matrix m(samples.size(), samples.front().vector.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        std::copy(samples[i].vector.begin(), samples[i].vector.end(), m.row(i).begin());
    return m;
}

// Exact per-mode counts (largest remainder, ties to the lower mode index) in
// a seeded random order, so a domain's mode proportions match its weights.
std::vector<std::size_t> mode_sequence(CounterRng& rng, const std::vector<double>& weights,
                                       std::size_t n) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t m = 0; m < weights.size(); ++m) {
        const double exact = weights[m] / total * static_cast<double>(n);
        counts[m] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[m];
        if (weights[m] > 0.0) remainders.emplace_back(exact - std::floor(exact), m);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned)
        ++counts[remainders[i % remainders.size()].second];

    std::vector<std::size_t> seq;
    seq.reserve(n);
    for (std::size_t m = 0; m < counts.size(); ++m) seq.insert(seq.end(), counts[m], m);
    for (std::size_t i = seq.size(); i > 1; --i) std::swap(seq[i - 1], seq[rng.below(i)]);
    return seq;
}

std::vector<SyntheticSample> draw_domain(const SyntheticDomainSpec& spec,
                                         const std::vector<double>& weights,
                                         const std::string& prefix, std::uint64_t key) {
    CounterRng rng(key);
    const auto modes = mode_sequence(rng, weights, spec.samples_per_domain);
    std::vector<SyntheticSample> out(spec.samples_per_domain);
    const std::size_t dim = spec.dimension();
    for (std::size_t i = 0; i < out.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "%s%05zu", prefix.c_str(), i);
        auto& s = out[i];
        s.id = id;
        s.mode = modes[i];
        const MixtureMode& mode = spec.modes[s.mode];
        s.exclusive = mode.exclusive;
        const double stddev = std::sqrt(mode.covariance_scale);
        s.vector.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) s.vector[d] = mode.mean[d] + stddev * rng.normal();
    }
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::size_t SyntheticDomainSpec::dimension() const {
    return modes.empty() ? 0 : modes.front().mean.size();
}

void SyntheticDomainSpec::validate(bool require_exclusive) const {
    require(!modes.empty(), "synthetic spec needs at least one mode");
    const std::size_t dim = dimension();
    require(dim >= 2, "synthetic dimension must be >= 2");
    double total = 0.0;
    std::size_t shared = 0, exclusive = 0;
    for (const auto& m : modes) {
        require(m.mean.size() == dim, "all mode means must share one dimension");
        require(m.covariance_scale > 0.0, "covariance_scale must be positive");
        require(m.weight >= 0.0, "mode weights must be non-negative");
        total += m.weight;
        (m.exclusive ? exclusive : shared) += 1;
    }
    require(std::abs(total - 1.0) <= 1e-9, "mode weights must sum to 1");
    require(samples_per_domain >= 1, "samples_per_domain must be >= 1");
    require(shared >= 1 || source_includes_exclusive, "the source domain needs a shared mode");
    if (require_exclusive)
        require(shared >= 1 && exclusive >= 1,
                "selection benchmarks need at least one shared and one exclusive mode");
}

SyntheticDomains generate_domains(const SyntheticDomainSpec& spec) {
    spec.validate();
    std::vector<double> target_weights, source_weights;
    for (const auto& m : spec.modes) {
        target_weights.push_back(m.weight);
        source_weights.push_back(m.exclusive && !spec.source_includes_exclusive ? 0.0 : m.weight);
    }
    require(std::accumulate(source_weights.begin(), source_weights.end(), 0.0) > 0.0,
            "shared modes carry no weight");
    SyntheticDomains out;
    out.source = draw_domain(spec, source_weights, "s", derive_seed(spec.seed, "source-domain"));
    out.target = draw_domain(spec, target_weights, "t", derive_seed(spec.seed, "target-domain"));
    return out;
}

PreparedDomains prepare_domains(const SyntheticDomains& domains, const BenchConfig& cfg) {
    const Matrix source = vectors_of(domains.source);
    const Matrix target = vectors_of(domains.target);
    require(!source.empty() && !target.empty(), "both domains need samples");

    KMeansConfig kc;
    kc.k = cfg.k;
    kc.max_iters = cfg.max_iters;
    kc.tol = cfg.tol;
    kc.seed = derive_seed(cfg.seed, "source-anchors");
    const Clustering source_fit = kmeans_best_of(source, kc, cfg.restarts);
    kc.seed = derive_seed(cfg.seed, "target-anchors");
    const Clustering target_fit = kmeans_best_of(target, kc, cfg.restarts);

    PreparedDomains out;
    out.source_bank = init_from_clustering(source_fit, DomainTag::source);
    out.target_bank = init_from_clustering(target_fit, DomainTag::target_warmup);
    out.target_sse = target_fit.sse;

    out.source_centroid.assign(source.cols(), 0.0);
    for (std::size_t i = 0; i < source.rows(); ++i)
        for (std::size_t d = 0; d < source.cols(); ++d) out.source_centroid[d] += source(i, d);
    for (double& x : out.source_centroid) x /= static_cast<double>(source.rows());

    // Stand-ins for the network outputs the uncertainty baselines consume:
    // a softmax over negative source-anchor distances plays the prediction,
    // and exp(-nearest distance / tau) plays the discriminator's "source" score.
    const double tau = 2.0 * std::max(source_fit.sse / static_cast<double>(source.rows()), 1e-12);
    const std::size_t k_src = out.source_bank.size();
    out.target_records.resize(domains.target.size());
    out.target_exclusive.resize(domains.target.size());
    for (std::size_t i = 0; i < domains.target.size(); ++i) {
        const auto& s = domains.target[i];
        auto& rec = out.target_records[i];
        rec.id = s.id;
        rec.vector = s.vector;
        out.target_exclusive[i] = s.exclusive;

        std::vector<double> d(k_src);
        for (std::size_t k = 0; k < k_src; ++k)
            d[k] = squared_distance(s.vector, out.source_bank.anchors.row(k));
        const double dmin = *std::min_element(d.begin(), d.end());
        rec.discriminator_score = std::max(std::exp(-dmin / tau), 1e-300);
        if (k_src >= 2) {
            ProbabilityMap p(k_src, 1, 1);
            double z = 0.0;
            for (std::size_t k = 0; k < k_src; ++k) z += p.values[k] = std::exp(-(d[k] - dmin) / tau);
            for (double& v : p.values) v /= z;
            rec.probabilities = std::move(p);
        }
    }
    return out;
}

double exclusive_mode_recall(const std::vector<std::string>& selected_ids,
                             const std::vector<SyntheticSample>& target) {
    if (selected_ids.empty()) return 0.0;
    std::set<std::string> exclusive;
    for (const auto& s : target)
        if (s.exclusive) exclusive.insert(s.id);
    std::size_t hits = 0;
    for (const auto& id : selected_ids) hits += exclusive.contains(id) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(selected_ids.size());
}

double exclusive_coverage(const std::vector<std::string>& selected_ids,
                          const std::vector<SyntheticSample>& target) {
    const std::set<std::string> selected(selected_ids.begin(), selected_ids.end());
    std::size_t total = 0, hits = 0;
    for (const auto& s : target) {
        if (!s.exclusive) continue;
        ++total;
        hits += selected.contains(s.id) ? 1 : 0;
    }
    // Nothing to cover counts as fully covered.
    return total == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(total);
}

BenchmarkReport run_strategy_comparison(const SyntheticDomains& domains,
                                        const std::vector<Metric>& strategies,
                                        double budget_fraction, const BenchConfig& cfg) {
    BenchmarkReport report;
    report.protocol = "compare";
    if (strategies.empty()) return report;
    const PreparedDomains prep = prepare_domains(domains, cfg);
    const SelectionContext ctx{&prep.source_bank, &prep.target_bank, &prep.source_centroid};

    for (Metric metric : strategies) {
        SelectionConfig sc;
        sc.budget_fraction = budget_fraction;
        sc.metric = metric;
        sc.seed = derive_seed(cfg.seed, "random-strategy");
        const auto start = std::chrono::steady_clock::now();
        const SelectionReport sel = select(prep.target_records, sc, ctx);
        StrategyResult r;
        r.runtime_ms = elapsed_ms(start);
        r.metric = metric;
        r.selected_ids = sel.selected_ids;
        r.exclusive_mode_recall = exclusive_mode_recall(sel.selected_ids, domains.target);
        r.coverage = exclusive_coverage(sel.selected_ids, domains.target);
        double sum = 0.0;
        for (const auto& id : sel.selected_ids) {
            const auto it = std::find_if(prep.target_records.begin(), prep.target_records.end(),
                                         [&](const SampleRecord& s) { return s.id == id; });
            sum += nearest(prep.target_bank, *it->vector).squared_distance;
        }
        r.mean_min_anchor_distance = sum / static_cast<double>(sel.selected_ids.size());
        report.strategies.push_back(std::move(r));
    }
    return report;
}

BenchmarkReport run_budget_sweep(const SyntheticDomains& domains,
                                 const std::vector<double>& fractions, const BenchConfig& cfg) {
    BenchmarkReport report;
    report.protocol = "budget_sweep";
    const PreparedDomains prep = prepare_domains(domains, cfg);
    const SelectionContext ctx{&prep.source_bank, &prep.target_bank, &prep.source_centroid};
    SelectionConfig sc;
    sc.metric = cfg.sweep_metric;
    sc.seed = derive_seed(cfg.seed, "random-strategy");
    const auto sweep = budget_sweep(prep.target_records, fractions, sc, ctx);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        BudgetRow row;
        row.fraction = sweep[i].budget_fraction;
        row.budget_count = sweep[i].budget_count;
        row.exclusive_mode_recall = exclusive_mode_recall(sweep[i].selected_ids, domains.target);
        row.coverage = exclusive_coverage(sweep[i].selected_ids, domains.target);
        if (i + 1 < sweep.size()) {
            const std::set<std::string> next(sweep[i + 1].selected_ids.begin(),
                                             sweep[i + 1].selected_ids.end());
            row.nested_in_next = std::all_of(sweep[i].selected_ids.begin(), sweep[i].selected_ids.end(),
                                             [&](const std::string& id) { return next.contains(id); });
        }
        report.budget_rows.push_back(row);
    }
    return report;
}

BenchmarkReport run_anchor_sweep(const SyntheticDomains& domains,
                                 const std::vector<std::size_t>& k_list, const BenchConfig& cfg) {
    BenchmarkReport report;
    report.protocol = "anchor_sweep";
    for (std::size_t k : k_list) {
        BenchConfig c = cfg;
        c.k = k;
        const PreparedDomains prep = prepare_domains(domains, c);

        SelectionConfig sc;
        sc.metric = Metric::dual_domain;
        sc.budget_fraction = cfg.budget_fraction;
        const SelectionContext ctx{&prep.source_bank, &prep.target_bank, &prep.source_centroid};
        const auto sel = select(prep.target_records, sc, ctx);
        report.anchor_rows.push_back({k, prep.target_sse, exclusive_mode_recall(sel.selected_ids, domains.target)});
    }
    return report;
}

BenchSpecFile bench_spec_from_json(const json& j) {
    BenchSpecFile spec;
    try {
        spec.version = j.at("version").get<int>();
        if (spec.version != 1)
            fail(ErrorKind::VersionMismatch, "bench spec version " + std::to_string(spec.version));
        const json& d = j.at("domain");
        for (const auto& m : d.at("modes")) {
            MixtureMode mode;
            mode.mean = m.at("mean").get<std::vector<double>>();
            mode.covariance_scale = m.at("covariance_scale").get<double>();
            mode.weight = m.at("weight").get<double>();
            mode.exclusive = m.value("exclusive", false);
            spec.domain.modes.push_back(std::move(mode));
        }
        spec.domain.samples_per_domain = d.at("samples_per_domain").get<std::size_t>();
        spec.domain.source_includes_exclusive = d.value("source_includes_exclusive", false);
        if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (const auto it = j.find("config"); it != j.end()) {
            const json& c = *it;
            auto& cfg = spec.config;
            cfg.k = c.value("k", cfg.k);
            cfg.restarts = c.value("restarts", cfg.restarts);
            cfg.max_iters = c.value("max_iters", cfg.max_iters);
            cfg.tol = c.value("tol", cfg.tol);
            cfg.budget_fraction = c.value("budget_fraction", cfg.budget_fraction);
            cfg.fractions = c.value("fractions", cfg.fractions);
            cfg.k_list = c.value("k_list", cfg.k_list);
            if (c.contains("strategies")) {
                cfg.strategies.clear();
                for (const auto& s : c.at("strategies")) cfg.strategies.push_back(parse_metric(s.get<std::string>()));
            }
            if (c.contains("sweep_metric"))
                cfg.sweep_metric = parse_metric(c.at("sweep_metric").get<std::string>());
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::MissingField, std::string("bench spec: ") + e.what());
    }
    require(!spec.seeds.empty(), "bench spec needs at least one seed");
    spec.domain.validate();
    return spec;
}

json to_json(const BenchSpecFile& spec) {
    json modes = json::array();
    for (const auto& m : spec.domain.modes)
        modes.push_back({{"mean", m.mean},
                         {"covariance_scale", m.covariance_scale},
                         {"weight", m.weight},
                         {"exclusive", m.exclusive}});
    json strategies = json::array();
    for (Metric m : spec.config.strategies) strategies.push_back(to_string(m));
    const auto& c = spec.config;
    return {{"version", spec.version},
            {"domain",
             {{"modes", modes},
              {"samples_per_domain", spec.domain.samples_per_domain},
              {"source_includes_exclusive", spec.domain.source_includes_exclusive}}},
            {"config",
             {{"k", c.k},
              {"restarts", c.restarts},
              {"max_iters", c.max_iters},
              {"tol", c.tol},
              {"budget_fraction", c.budget_fraction},
              {"fractions", c.fractions},
              {"k_list", c.k_list},
              {"strategies", strategies},
              {"sweep_metric", to_string(c.sweep_metric)}}},
            {"seeds", spec.seeds}};
}

BenchSpecFile load_bench_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::UnresolvablePath, "cannot open bench spec " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::InvalidArgument, "bench spec " + path.string() + " is not JSON: " + e.what());
    }
    return bench_spec_from_json(j);
}

std::string fingerprint(const BenchSpecFile& spec) { return hex64(fnv1a64(to_json(spec).dump())); }

Protocol parse_protocol(const std::string& name) {
    if (name == "compare") return Protocol::compare;
    if (name == "budget_sweep") return Protocol::budget_sweep;
    if (name == "anchor_sweep") return Protocol::anchor_sweep;
    fail(ErrorKind::InvalidArgument, "unknown protocol '" + name + "'");
}

std::string to_string(Protocol protocol) {
    switch (protocol) {
        case Protocol::compare: return "compare";
        case Protocol::budget_sweep: return "budget_sweep";
        case Protocol::anchor_sweep: return "anchor_sweep";
    }
    return "unknown";
}

ProtocolRun run_protocol(const BenchSpecFile& spec, Protocol protocol) {
    spec.domain.validate(protocol != Protocol::anchor_sweep);
    ProtocolRun run;
    run.protocol = protocol;
    run.config_fingerprint = fingerprint(spec);
    for (std::uint64_t seed : spec.seeds) {
        SyntheticDomainSpec d = spec.domain;
        d.seed = seed;
        BenchConfig cfg = spec.config;
        cfg.seed = seed;
        const SyntheticDomains domains = generate_domains(d);
        BenchmarkReport report;
        switch (protocol) {
            case Protocol::compare:
                report = run_strategy_comparison(domains, cfg.strategies, cfg.budget_fraction, cfg);
                break;
            case Protocol::budget_sweep: report = run_budget_sweep(domains, cfg.fractions, cfg); break;
            case Protocol::anchor_sweep: report = run_anchor_sweep(domains, cfg.k_list, cfg); break;
        }
        report.config_fingerprint = run.config_fingerprint;
        run.runs.push_back({seed, std::move(report)});
    }
    return run;
}

json to_json(const BenchmarkReport& report, bool include_timing) {
    json j;
    j["protocol"] = report.protocol;
    j["config_fingerprint"] = report.config_fingerprint;
    if (!report.strategies.empty()) {
        json rows = json::array();
        for (const auto& s : report.strategies) {
            json r = {{"metric", to_string(s.metric)},
                      {"exclusive_mode_recall", s.exclusive_mode_recall},
                      {"coverage", s.coverage},
                      {"mean_min_anchor_distance", s.mean_min_anchor_distance},
                      {"selected_ids", s.selected_ids}};
            if (include_timing) r["runtime_ms"] = s.runtime_ms;
            rows.push_back(std::move(r));
        }
        j["strategies"] = std::move(rows);
    }
    if (!report.budget_rows.empty()) {
        json rows = json::array();
        for (const auto& b : report.budget_rows)
            rows.push_back({{"fraction", b.fraction},
                            {"budget_count", b.budget_count},
                            {"exclusive_mode_recall", b.exclusive_mode_recall},
                            {"coverage", b.coverage},
                            {"nested_in_next", b.nested_in_next}});
        j["budget_sweep"] = std::move(rows);
    }
    if (!report.anchor_rows.empty()) {
        json rows = json::array();
        for (const auto& a : report.anchor_rows)
            rows.push_back({{"k", a.k}, {"sse", a.sse}, {"exclusive_mode_recall", a.exclusive_mode_recall}});
        j["anchor_sweep"] = std::move(rows);
    }
    return j;
}

json to_json(const ProtocolRun& run, bool include_timing) {
    json runs = json::array();
    for (const auto& r : run.runs) {
        json entry = to_json(r.report, include_timing);
        entry["seed"] = r.seed;
        runs.push_back(std::move(entry));
    }
    return {{"note", kProxyNote},
            {"protocol", to_string(run.protocol)},
            {"config_fingerprint", run.config_fingerprint},
            {"runs", std::move(runs)}};
}

std::string format_table(const ProtocolRun& run, bool include_timing) {
    std::ostringstream os;
    os << "# " << kProxyNote << "\n";
    os << "# protocol " << to_string(run.protocol) << ", config " << run.config_fingerprint << "\n";
    char line[160];
    for (const auto& r : run.runs) {
        os << "seed " << r.seed << "\n";
        for (const auto& s : r.report.strategies) {
            std::snprintf(line, sizeof(line), "  %-18s recall %.4f  coverage %.4f  min-anchor %.4f",
                          to_string(s.metric).c_str(), s.exclusive_mode_recall, s.coverage,
                          s.mean_min_anchor_distance);
            os << line;
            if (include_timing) {
                std::snprintf(line, sizeof(line), "  %.2f ms", s.runtime_ms);
                os << line;
            }
            os << "\n";
        }
        for (const auto& b : r.report.budget_rows) {
            std::snprintf(line, sizeof(line), "  fraction %.3f  n=%-5zu recall %.4f  coverage %.4f%s\n",
                          b.fraction, b.budget_count, b.exclusive_mode_recall, b.coverage,
                          b.nested_in_next ? "" : "  NOT NESTED");
            os << line;
        }
        for (const auto& a : r.report.anchor_rows) {
            std::snprintf(line, sizeof(line), "  K=%-4zu sse %.6g  recall %.4f\n", a.k, a.sse,
                          a.exclusive_mode_recall);
            os << line;
        }
    }
    return os.str();
}

}  // namespace anchorda
