// Runs every acceptance criterion, prints one PASS/FAIL line per criterion
// and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anchorda/anchor_bank.hpp"
#include "anchorda/augment.hpp"
#include "anchorda/bench.hpp"
#include "anchorda/error.hpp"
#include "anchorda/kmeans.hpp"
#include "anchorda/losses.hpp"
#include "anchorda/rng.hpp"
#include "anchorda/selection.hpp"
#include "anchorda/tensor_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace anchorda;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failed checks; the first few messages end up in the summary line.
class Checker {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) messages_.push_back(what);
    }
    Outcome outcome(const std::string& summary) const {
        std::ostringstream os;
        os << summary << " (" << checks_ - failures_ << "/" << checks_ << " checks)";
        for (const auto& m : messages_) os << "; " << m;
        return {failures_ == 0, os.str()};
    }

private:
    std::size_t checks_ = 0;
    std::size_t failures_ = 0;
    std::vector<std::string> messages_;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

double rel_err(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

testing::Points to_points(const Matrix& m) {
    testing::Points p(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) p[r].assign(m.row(r).begin(), m.row(r).end());
    return p;
}

AnchorBank bank_of(const testing::Points& rows, DomainTag tag = DomainTag::target, double alpha = kDefaultEmaAlpha) {
    Clustering c;
    c.anchors = Matrix::from_rows(rows);
    return init_from_clustering(c, tag, alpha);
}

testing::Points random_points(std::size_t n, std::size_t d, double scale, CounterRng& rng) {
    testing::Points p(n, std::vector<double>(d));
    for (auto& row : p)
        for (double& x : row) x = scale * rng.normal();
    return p;
}

std::string hex_bytes(const std::vector<std::byte>& bytes) { return std::to_string(fnv1a64(bytes)); }

// 1. Lloyd oracle equivalence on three separated 2-D blobs.
Outcome kmeans_oracle() {
    Checker ck;
    CounterRng rng(derive_seed(1, "acceptance-kmeans"));
    const std::vector<std::vector<double>> centres{{0, 0}, {12, 0}, {0, 12}};
    Matrix points(200, 2);
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t d = 0; d < 2; ++d) points(i, d) = centres[i % 3][d] + rng.normal();

    double worst = 0.0, runtime = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const KMeansConfig cfg{.k = 3, .seed = seed};
        const auto t0 = Clock::now();
        const Clustering c = kmeans_fit(points, cfg);
        runtime = std::max(runtime, seconds_since(t0));
        const auto ref = testing::lloyd(to_points(points), to_points(kmeanspp_seeds(points, 3, seed)),
                                        cfg.max_iters, cfg.tol);
        const double err = rel_err(c.sse, ref.sse, 1e-300);
        worst = std::max(worst, err);
        ck.expect(err <= 1e-6, "seed " + std::to_string(seed) + " sse rel err " + fmt(err));
        for (std::size_t i = 1; i < c.sse_history.size(); ++i)
            ck.expect(c.sse_history[i] <= c.sse_history[i - 1], "sse rose at iteration " + std::to_string(i));
    }
    ck.expect(runtime < 1.0, "fit took " + fmt(runtime) + " s");
    return ck.outcome("max sse rel err " + fmt(worst) + ", slowest fit " + fmt(runtime * 1e3) + " ms");
}

// 2. Dual-domain distance against the exhaustive min, plus invariances.
Outcome dual_distance_oracle() {
    Checker ck;
    CounterRng rng(derive_seed(2, "acceptance-dual"));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t d = 1 + rng.below(16), vs = 1 + rng.below(12), vt = 1 + rng.below(12);
        const auto src = random_points(vs, d, 3.0, rng), tgt = random_points(vt, d, 3.0, rng);
        const auto f = random_points(1, d, 3.0, rng)[0];
        const AnchorBank sb = bank_of(src, DomainTag::source), tb = bank_of(tgt, DomainTag::target_warmup);
        const double got = dual_domain_distance(f, sb, tb);
        const double want = testing::brute_dual_distance(f, src, tgt);
        const double err = rel_err(got, want, 1e-300);
        worst = std::max(worst, err);
        ck.expect(err <= 1e-9, "instance " + std::to_string(t) + " rel err " + fmt(err));

        auto src_perm = src, tgt_perm = tgt;
        std::reverse(src_perm.begin(), src_perm.end());
        std::rotate(tgt_perm.begin(), tgt_perm.begin() + static_cast<std::ptrdiff_t>(rng.below(vt)), tgt_perm.end());
        ck.expect(dual_domain_distance(f, bank_of(src_perm, DomainTag::source),
                                       bank_of(tgt_perm, DomainTag::target_warmup)) == got,
                  "permutation changed instance " + std::to_string(t));
    }

    // Rank order of a batch under joint positive scaling.
    for (double scale : {0.5, 3.7, 1e3}) {
        const std::size_t d = 8;
        const auto src = random_points(6, d, 2.0, rng), tgt = random_points(5, d, 2.0, rng);
        const auto feats = random_points(60, d, 2.0, rng);
        auto scaled = [scale](testing::Points p) {
            for (auto& r : p)
                for (double& x : r) x *= scale;
            return p;
        };
        auto ranking = [](const testing::Points& s, const testing::Points& t, const testing::Points& f) {
            const AnchorBank sb = bank_of(s, DomainTag::source), tb = bank_of(t, DomainTag::target_warmup);
            std::vector<double> score(f.size());
            for (std::size_t i = 0; i < f.size(); ++i) score[i] = dual_domain_distance(f[i], sb, tb);
            std::vector<std::size_t> order(f.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
            return order;
        };
        ck.expect(ranking(src, tgt, feats) == ranking(scaled(src), scaled(tgt), scaled(feats)),
                  "ranking changed under scale " + fmt(scale));
    }
    return ck.outcome("100 instances, max rel err " + fmt(worst));
}

// 3. EMA bank update.
Outcome ema_bank() {
    Checker ck;
    CounterRng rng(derive_seed(3, "acceptance-ema"));

    const auto rows = random_points(5, 4, 2.0, rng);
    AnchorBank fixed = bank_of(rows, DomainTag::target, 1.0);
    const Matrix before = fixed.anchors;
    for (int t = 0; t < 50; ++t) ema_update(fixed, random_points(1, 4, 2.0, rng)[0]);
    ck.expect(fixed.anchors == before, "alpha = 1 moved an anchor");

    const double alpha = 0.9;
    AnchorBank bank = bank_of({{0, 0, 0}, {50, 50, 50}}, DomainTag::target, alpha);
    const std::vector<double> f{1.5, -2.0, 0.25};
    double worst = 0.0;
    for (int n = 1; n <= 50; ++n) {
        ck.expect(ema_update(bank, f) == 0, "constant input left the nearest anchor");
        for (std::size_t d = 0; d < 3; ++d) {
            const double want = f[d] + std::pow(alpha, n) * (0.0 - f[d]);
            const double err = std::abs(bank.anchors(0, d) - want) / std::abs(want - f[d]);
            worst = std::max(worst, err);
            ck.expect(err <= 1e-9, "n=" + std::to_string(n) + " gap rel err " + fmt(err));
        }
    }

    AnchorBank moving = bank_of(random_points(6, 3, 2.0, rng), DomainTag::target, 0.95);
    for (int t = 0; t < 200; ++t) {
        const Matrix prev = moving.anchors;
        const auto counts = moving.update_counts;
        const std::size_t idx = ema_update(moving, random_points(1, 3, 2.0, rng)[0]);
        std::size_t changed = 0;
        for (std::size_t v = 0; v < moving.size(); ++v) {
            bool differs = false;
            for (std::size_t d = 0; d < 3; ++d) differs |= moving.anchors(v, d) != prev(v, d);
            changed += differs;
        }
        ck.expect(changed == 1 && moving.update_counts[idx] == counts[idx] + 1,
                  "update " + std::to_string(t) + " mutated " + std::to_string(changed) + " anchors");
    }
    return ck.outcome("alpha=1 fixed, alpha^n gap max rel err " + fmt(worst) + ", 200 single-anchor updates");
}

// 4. Analytic gradients against central differences.
Outcome gradient_checks() {
    Checker ck;
    const auto t0 = Clock::now();
    CounterRng rng(derive_seed(4, "acceptance-grad"));
    const double h = 1e-5;
    double worst_ce = 0.0, worst_sa = 0.0;
    std::size_t ce_points = 0, sa_points = 0;

    while (ce_points < 20) {
        const std::size_t c = 2 + rng.below(4), hgt = 1 + rng.below(3), wid = 1 + rng.below(4);
        LabelMap labels(hgt, wid);
        for (auto& v : labels.values) v = static_cast<std::uint16_t>(rng.below(c));
        labels.values[0] = static_cast<std::uint16_t>(rng.below(c));
        PixelLossInput in{testing::probabilities_towards(labels, c, 1.0, rng.next_u64()), labels};
        if (rng.uniform() < 0.5) in.labels.values.back() = kIgnoreLabel;
        if (in.labels.values.size() == 1 && in.labels.values[0] == kIgnoreLabel) continue;
        const LossValue lv = cross_entropy(in);
        const auto fd = testing::central_difference(
            [&](const std::vector<double>& p) {
                PixelLossInput moved = in;
                moved.probabilities.values = p;
                return cross_entropy(moved).value;
            },
            in.probabilities.values, h);
        for (std::size_t i = 0; i < fd.size(); ++i) {
            if (in.probabilities.values[i] < kProbabilityFloor + 2 * h) continue;  // clamp-adjacent
            const double err = rel_err((*lv.gradient)[i], fd[i]);
            worst_ce = std::max(worst_ce, err);
            ck.expect(err < 1e-4, "cross_entropy coordinate rel err " + fmt(err));
        }
        ++ce_points;
    }

    while (sa_points < 20) {
        const std::size_t d = 1 + rng.below(8);
        const auto anchors = random_points(1 + rng.below(8), d, 2.0, rng);
        const auto f = random_points(1, d, 2.0, rng)[0];
        const AnchorBank bank = bank_of(anchors);
        bool near_anchor = false;
        for (const auto& a : anchors) near_anchor |= testing::sq_dist(f, a) < 1e-3;
        if (near_anchor) continue;  // epsilon-adjacent
        const LossValue lv = soft_alignment_loss(f, bank);
        const auto fd = testing::central_difference(
            [&](const std::vector<double>& x) { return soft_alignment_loss(x, bank).value; }, f, h);
        for (std::size_t i = 0; i < d; ++i) {
            const double err = rel_err((*lv.gradient)[i], fd[i]);
            worst_sa = std::max(worst_sa, err);
            ck.expect(err < 1e-4, "soft_alignment coordinate rel err " + fmt(err));
        }
        ++sa_points;
    }
    const double secs = seconds_since(t0);
    ck.expect(secs < 5.0, "took " + fmt(secs) + " s");
    return ck.outcome("20+20 points, max rel err ce " + fmt(worst_ce) + " / soft alignment " + fmt(worst_sa) +
                      ", " + fmt(secs * 1e3) + " ms");
}

// 5. OHEM hand case and dominance over plain cross entropy.
Outcome ohem() {
    Checker ck;
    const std::vector<double> probs{0.9, 0.6, 0.95, 0.5};
    PixelLossInput hand{ProbabilityMap(2, 1, 4), LabelMap(1, 4, 0)};
    for (std::size_t i = 0; i < 4; ++i) {
        hand.probabilities.at(0, i) = probs[i];
        hand.probabilities.at(1, i) = 1.0 - probs[i];
    }
    const LossValue lv = ohem_cross_entropy(hand, {.prob_threshold = 0.7});
    ck.expect(*lv.pixel_mask == std::vector<bool>{false, true, false, true}, "mask is not {1, 3}");
    const double want = (-std::log(0.6) - std::log(0.5)) / 2.0;
    ck.expect(std::abs(lv.value - want) <= 1e-12 * want, "value " + fmt(lv.value, 17));

    CounterRng rng(derive_seed(5, "acceptance-ohem"));
    std::size_t cases = 0;
    while (cases < 100) {
        const std::size_t c = 2 + rng.below(5), n = 1 + rng.below(40);
        LabelMap labels(1, n);
        for (auto& v : labels.values) v = static_cast<std::uint16_t>(rng.below(c));
        PixelLossInput in{testing::probabilities_towards(labels, c, 0.5 + 3 * rng.uniform(), rng.next_u64()), labels};
        for (auto& v : in.labels.values)
            if (rng.uniform() < 0.1) v = kIgnoreLabel;
        if (std::all_of(in.labels.values.begin(), in.labels.values.end(), [](auto v) { return v == kIgnoreLabel; }))
            continue;
        const OhemConfig cfg{.prob_threshold = 0.3 + 0.69 * rng.uniform(), .min_kept_fraction = 0.01 + rng.uniform()};
        if (cfg.min_kept_fraction > 1.0) continue;
        const double o = ohem_cross_entropy(in, cfg).value, ce = cross_entropy(in).value;
        ck.expect(o >= ce - 1e-12 * std::max(1.0, ce), "ohem " + fmt(o) + " < ce " + fmt(ce));
        ++cases;
    }
    return ck.outcome("mask {1,3}, value " + fmt(lv.value, 10) + ", 100 random dominance cases");
}

ImageLabelPair random_pair(std::size_t c, std::size_t h, std::size_t w, std::size_t classes, CounterRng& rng) {
    ImageLabelPair p{FeatureMap(c, h, w), LabelMap(h, w)};
    for (auto& v : p.image.values) v = static_cast<float>(rng.normal());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            p.label.at(y, x) = rng.uniform() < 0.05 ? kIgnoreLabel
                                                    : static_cast<std::uint16_t>((x / 3 + y / 2 + rng.below(2)) % classes);
    return p;
}

// Every output pixel must match exactly one of base (same position) or donor
// (shifted by the plan offset), unless base and donor agree at that pixel.
std::size_t dual_loop_untraceable(const ImageLabelPair& base, const ImageLabelPair& donor,
                                  const ImageLabelPair& out, std::ptrdiff_t dx, std::ptrdiff_t dy) {
    const std::size_t c = base.image.channels, h = base.label.height, w = base.label.width;
    std::size_t bad = 0;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            bool is_base = out.label.at(y, x) == base.label.at(y, x);
            for (std::size_t k = 0; k < c; ++k) is_base = is_base && out.image.at(k, y, x) == base.image.at(k, y, x);
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) - dy, sx = static_cast<std::ptrdiff_t>(x) - dx;
            bool is_donor = sy >= 0 && sx >= 0 && sy < static_cast<std::ptrdiff_t>(h) && sx < static_cast<std::ptrdiff_t>(w);
            bool same_source = false;
            if (is_donor) {
                const auto uy = static_cast<std::size_t>(sy), ux = static_cast<std::size_t>(sx);
                is_donor = out.label.at(y, x) == donor.label.at(uy, ux);
                same_source = base.label.at(y, x) == donor.label.at(uy, ux);
                for (std::size_t k = 0; k < c; ++k) {
                    is_donor = is_donor && out.image.at(k, y, x) == donor.image.at(k, uy, ux);
                    same_source = same_source && base.image.at(k, y, x) == donor.image.at(k, uy, ux);
                }
            }
            const bool exactly_one = is_base != is_donor || (is_base && same_source);
            bad += !exactly_one;
        }
    return bad;
}

std::string pair_digest(const ImageLabelPair& p) {
    return hex_bytes(encode_tensor(to_tensor(p.image))) + ":" + hex_bytes(encode_tensor(to_tensor(p.label)));
}

// 6. Augmentation provenance and replay.
Outcome augmentation_provenance() {
    Checker ck;
    CounterRng rng(derive_seed(6, "acceptance-augment"));
    std::size_t cutmix = 0, copy_paste = 0, attempts = 0;
    while (cutmix + copy_paste < 100 && attempts < 1000) {
        ++attempts;
        const std::size_t c = 1 + rng.below(3), h = 2 + rng.below(14), w = 2 + rng.below(14), classes = 2 + rng.below(5);
        const auto base = random_pair(c, h, w, classes, rng);
        const auto donor = random_pair(c, h, w, classes, rng);
        const std::uint64_t seed = rng.next_u64();
        if ((cutmix + copy_paste) % 2 == 0) {
            DonorDistribution dist;
            dist.candidate_ids = {"donor"};
            dist.weights = {1.0};
            const double lo = 0.05 + 0.5 * rng.uniform();
            const CutmixPlan plan = plan_cutmix("base", dist, h, w, {lo, std::min(1.0, lo + 0.4)}, seed);
            const auto out = apply_cutmix(base, donor, plan);
            ck.expect(dual_loop_untraceable(base, donor, out, 0, 0) == 0, "cutmix pixel not traceable");
            ck.expect(testing::traced_violations(base, donor, out, 0, 0) == 0, "cutmix trace oracle disagrees");
            const CutmixPlan replay = cutmix_plan_from_json(nlohmann::json::parse(to_json(plan).dump()));
            ck.expect(replay == plan && plan == plan_cutmix("base", dist, h, w, {lo, std::min(1.0, lo + 0.4)}, seed),
                      "cutmix plan not reproducible");
            ck.expect(pair_digest(apply_cutmix(base, donor, replay)) == pair_digest(out), "cutmix replay differs");
            ++cutmix;
        } else {
            std::set<std::uint16_t> tail;
            for (std::uint16_t k = 0; k < classes; ++k)
                if (rng.uniform() < 0.3) tail.insert(k);
            CopyPastePlan plan;
            try {
                plan = plan_copy_paste("base", base.label, "donor", donor.label, tail, seed, rng.below(4));
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::NoCopyableClasses) continue;
                throw;
            }
            const auto out = apply_copy_paste(base, donor, plan);
            ck.expect(dual_loop_untraceable(base, donor, out, plan.dx, plan.dy) == 0, "copy-paste pixel not traceable");
            ck.expect(testing::traced_violations(base, donor, out, plan.dx, plan.dy) == 0,
                      "copy-paste trace oracle disagrees");
            const CopyPastePlan replay = copy_paste_plan_from_json(nlohmann::json::parse(to_json(plan).dump()));
            ck.expect(replay == plan, "copy-paste plan did not round-trip");
            ck.expect(pair_digest(apply_copy_paste(base, donor, replay)) == pair_digest(out),
                      "copy-paste replay differs");
            ++copy_paste;
        }
    }
    ck.expect(cutmix + copy_paste == 100, "only " + std::to_string(cutmix + copy_paste) + " applications");
    return ck.outcome(std::to_string(cutmix) + " cutmix + " + std::to_string(copy_paste) + " copy-paste applications");
}

// 7. Donor distribution.
Outcome donor_distribution_check() {
    Checker ck;
    const auto w = donor_distribution({"a", "b"}, {{-1.0}, {0.0}}).weights;
    ck.expect(std::abs(w[0] - 0.7311) <= 1e-4 && std::abs(w[1] - 0.2689) <= 1e-4,
              "two-candidate case gave [" + fmt(w[0]) + ", " + fmt(w[1]) + "]");

    CounterRng rng(derive_seed(7, "acceptance-donor"));
    std::size_t perturbations = 0;
    double worst_sum = 0.0;
    while (perturbations < 100) {
        const std::size_t n = 2 + rng.below(6), classes = 1 + rng.below(6);
        std::vector<ClassConfidence> conf(n, ClassConfidence(classes));
        std::vector<std::string> ids(n);
        for (std::size_t i = 0; i < n; ++i) {
            ids[i] = "s" + std::to_string(i);
            for (auto& c : conf[i])
                if (rng.uniform() < 0.7) c = -4.0 * rng.uniform();
        }
        const auto d = donor_distribution(ids, conf);
        const double sum = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        ck.expect(std::abs(sum - 1.0) <= 1e-9, "weights sum to " + fmt(sum, 17));

        const std::size_t j = rng.below(n), c = rng.below(classes);
        std::size_t holders = 0;
        for (const auto& row : conf) holders += row[c].has_value();
        if (!conf[j][c] || holders < 2) continue;
        auto lowered = conf;
        *lowered[j][c] -= 0.05 + rng.uniform();
        const auto d2 = donor_distribution(ids, lowered);
        ck.expect(d2.per_class_softmax(c, j) > d.per_class_softmax(c, j), "class share did not grow");
        ck.expect(d2.weights[j] > d.weights[j], "donor weight did not grow");
        ++perturbations;
    }
    return ck.outcome("[" + fmt(w[0]) + ", " + fmt(w[1]) + "], max |sum-1| " + fmt(worst_sum) +
                      ", 100 monotone perturbations");
}

BenchSpecFile canonical() { return load_bench_spec(ANCHORDA_CANONICAL_SPEC); }

// 8. Strategy comparison on the canonical spec.
Outcome selection_benchmark() {
    Checker ck;
    const BenchSpecFile spec = canonical();
    ck.expect(spec.domain.samples_per_domain == 500 && spec.config.budget_fraction == 0.05 && spec.seeds.size() == 10,
              "canonical spec is not 500 samples / 5% / 10 seeds");
    const auto t0 = Clock::now();
    const ProtocolRun run = run_protocol(spec, Protocol::compare);
    const double secs = seconds_since(t0);

    double min_dual = 1.0, max_proto = 0.0, min_random = 1.0, max_random = 0.0;
    for (const auto& r : run.runs) {
        auto find = [&](Metric m) -> const StrategyResult& {
            for (const auto& s : r.report.strategies)
                if (s.metric == m) return s;
            fail(ErrorKind::InvalidArgument, "strategy missing from report");
        };
        const StrategyResult& dual = find(Metric::dual_domain);
        const StrategyResult& proto = find(Metric::prototype);
        const StrategyResult& random = find(Metric::random);

        // Exhaustive oracle: regenerate the seed's domains and banks, score all
        // target samples by brute force and take the top of the budget.
        SyntheticDomainSpec d = spec.domain;
        d.seed = r.seed;
        BenchConfig cfg = spec.config;
        cfg.seed = r.seed;
        const SyntheticDomains domains = generate_domains(d);
        const PreparedDomains prepared = prepare_domains(domains, cfg);
        const auto src = to_points(prepared.source_bank.anchors), tgt = to_points(prepared.target_bank.anchors);
        const std::size_t n = domains.target.size();
        std::vector<double> score(n);
        std::size_t exclusive = 0;
        for (std::size_t i = 0; i < n; ++i) {
            score[i] = testing::brute_dual_distance(domains.target[i].vector, src, tgt);
            exclusive += domains.target[i].exclusive;
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
        const std::size_t budget = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.05 * n + 1e-9)));
        std::set<std::string> oracle_ids;
        std::size_t oracle_hits = 0;
        for (std::size_t i = 0; i < budget; ++i) {
            oracle_ids.insert(domains.target[order[i]].id);
            oracle_hits += domains.target[order[i]].exclusive;
        }
        const double oracle_recall = static_cast<double>(oracle_hits) / static_cast<double>(budget);
        const double random_expected = static_cast<double>(exclusive) / static_cast<double>(n);

        const std::string tag = "seed " + std::to_string(r.seed) + ": ";
        ck.expect(std::set<std::string>(dual.selected_ids.begin(), dual.selected_ids.end()) == oracle_ids,
                  tag + "dual selection differs from the exhaustive oracle");
        ck.expect(std::abs(dual.exclusive_mode_recall - oracle_recall) <= 1e-12, tag + "dual recall differs from oracle");
        ck.expect(dual.exclusive_mode_recall >= 2.0 * random_expected,
                  tag + "dual " + fmt(dual.exclusive_mode_recall) + " < 2 x random " + fmt(random_expected));
        ck.expect(dual.exclusive_mode_recall >= proto.exclusive_mode_recall,
                  tag + "dual " + fmt(dual.exclusive_mode_recall) + " < prototype " + fmt(proto.exclusive_mode_recall));
        min_dual = std::min(min_dual, dual.exclusive_mode_recall);
        max_proto = std::max(max_proto, proto.exclusive_mode_recall);
        min_random = std::min(min_random, random.exclusive_mode_recall);
        max_random = std::max(max_random, random.exclusive_mode_recall);
    }
    ck.expect(secs < 10.0, "protocol took " + fmt(secs) + " s");
    return ck.outcome("min dual recall " + fmt(min_dual) + ", random expected 0.5 (realized " + fmt(min_random) +
                      ".." + fmt(max_random) + "), max prototype " + fmt(max_proto) + ", " + fmt(secs) + " s");
}

// 9. Budget sweep nesting and monotone coverage.
Outcome budget_sweep_check() {
    Checker ck;
    const BenchSpecFile spec = canonical();
    const ProtocolRun run = run_protocol(spec, Protocol::budget_sweep);
    for (const auto& r : run.runs) {
        const auto& rows = r.report.budget_rows;
        ck.expect(rows.size() == spec.config.fractions.size(), "row count");
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            ck.expect(rows[i].nested_in_next, "protocol reports a non-nested row");
            ck.expect(rows[i].coverage <= rows[i + 1].coverage, "coverage fell");
        }

        // Independent recheck on the selections themselves.
        SyntheticDomainSpec d = spec.domain;
        d.seed = r.seed;
        BenchConfig cfg = spec.config;
        cfg.seed = r.seed;
        const SyntheticDomains domains = generate_domains(d);
        const PreparedDomains prepared = prepare_domains(domains, cfg);
        const SelectionContext ctx{&prepared.source_bank, &prepared.target_bank, &prepared.source_centroid};
        const auto sweep = budget_sweep(prepared.target_records, spec.config.fractions,
                                        {.metric = Metric::dual_domain, .seed = r.seed}, ctx);
        std::size_t total_exclusive = 0;
        for (const auto& s : domains.target) total_exclusive += s.exclusive;
        double prev_cov = -1.0;
        std::vector<std::string> prev;
        for (const auto& rep : sweep) {
            std::vector<std::string> ids = rep.selected_ids;
            std::sort(ids.begin(), ids.end());
            ck.expect(std::includes(ids.begin(), ids.end(), prev.begin(), prev.end()), "selection not nested");
            std::size_t hits = 0;
            for (const auto& s : domains.target)
                if (s.exclusive && std::binary_search(ids.begin(), ids.end(), s.id)) ++hits;
            const double cov = static_cast<double>(hits) / static_cast<double>(total_exclusive);
            ck.expect(cov >= prev_cov, "independent coverage fell");
            prev_cov = cov;
            prev = std::move(ids);
        }
    }
    return ck.outcome(std::to_string(run.runs.size()) + " seeds x " + std::to_string(spec.config.fractions.size()) +
                      " fractions");
}

// 10. Anchor-count sweep on the four-mode target.
Outcome anchor_sweep_check() {
    Checker ck;
    const BenchSpecFile spec = canonical();
    double worst_ratio = 0.0;
    for (std::uint64_t seed : spec.seeds) {
        SyntheticDomainSpec d = spec.domain;
        d.seed = seed;
        const SyntheticDomains domains = generate_domains(d);
        Matrix target(domains.target.size(), d.dimension());
        for (std::size_t i = 0; i < target.rows(); ++i)
            for (std::size_t j = 0; j < target.cols(); ++j) target(i, j) = domains.target[i].vector[j];
        auto best = [&](std::size_t k) {
            return kmeans_best_of(target, {.k = k, .seed = derive_seed(seed, "anchor-sweep")}, 5).sse;
        };
        const double k1 = best(1), k4 = best(4), k10 = best(10);
        worst_ratio = std::max(worst_ratio, k4 / k10);
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        ck.expect(k4 < k1, tag + "K=4 not below K=1");
        ck.expect(k4 <= 1.05 * k10, tag + "K=4/K=10 = " + fmt(k4 / k10));
    }
    return ck.outcome("max SSE(K=4)/SSE(K=10) " + fmt(worst_ratio) + " over " + std::to_string(spec.seeds.size()) +
                      " seeds");
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testing::read_file(e.path());
    return out;
}

// 11. End-to-end CLI chain determinism.
Outcome pipeline_determinism() {
    Checker ck;
    const fs::path dir = testing::scratch_dir("acceptance-pipeline");
    const testing::ManifestShape shape;  // 20 samples
    const fs::path target = testing::write_synthetic_manifest(dir / "target", shape, 110);
    const fs::path source = testing::write_synthetic_manifest(dir / "source", shape, 220);
    auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };

    auto chain = [&](const std::string& name, unsigned threads) {
        const fs::path out = dir / name;
        const std::string g = "--seed 7 --threads " + std::to_string(threads) + " --out ";
        const std::vector<std::string> steps{
            g + q(out / "src_vec") + " aggregate --manifest " + q(source),
            g + q(out / "tgt_vec") + " aggregate --manifest " + q(target) + " --map prediction",
            g + q(out / "src_bank") + " cluster --k 4 --domain source --restarts 3 --vectors " +
                q(out / "src_vec" / "vectors.tnsr"),
            g + q(out / "tgt_bank") + " cluster --k 4 --domain target_warmup --restarts 3 --vectors " +
                q(out / "tgt_vec" / "vectors.tnsr"),
            g + q(out / "select") + " select --metric dual_domain --budget 0.2 --vectors " +
                q(out / "tgt_vec" / "vectors.tnsr") + " --source-bank " + q(out / "src_bank" / "anchors.bank") +
                " --target-bank " + q(out / "tgt_bank" / "anchors.bank"),
            g + q(out / "update") + " update-bank --bank " + q(out / "tgt_bank" / "anchors.bank") + " --vectors " +
                q(out / "tgt_vec" / "vectors.tnsr"),
            g + q(out / "loss") + " loss-eval --manifest " + q(target) + " --target-bank " +
                q(out / "update" / "anchors.bank"),
        };
        for (const auto& s : steps) {
            const int code = testing::run_cli(s, dir / (name + ".log"));
            ck.expect(code == 0, name + " step exited " + std::to_string(code) + ": " + s.substr(s.find(" --out")));
        }
        return tree_contents(out);
    };

    const auto t0 = Clock::now();
    const auto a = chain("run_t1_a", 1);
    const auto b = chain("run_t1_b", 1);
    const auto c = chain("run_t4", 4);
    const double secs = seconds_since(t0);
    ck.expect(a.size() >= 12, "chain produced " + std::to_string(a.size()) + " files");
    ck.expect(a == b, "rerun with 1 thread differs");
    ck.expect(a == c, "1 vs 4 threads differ");
    return ck.outcome(std::to_string(a.size()) + " output files identical across 3 runs (threads 1, 1, 4), " +
                      fmt(secs) + " s");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"kmeans-lloyd-oracle", kmeans_oracle},
        {"dual-domain-distance-oracle", dual_distance_oracle},
        {"ema-anchor-bank", ema_bank},
        {"gradient-checks", gradient_checks},
        {"ohem", ohem},
        {"augmentation-provenance", augmentation_provenance},
        {"donor-distribution", donor_distribution_check},
        {"selection-benchmark", selection_benchmark},
        {"budget-sweep", budget_sweep_check},
        {"anchor-sweep", anchor_sweep_check},
        {"pipeline-determinism", pipeline_determinism},
    };
    const auto t0 = Clock::now();
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2zu %-28s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed in %.2f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(),
                seconds_since(t0));
    return failed == 0 ? 0 : 1;
}
