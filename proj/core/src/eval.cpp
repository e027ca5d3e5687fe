#include "eals/eval.hpp"

#include "eals/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <ostream>

namespace eals {

namespace {

std::optional<std::size_t> position(const RankedList& ranked, ItemIndex gt, std::size_t cutoff) {
    const auto n = std::min(cutoff, ranked.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (ranked[k].item == gt) return k + 1;
    }
    return std::nullopt;
}

double gain(std::optional<std::size_t> pos) {
    return pos ? 1.0 / std::log2(static_cast<double>(*pos) + 1.0) : 0.0;
}

EventResult score_event(const RankedList& ranked, const TestEvent& ev, std::size_t cutoff, std::size_t history) {
    const auto pos = position(ranked, ev.item, cutoff);
    return {ev.user, ev.item, ev.timestamp, pos, pos ? 1 : 0, gain(pos), history};
}

void finish(EvalReport& report) {
    double hr = 0.0, nd = 0.0;
    for (const auto& e : report.events) {
        hr += e.hr;
        nd += e.ndcg;
    }
    const auto n = static_cast<double>(report.events.size());
    report.hr = report.events.empty() ? 0.0 : hr / n;
    report.ndcg = report.events.empty() ? 0.0 : nd / n;
}

}  // namespace

int hit_ratio(const RankedList& ranked, ItemIndex gt, std::size_t cutoff) {
    return position(ranked, gt, cutoff) ? 1 : 0;
}

double ndcg(const RankedList& ranked, ItemIndex gt, std::size_t cutoff) { return gain(position(ranked, gt, cutoff)); }

EvalReport evaluate_offline(const FactorModel& model, const InteractionDataset& train,
                            std::span<const TestEvent> test, const EvalOptions& options) {
    if (options.cutoff < 1) throw InvalidInput("cutoff must be >= 1");
    EvalReport report;
    report.cutoff = options.cutoff;

    std::vector<std::size_t> scored;
    for (std::size_t k = 0; k < test.size(); ++k) {
        if (test[k].user < model.num_users() && test[k].item < model.num_items()) {
            scored.push_back(k);
        } else {
            ++report.skipped;
        }
    }
    report.events.resize(scored.size());
    const auto n = static_cast<std::ptrdiff_t>(scored.size());
    const auto* exclude = options.exclude_train ? &train : nullptr;
#pragma omp parallel for schedule(dynamic, 16) num_threads(options.threads) if (options.threads > 1)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto& ev = test[scored[static_cast<std::size_t>(k)]];
        const auto ranked = recommend_topk(model, ev.user, options.cutoff, exclude);
        const auto history = ev.user < train.num_users() ? train.user_row(ev.user).size() : 0;
        report.events[static_cast<std::size_t>(k)] = score_event(ranked, ev, options.cutoff, history);
    }
    finish(report);
    return report;
}

EvalReport evaluate_offline(const FactorModel& model, const SplitPair& split, const EvalOptions& options) {
    return evaluate_offline(model, split.train, split.test, options);
}

EvalReport evaluate_online(OnlineUpdater& updater, std::span<const TestEvent> test, const EvalOptions& options,
                           const IdMap* user_keys, const IdMap* item_keys) {
    if (options.cutoff < 1) throw InvalidInput("cutoff must be >= 1");
    EvalReport report;
    report.cutoff = options.cutoff;
    report.events.reserve(test.size());
    for (const auto& ev : test) {
        updater.ensure_user(ev.user, user_keys);
        updater.ensure_item(ev.item, item_keys);
        const auto history = updater.train().user_row(ev.user).size();
        const auto ranked = updater.recommend(ev.user, options.cutoff, options.exclude_train);
        report.events.push_back(score_event(ranked, ev, options.cutoff, history));
        updater.ingest(ev.user, ev.item, ev.timestamp);
    }
    finish(report);
    return report;
}

EvalReport evaluate_online(const FactorModel& model, const InteractionDataset& train,
                           const ConfidenceWeights& weights, std::span<const TestEvent> test,
                           const OnlineConfig& config, const EvalOptions& options) {
    OnlineUpdater updater(model, train, weights, config);
    return evaluate_online(updater, test, options);
}

std::vector<WindowMean> windowed_means(const EvalReport& report, std::size_t window) {
    if (window < 1) throw InvalidInput("window must be >= 1");
    std::vector<WindowMean> out;
    for (std::size_t begin = 0; begin < report.events.size(); begin += window) {
        const auto end = std::min(report.events.size(), begin + window);
        double hr = 0.0, nd = 0.0;
        for (auto k = begin; k < end; ++k) {
            hr += report.events[k].hr;
            nd += report.events[k].ndcg;
        }
        const auto n = static_cast<double>(end - begin);
        out.push_back({begin, end, hr / n, nd / n});
    }
    return out;
}

std::vector<HistoryBucket> history_breakdown(const EvalReport& report, std::size_t max_history) {
    std::vector<HistoryBucket> out;
    for (std::size_t h = 0; h <= max_history; ++h) out.push_back({h, h == max_history, 0, 0.0, 0.0});
    for (const auto& e : report.events) {
        auto& b = out[std::min(e.history, max_history)];
        ++b.count;
        b.hr += e.hr;
        b.ndcg += e.ndcg;
    }
    for (auto& b : out) {
        if (b.count > 0) {
            b.hr /= static_cast<double>(b.count);
            b.ndcg /= static_cast<double>(b.count);
        }
    }
    return out;
}

void write_report_jsonl(std::ostream& out, const EvalReport& report) {
    for (const auto& e : report.events) {
        nlohmann::ordered_json j;
        j["user"] = e.user;
        j["item"] = e.item;
        j["t"] = e.timestamp;
        j["rank"] = e.rank ? nlohmann::ordered_json(*e.rank) : nlohmann::ordered_json(nullptr);
        j["hr"] = e.hr;
        j["ndcg"] = e.ndcg;
        j["history"] = e.history;
        out << j.dump() << '\n';
    }
    nlohmann::ordered_json agg;
    agg["type"] = "aggregate";
    agg["cutoff"] = report.cutoff;
    agg["events"] = report.events.size();
    agg["hr"] = report.hr;
    agg["ndcg"] = report.ndcg;
    agg["skipped"] = report.skipped;
    out << agg.dump() << '\n';
}

void write_breakdown_csv(std::ostream& out, const std::vector<HistoryBucket>& buckets) {
    const auto old = out.precision(17);
    out << "history,count,hr,ndcg\n";
    for (const auto& b : buckets) {
        out << b.history << (b.open_ended ? "+" : "") << ',' << b.count << ',' << b.hr << ',' << b.ndcg << '\n';
    }
    out.precision(old);
}

}  // namespace eals
